#include "maprepair/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace maprepair {

nlohmann::ordered_json ScenarioConfig::to_json() const {
    nlohmann::ordered_json j;
    j["n_dep"] = n_dep;
    j["n_atoms"] = n_atoms;
    j["n_vars"] = n_vars;
    j["n_views"] = n_views;
    j["max_arity"] = max_arity;
    j["seed"] = seed;
    j["operators"] = operators;
    return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    c.n_dep = j.value("n_dep", c.n_dep);
    c.n_atoms = j.value("n_atoms", c.n_atoms);
    c.n_vars = j.value("n_vars", c.n_vars);
    c.n_views = j.value("n_views", c.n_views);
    c.max_arity = j.value("max_arity", c.max_arity);
    c.seed = j.value("seed", c.seed);
    if (j.contains("operators")) c.operators = j["operators"].get<std::vector<std::string>>();
    return c;
}

namespace {

Term xvar(int i) { return Term::var("x" + std::to_string(i)); }

void validate(const ScenarioConfig& c) {
    if (c.n_dep < 1) throw std::invalid_argument("n_dep must be positive");
    if (c.n_atoms < 1 || c.n_atoms > 5) throw std::invalid_argument("n_atoms must be in [1,5]");
    if (c.max_arity < 1 || c.max_arity > 5)
        throw std::invalid_argument("max_arity must be in [1,5]");
    if (c.n_views < 1) throw std::invalid_argument("n_views must be positive");
    if (c.n_vars < 1) throw std::invalid_argument("n_vars must be positive");
    if (c.n_vars > c.n_atoms * c.max_arity)
        throw std::invalid_argument("infeasible config: n_vars exceeds total body positions");
    if (c.operators.empty()) throw std::invalid_argument("operators must not be empty");
}

}  // namespace

Scenario generate(const ScenarioConfig& config) {
    validate(config);
    SplitMix64 rng(config.seed);
    Scenario s;
    s.name = "seed" + std::to_string(config.seed);

    int n_rel = std::max(3, std::min(10, config.n_views + 2));
    std::vector<int> arity(size_t(n_rel), 0);
    for (int r = 0; r < n_rel; ++r) {
        arity[size_t(r)] = 1 + int(rng.below(uint64_t(config.max_arity)));
        s.source.add_relation("R" + std::to_string(r + 1), arity[size_t(r)]);
    }
    const std::vector<int32_t>& rels = s.source.relations();

    auto full_atom = [&](int r, int first_var) {
        Atom a;
        a.relation = rels[size_t(r)];
        for (int i = 0; i < arity[size_t(r)]; ++i) a.terms.push_back(xvar(first_var + i));
        return a;
    };

    for (int v = 0; v < config.n_views; ++v) {
        const std::string& op = config.operators[size_t(v) % config.operators.size()];
        Tgd view;
        view.id = v + 1;
        std::string head_name = "V" + std::to_string(v + 1);
        if (op == "copy") {
            int r = v % n_rel;
            Atom body = full_atom(r, 1);
            view.body.push_back(body);
            view.head.emplace_back(head_name, body.terms);
        } else if (op == "merge") {
            int r1 = int(rng.below(uint64_t(n_rel)));
            int r2 = int((uint64_t(r1) + 1 + rng.below(uint64_t(n_rel - 1))) % uint64_t(n_rel));
            Atom a1 = full_atom(r1, 1);
            Atom a2 = full_atom(r2, arity[size_t(r1)] + 1);
            size_t p1 = rng.below(a1.terms.size());
            size_t p2 = rng.below(a2.terms.size());
            a2.terms[p2] = a1.terms[p1];
            view.body.push_back(a1);
            view.body.push_back(a2);
            std::vector<Term> head_vars;
            for (const Atom& a : view.body)
                for (const Term& t : a.terms)
                    if (std::find(head_vars.begin(), head_vars.end(), t) == head_vars.end())
                        head_vars.push_back(t);
            view.head.emplace_back(head_name, head_vars);
        } else if (op == "delete") {
            int r = int(rng.below(uint64_t(n_rel)));
            Atom body = full_atom(r, 1);
            view.body.push_back(body);
            int k = int(body.terms.size());
            std::vector<Term> kept = body.terms;
            if (k >= 2) {
                int drop = 1 + int(rng.below(uint64_t(k - 1)));
                for (int d = 0; d < drop; ++d)
                    kept.erase(kept.begin() + long(rng.below(kept.size())));
            }
            view.head.emplace_back(head_name, kept);
        } else if (op == "selfjoin") {
            int r = -1;
            for (int probe = 0; probe < n_rel; ++probe) {
                int cand = int(rng.below(uint64_t(n_rel)));
                if (arity[size_t(cand)] >= 2) {
                    r = cand;
                    break;
                }
            }
            if (r < 0)
                for (int cand = 0; cand < n_rel; ++cand)
                    if (arity[size_t(cand)] >= 2) r = cand;
            if (r < 0) {
                // No binary relation to self-join; degrade to a copy.
                Atom body = full_atom(v % n_rel, 1);
                view.body.push_back(body);
                view.head.emplace_back(head_name, body.terms);
            } else {
                Atom body = full_atom(r, 1);
                size_t p1 = rng.below(body.terms.size());
                size_t p2 = (p1 + 1 + rng.below(body.terms.size() - 1)) % body.terms.size();
                body.terms[p2] = body.terms[p1];
                view.body.push_back(body);
                std::vector<Term> head_vars;
                for (const Term& t : body.terms)
                    if (std::find(head_vars.begin(), head_vars.end(), t) == head_vars.end())
                        head_vars.push_back(t);
                view.head.emplace_back(head_name, head_vars);
            }
        } else {
            throw std::invalid_argument("unknown view operator: " + op);
        }
        s.views.push_back(std::move(view));
    }

    for (int t = 0; t < config.n_dep; ++t) {
        Tgd tgd;
        tgd.id = t + 1;
        int m = 1 + int(rng.below(uint64_t(config.n_atoms)));
        int next_var = 1;
        std::vector<std::pair<size_t, size_t>> slots;
        for (int a = 0; a < m; ++a) {
            int r = int(rng.below(uint64_t(n_rel)));
            Atom atom = full_atom(r, next_var);
            next_var += arity[size_t(r)];
            for (size_t p = 0; p < atom.terms.size(); ++p)
                slots.emplace_back(size_t(a), p);
            tgd.body.push_back(std::move(atom));
        }
        size_t total = slots.size();
        int merges = total >= 2 ? int(rng.below(3)) : 0;
        for (int j = 0; j < merges; ++j) {
            size_t i1 = rng.below(total);
            size_t i2 = rng.below(total);
            if (i1 == i2) continue;
            tgd.body[slots[i2].first].terms[slots[i2].second] =
                tgd.body[slots[i1].first].terms[slots[i1].second];
        }
        std::vector<Term> vars = tgd.body_vars();
        int e_max = std::min<int>(config.n_vars, int(vars.size()));
        int e = 1 + int(rng.below(uint64_t(e_max)));
        std::vector<Term> exported;
        std::vector<Term> pool = vars;
        for (int j = 0; j < e; ++j) {
            size_t pick = rng.below(pool.size());
            exported.push_back(pool[pick]);
            pool.erase(pool.begin() + long(pick));
        }
        // Keep body-order in the head for readability.
        std::vector<Term> head_vars;
        for (const Term& v : vars)
            if (std::find(exported.begin(), exported.end(), v) != exported.end())
                head_vars.push_back(v);
        tgd.head.emplace_back("T" + std::to_string(t + 1), head_vars);
        s.tgds.push_back(std::move(tgd));
    }
    return s;
}

Instance scenario_vis_views(const Scenario& scenario, FreshSource& fresh, ChaseStats* stats) {
    if (scenario.vis_override) return *scenario.vis_override;
    BagForest forest = visible_chase(scenario.views, scenario.source, fresh, stats);
    return flat(forest);
}

void write_scenario(const Scenario& scenario, const ScenarioConfig* config,
                    const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream(dir + "/source.schema") << serialize_schema(scenario.source);
    std::ofstream(dir + "/views.tgds") << serialize_dependencies(scenario.views);
    std::ofstream(dir + "/mapping.tgds") << serialize_dependencies(scenario.tgds);
    if (scenario.vis_override)
        std::ofstream(dir + "/visins.facts") << serialize_facts(*scenario.vis_override);
    if (config) std::ofstream(dir + "/config.json") << config->to_json().dump(2) << "\n";
}

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

Scenario load_scenario(const std::string& dir, FreshSource& fresh) {
    Scenario s;
    s.name = fs::path(dir).filename().string();
    s.source = parse_schema(slurp(dir + "/source.schema"));
    if (fs::exists(dir + "/views.tgds"))
        s.views = parse_dependencies(slurp(dir + "/views.tgds"), s.source);
    s.tgds = parse_dependencies(slurp(dir + "/mapping.tgds"), s.source);
    if (fs::exists(dir + "/visins.facts"))
        s.vis_override = parse_facts(slurp(dir + "/visins.facts"), fresh);
    if (s.views.empty() && !s.vis_override)
        throw std::runtime_error(dir + ": scenario needs views.tgds or visins.facts");
    return s;
}

std::vector<std::string> list_scenario_dirs(const std::string& dir) {
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        if (fs::exists(entry.path() / "mapping.tgds")) out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Measurement> generate_training_set(const std::vector<Scenario>& scenarios,
                                               const PreferenceFunction& golden,
                                               size_t max_rows) {
    std::vector<Measurement> rows;
    for (const Scenario& scenario : scenarios) {
        if (max_rows && rows.size() >= max_rows) break;
        FreshSource fresh;
        Instance vis = scenario_vis_views(scenario, fresh);
        CandidateObserver observer = [&](const std::vector<Tgd>& candidates) {
            for (size_t i = 0; i < candidates.size(); ++i)
                for (size_t j = i + 1; j < candidates.size(); ++j) {
                    if (max_rows && rows.size() >= max_rows) return;
                    Measurement m;
                    m.features = features(candidates[i], candidates[j]);
                    m.choice = golden.compare(candidates[i], candidates[j]);
                    rows.push_back(m);
                }
        };
        repair(scenario.tgds, vis, scenario.source, golden, fresh, {}, nullptr, observer);
    }
    if (max_rows && rows.size() > max_rows) rows.resize(max_rows);
    return rows;
}

std::vector<std::pair<Tgd, Tgd>> collect_eval_pairs(const std::vector<Scenario>& scenarios,
                                                    const PreferenceFunction& golden) {
    std::vector<std::pair<Tgd, Tgd>> pairs;
    for (const Scenario& scenario : scenarios) {
        FreshSource fresh;
        Instance vis = scenario_vis_views(scenario, fresh);
        CandidateObserver observer = [&pairs](const std::vector<Tgd>& candidates) {
            for (size_t i = 0; i < candidates.size(); ++i)
                for (size_t j = i + 1; j < candidates.size(); ++j) {
                    pairs.emplace_back(candidates[i], candidates[j]);
                    pairs.emplace_back(candidates[j], candidates[i]);
                }
        };
        repair(scenario.tgds, vis, scenario.source, golden, fresh, {}, nullptr, observer);
    }
    return pairs;
}

}  // namespace maprepair
