// maprepair: checks source-to-target dependencies against policy views and
// repairs the ones that leak, with hard-coded or learned repair preferences.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "maprepair/parse.hpp"
#include "maprepair/repair.hpp"
#include "maprepair/scenario.hpp"

namespace fs = std::filesystem;
using namespace maprepair;
using nlohmann::ordered_json;

namespace {

constexpr int kExitSafe = 0;
constexpr int kExitUnsafe = 1;
constexpr int kExitUsage = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

PreferenceFunction make_pref(const std::string& spec, int knn_k) {
    if (spec == "max") return PreferenceFunction::p_max();
    if (spec == "avg") return PreferenceFunction::p_avg();
    if (spec.rfind("knn:", 0) == 0) {
        std::string path = spec.substr(4);
        std::vector<Measurement> data = measurements_from_csv(slurp(path));
        return PreferenceFunction::knn(std::move(data), knn_k);
    }
    throw std::runtime_error("unknown preference function '" + spec +
                             "' (expected max, avg or knn:<model.csv>)");
}

uint64_t seed_override(uint64_t seed) {
    if (const char* env = std::getenv("MAPREPAIR_SEED")) return std::stoull(env);
    return seed;
}

struct LoadedSetting {
    Schema source;
    std::vector<Tgd> views;
    std::vector<Tgd> mapping;
};

LoadedSetting load_setting(const std::string& schema_path, const std::string& views_path,
                           const std::string& mapping_path) {
    LoadedSetting s;
    s.source = parse_schema(slurp(schema_path));
    s.views = parse_dependencies(slurp(views_path), s.source);
    s.mapping = parse_dependencies(slurp(mapping_path), s.source);
    return s;
}

ordered_json run_report(const std::string& command, ordered_json inputs, ordered_json outputs,
                        double chase_ms, double safety_ms, double repair_ms,
                        const ChaseStats& stats, long bags, long repairs_applied) {
    ordered_json j;
    j["command"] = command;
    j["inputs"] = std::move(inputs);
    j["outputs"] = std::move(outputs);
    j["timings_ms"] = {{"visible_chase", chase_ms},
                       {"safety_check", safety_ms},
                       {"repair", repair_ms}};
    j["counts"] = {{"bags", bags},
                   {"active_triggers", stats.active_triggers},
                   {"repairs_applied", repairs_applied}};
    return j;
}

int cmd_check(const std::string& schema_path, const std::string& views_path,
              const std::string& mapping_path, bool json_out, const std::string& dot_path) {
    LoadedSetting s = load_setting(schema_path, views_path, mapping_path);
    FreshSource fresh;
    ChaseStats stats;

    Timer t_chase;
    BagForest view_forest = visible_chase(s.views, s.source, fresh, &stats);
    Instance vis_views = flat(view_forest);
    BagForest tgd_forest = visible_chase(s.mapping, s.source, fresh, &stats);
    double chase_ms = t_chase.ms();

    Timer t_safety;
    SafetyReport report = check_safety(tgd_forest, vis_views);
    double safety_ms = t_safety.ms();

    if (!dot_path.empty()) spit(dot_path, tgd_forest.to_dot());

    ordered_json inputs = {{"schema", schema_path}, {"views", views_path},
                           {"mapping", mapping_path}};
    ordered_json outputs;
    outputs["report"] = report.to_json();
    ordered_json j = run_report("check", inputs, outputs, chase_ms, safety_ms, 0.0, stats,
                                long(tgd_forest.bags.size()), 0);
    if (json_out)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << "verdict: " << to_string(report.verdict) << "\n";
    return report.safe() ? kExitSafe : kExitUnsafe;
}

int cmd_repair(const std::string& schema_path, const std::string& views_path,
               const std::string& mapping_path, const std::string& pref_spec, int knn_k,
               int max_iter, bool full_recompute, const std::string& out_path,
               const std::string& log_path, bool json_out) {
    LoadedSetting s = load_setting(schema_path, views_path, mapping_path);
    PreferenceFunction prf = make_pref(pref_spec, knn_k);
    FreshSource fresh;
    ChaseStats stats;

    Timer t_chase;
    BagForest view_forest = visible_chase(s.views, s.source, fresh, &stats);
    Instance vis_views = flat(view_forest);
    double chase_ms = t_chase.ms();

    RepairOptions opts;
    opts.max_iterations = max_iter;
    opts.full_recompute = full_recompute;

    Timer t_repair;
    RepairOutcome outcome = repair(s.mapping, vis_views, s.source, prf, fresh, opts, &stats);
    double repair_ms = t_repair.ms();

    Timer t_safety;
    BagForest final_forest = visible_chase(outcome.tgds, s.source, fresh, &stats);
    SafetyReport verify = check_safety(final_forest, vis_views);
    double safety_ms = t_safety.ms();

    if (!out_path.empty()) spit(out_path, serialize_dependencies(outcome.tgds));
    if (!log_path.empty()) {
        std::string log;
        for (const RepairStep& step : outcome.log) log += step.to_json().dump() + "\n";
        spit(log_path, log);
    }

    ordered_json inputs = {{"schema", schema_path},
                           {"views", views_path},
                           {"mapping", mapping_path},
                           {"pref", pref_spec},
                           {"max_iter", max_iter}};
    ordered_json outputs;
    outputs["verdict"] = to_string(verify.verdict);
    outputs["tgds"] = long(outcome.tgds.size());
    outputs["empty_mapping"] = outcome.tgds.empty();
    if (!out_path.empty()) outputs["repaired"] = out_path;
    if (!log_path.empty()) outputs["log"] = log_path;
    ordered_json j = run_report("repair", inputs, outputs, chase_ms, safety_ms, repair_ms,
                                stats, long(final_forest.bags.size()),
                                long(outcome.log.size()));
    if (json_out)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << "repaired " << outcome.log.size() << " step(s); verdict: "
                  << to_string(verify.verdict) << "\n";
    if (outcome.tgds.empty())
        std::cerr << "warning: every dependency was dropped; the empty mapping is "
                     "trivially safe\n";
    return verify.safe() ? kExitSafe : kExitUnsafe;
}

std::vector<Scenario> load_scenarios_arg(const std::string& dir) {
    std::vector<Scenario> out;
    FreshSource fresh;
    std::vector<std::string> dirs = list_scenario_dirs(dir);
    if (dirs.empty() && fs::exists(dir + "/mapping.tgds")) dirs.push_back(dir);
    for (const std::string& d : dirs) out.push_back(load_scenario(d, fresh));
    return out;
}

std::vector<Scenario> generated_scenarios(int count, uint64_t seed, int n_dep, int n_atoms,
                                          int n_vars, int n_views) {
    std::vector<Scenario> out;
    for (int i = 0; i < count; ++i) {
        ScenarioConfig cfg;
        cfg.seed = seed + uint64_t(i);
        cfg.n_dep = n_dep;
        cfg.n_atoms = n_atoms;
        cfg.n_vars = n_vars;
        cfg.n_views = n_views;
        out.push_back(generate(cfg));
    }
    return out;
}

int cmd_learn(const std::string& golden_spec, const std::string& scenarios_dir, int gen_count,
              uint64_t gen_seed, int n_dep, int n_atoms, int n_vars, int n_views,
              const std::string& out_path, long max_rows) {
    PreferenceFunction golden = make_pref(golden_spec, 1);
    std::vector<Scenario> scenarios;
    if (!scenarios_dir.empty())
        scenarios = load_scenarios_arg(scenarios_dir);
    else if (gen_count > 0)
        scenarios = generated_scenarios(gen_count, seed_override(gen_seed), n_dep, n_atoms,
                                        n_vars, n_views);
    std::vector<Measurement> rows =
        generate_training_set(scenarios, golden, size_t(std::max<long>(0, max_rows)));
    spit(out_path, measurements_to_csv(rows));
    std::cout << "wrote " << rows.size() << " measurement(s) to " << out_path << "\n";
    return kExitSafe;
}

int cmd_eval(const std::string& golden_spec, const std::string& model_path,
             const std::string& pairs_dir, int knn_k, bool json_out) {
    PreferenceFunction golden = make_pref(golden_spec, 1);
    PreferenceFunction learned = make_pref("knn:" + model_path, knn_k);
    std::vector<Scenario> scenarios = load_scenarios_arg(pairs_dir);
    std::vector<std::pair<Tgd, Tgd>> pairs = collect_eval_pairs(scenarios, golden);
    if (pairs.empty()) {
        std::cerr << "error: no candidate pairs found in " << pairs_dir << "\n";
        return kExitUsage;
    }
    auto [matrix, score] = evaluate(golden, learned, pairs);
    ordered_json j = {{"n11", matrix.n11}, {"n22", matrix.n22}, {"n12", matrix.n12},
                      {"n21", matrix.n21}, {"mcc", score}};
    if (json_out)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << "pairs: " << pairs.size() << "  mcc: " << score << "\n";
    return kExitSafe;
}

int cmd_gen(const std::string& out_dir, uint64_t seed, int n_dep, int n_atoms, int n_vars,
            int n_views, int max_arity, const std::string& ops) {
    ScenarioConfig cfg;
    cfg.seed = seed_override(seed);
    cfg.n_dep = n_dep;
    cfg.n_atoms = n_atoms;
    cfg.n_vars = n_vars;
    cfg.n_views = n_views;
    cfg.max_arity = max_arity;
    if (!ops.empty()) {
        cfg.operators.clear();
        std::istringstream in(ops);
        std::string op;
        while (std::getline(in, op, ','))
            if (!op.empty()) cfg.operators.push_back(op);
    }
    Scenario s = generate(cfg);
    write_scenario(s, &cfg, out_dir);
    std::cout << "wrote scenario to " << out_dir << "\n";
    return kExitSafe;
}

int cmd_bench(const std::string& scenarios_dir, int gen_count, uint64_t gen_seed, int n_dep,
              int n_atoms, int n_vars, int n_views, const std::string& pref_spec, int knn_k,
              int max_iter, const std::string& out_path) {
    PreferenceFunction prf = make_pref(pref_spec, knn_k);
    std::vector<Scenario> scenarios;
    if (!scenarios_dir.empty())
        scenarios = load_scenarios_arg(scenarios_dir);
    else
        scenarios = generated_scenarios(gen_count, seed_override(gen_seed), n_dep, n_atoms,
                                        n_vars, n_views);

    std::string lines;
    std::vector<double> repair_times;
    for (const Scenario& s : scenarios) {
        FreshSource fresh;
        ChaseStats stats;
        Timer t_chase;
        Instance vis = scenario_vis_views(s, fresh, &stats);
        BagForest tgd_forest = visible_chase(s.tgds, s.source, fresh, &stats);
        double chase_ms = t_chase.ms();
        Timer t_safety;
        SafetyReport before = check_safety(tgd_forest, vis);
        double safety_ms = t_safety.ms();
        RepairOptions opts;
        opts.max_iterations = max_iter;
        Timer t_repair;
        RepairOutcome outcome = repair(s.tgds, vis, s.source, prf, fresh, opts, &stats);
        double repair_ms = t_repair.ms();
        repair_times.push_back(repair_ms);

        ordered_json inputs = {{"scenario", s.name},
                               {"tgds", long(s.tgds.size())},
                               {"pref", pref_spec}};
        ordered_json outputs = {{"verdict_before", to_string(before.verdict)},
                                {"verdict_after", to_string(outcome.verdict.verdict)},
                                {"tgds_after", long(outcome.tgds.size())}};
        ordered_json line = run_report("bench", inputs, outputs, chase_ms, safety_ms,
                                       repair_ms, stats, long(tgd_forest.bags.size()),
                                       long(outcome.log.size()));
        lines += line.dump() + "\n";
    }
    std::sort(repair_times.begin(), repair_times.end());
    double median = repair_times.empty() ? 0.0 : repair_times[repair_times.size() / 2];
    ordered_json summary = {{"command", "bench-summary"},
                            {"scenarios", long(scenarios.size())},
                            {"median_repair_ms", median}};
    lines += summary.dump() + "\n";
    if (!out_path.empty())
        spit(out_path, lines);
    else
        std::cout << lines;
    return kExitSafe;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-preservation checker and repairer for schema mappings"};
    app.require_subcommand(1);

    // check
    std::string schema_path, views_path, mapping_path, dot_path;
    bool json_out = false;
    CLI::App* check = app.add_subcommand("check", "decide safety of a mapping w.r.t. views");
    check->add_option("schema", schema_path, "source schema file")->required();
    check->add_option("views", views_path, "policy views file")->required();
    check->add_option("mapping", mapping_path, "s-t dependencies file")->required();
    check->add_flag("--json", json_out, "machine-readable report on stdout");
    check->add_option("--dump-forest", dot_path, "write the bag forest as DOT");

    // repair
    std::string pref_spec = "max", out_path, log_path;
    int max_iter = 10;
    int knn_k = 1;
    bool full_recompute = false;
    CLI::App* rep = app.add_subcommand("repair", "rewrite a mapping until it is safe");
    rep->add_option("schema", schema_path, "source schema file")->required();
    rep->add_option("views", views_path, "policy views file")->required();
    rep->add_option("mapping", mapping_path, "s-t dependencies file")->required();
    rep->add_option("--pref", pref_spec, "max | avg | knn:<model.csv>");
    rep->add_option("--knn-k", knn_k, "neighbors for a knn preference (default 1)");
    rep->add_option("--max-iter,-n", max_iter, "second-phase iteration bound (default 10)");
    rep->add_flag("--full-recompute", full_recompute,
                  "recompute the visible chase from scratch each iteration");
    rep->add_option("-o,--out", out_path, "write the repaired dependencies here");
    rep->add_option("--log", log_path, "write the repair step log (JSON lines)");
    rep->add_flag("--json", json_out, "machine-readable report on stdout");

    // learn
    std::string golden_spec = "max", scenarios_dir, model_out = "model.csv";
    int gen_count = 0, g_ndep = 20, g_natoms = 3, g_nvars = 5, g_nviews = 6;
    uint64_t gen_seed = 1;
    long max_rows = 0;
    CLI::App* learn = app.add_subcommand("learn", "record golden preference measurements");
    learn->add_option("--golden", golden_spec, "max | avg")->required();
    learn->add_option("--scenarios", scenarios_dir, "directory of scenario directories");
    learn->add_option("--gen-count", gen_count, "generate this many scenarios instead");
    learn->add_option("--gen-seed", gen_seed, "first seed for generated scenarios");
    learn->add_option("--gen-ndep", g_ndep, "tgds per generated scenario");
    learn->add_option("--gen-natoms", g_natoms, "max body atoms per generated tgd");
    learn->add_option("--gen-nvars", g_nvars, "max exported variables per generated tgd");
    learn->add_option("--gen-nviews", g_nviews, "views per generated scenario");
    learn->add_option("--max-rows", max_rows, "cap on measurements (0 = unlimited)");
    learn->add_option("--out", model_out, "training CSV path")->required();

    // eval
    std::string model_path, pairs_dir;
    CLI::App* eval = app.add_subcommand("eval", "score a learned model against a golden one");
    eval->add_option("--golden", golden_spec, "max | avg")->required();
    eval->add_option("--model", model_path, "training CSV of the learned model")->required();
    eval->add_option("--pairs-from", pairs_dir, "scenario directory for candidate pairs")
        ->required();
    eval->add_option("--knn-k", knn_k, "neighbors (default 1)");
    eval->add_flag("--json", json_out, "machine-readable report on stdout");

    // gen
    std::string gen_out, gen_ops;
    uint64_t one_seed = 42;
    int max_arity = 5;
    CLI::App* gen = app.add_subcommand("gen", "write a synthetic scenario directory");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--seed", one_seed, "generator seed");
    gen->add_option("--n-dep", g_ndep, "number of s-t tgds");
    gen->add_option("--n-atoms", g_natoms, "max body atoms per tgd");
    gen->add_option("--n-vars", g_nvars, "max exported variables per tgd");
    gen->add_option("--n-views", g_nviews, "number of policy views");
    gen->add_option("--max-arity", max_arity, "relation arity cap (<= 5)");
    gen->add_option("--ops", gen_ops, "comma-separated view operators");

    // bench
    std::string bench_out;
    CLI::App* bench = app.add_subcommand("bench", "run check+repair over many scenarios");
    bench->add_option("--scenarios", scenarios_dir, "directory of scenario directories");
    bench->add_option("--gen-count", gen_count, "generate this many scenarios instead");
    bench->add_option("--gen-seed", gen_seed, "first seed for generated scenarios");
    bench->add_option("--gen-ndep", g_ndep, "tgds per generated scenario");
    bench->add_option("--gen-natoms", g_natoms, "max body atoms per generated tgd");
    bench->add_option("--gen-nvars", g_nvars, "max exported variables per generated tgd");
    bench->add_option("--gen-nviews", g_nviews, "views per generated scenario");
    bench->add_option("--pref", pref_spec, "max | avg | knn:<model.csv>");
    bench->add_option("--knn-k", knn_k, "neighbors for a knn preference");
    bench->add_option("--max-iter", max_iter, "second-phase iteration bound");
    bench->add_option("--out", bench_out, "write JSON-lines reports here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (check->parsed())
            return cmd_check(schema_path, views_path, mapping_path, json_out, dot_path);
        if (rep->parsed())
            return cmd_repair(schema_path, views_path, mapping_path, pref_spec, knn_k,
                              max_iter, full_recompute, out_path, log_path, json_out);
        if (learn->parsed())
            return cmd_learn(golden_spec, scenarios_dir, gen_count, gen_seed, g_ndep,
                             g_natoms, g_nvars, g_nviews, model_out, max_rows);
        if (eval->parsed())
            return cmd_eval(golden_spec, model_path, pairs_dir, knn_k, json_out);
        if (gen->parsed())
            return cmd_gen(gen_out, one_seed, g_ndep, g_natoms, g_nvars, g_nviews, max_arity,
                           gen_ops);
        if (bench->parsed())
            return cmd_bench(scenarios_dir, gen_count, gen_seed, g_ndep, g_natoms, g_nvars,
                             g_nviews, pref_spec, knn_k, max_iter, bench_out);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
