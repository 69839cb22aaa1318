#pragma once

#include "maprepair/parse.hpp"
#include "maprepair/repair.hpp"

#include <json.hpp>

namespace maprepair {

// splitmix64: tiny public-domain generator, fixed here so scenarios are
// reproducible across implementations. below(n) uses plain modulo.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97f4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
    uint64_t state_;
};

struct ScenarioConfig {
    int n_dep = 5;
    int n_atoms = 3;
    int n_vars = 5;
    int n_views = 4;
    int max_arity = 5;
    uint64_t seed = 0;
    // Cycled over the views, in order: copy, merge, delete, selfjoin.
    std::vector<std::string> operators = {"copy", "merge", "delete", "selfjoin"};

    nlohmann::ordered_json to_json() const;
    static ScenarioConfig from_json(const nlohmann::json& j);
};

struct Scenario {
    std::string name;
    Schema source;
    std::vector<Tgd> views;
    std::vector<Tgd> tgds;
    // When present, stands in for the views' visible-chase instance; the
    // repair pipeline only ever consumes the views through that instance.
    std::optional<Instance> vis_override;
};

// Deterministic synthetic generator: a random source schema, policy views
// built by cycling the configured operators over the relations, and GAV s-t
// tgds of the configured shape. Fully reproducible from the seed.
Scenario generate(const ScenarioConfig& config);

Instance scenario_vis_views(const Scenario& scenario, FreshSource& fresh,
                            ChaseStats* stats = nullptr);

// Directory layout: source.schema, views.tgds, mapping.tgds, config.json,
// optional visins.facts.
void write_scenario(const Scenario& scenario, const ScenarioConfig* config,
                    const std::string& dir);
Scenario load_scenario(const std::string& dir, FreshSource& fresh);
// Subdirectories of `dir` that look like scenarios, sorted by name.
std::vector<std::string> list_scenario_dirs(const std::string& dir);

// Runs the repair pipeline on each scenario with `golden` as the preference
// function and records one measurement per unordered candidate pair the
// function is asked about. max_rows = 0 means unlimited.
std::vector<Measurement> generate_training_set(const std::vector<Scenario>& scenarios,
                                               const PreferenceFunction& golden,
                                               size_t max_rows = 0);

// Candidate pairs for classifier evaluation, emitted in both orders so both
// labels occur.
std::vector<std::pair<Tgd, Tgd>> collect_eval_pairs(const std::vector<Scenario>& scenarios,
                                                    const PreferenceFunction& golden);

}  // namespace maprepair
