#pragma once

#include <fstream>
#include <string>

#include "maprepair/parse.hpp"

namespace maprepair::testing {

inline std::string fixture_path(const std::string& rel) {
    return std::string(MAPREPAIR_FIXTURES) + "/" + rel;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string slurp_fixture(const std::string& rel) { return slurp(fixture_path(rel)); }

struct RunningExample {
    Schema source;
    std::vector<Tgd> views;     // V2 reads the northern hospital relation
    std::vector<Tgd> views_hs;  // V2 as displayed in the source material
    std::vector<Tgd> mapping;   // mu_e, mu_c, mu_s
    std::vector<Tgd> mapping_safe;  // mu'_e, mu_c
    std::vector<Tgd> mapping_ec;    // mu_e, mu_c
};

inline RunningExample load_running() {
    RunningExample r;
    r.source = parse_schema(slurp_fixture("running/source.schema"));
    r.views = parse_dependencies(slurp_fixture("running/views.tgds"), r.source);
    r.views_hs = parse_dependencies(slurp_fixture("running/views_hs.tgds"), r.source);
    r.mapping = parse_dependencies(slurp_fixture("running/mapping.tgds"), r.source);
    r.mapping_safe = parse_dependencies(slurp_fixture("running/mapping_safe.tgds"), r.source);
    r.mapping_ec = parse_dependencies(slurp_fixture("running/mapping_ec.tgds"), r.source);
    return r;
}

// Visible-chase instance of the policy views as the repair examples assume
// it: both hospital views join through the northern admissions relation.
inline Instance running_vis_views(FreshSource& fresh) {
    return parse_facts(slurp_fixture("running/i1_hn.facts"), fresh);
}

inline std::vector<Tgd> deps(const Schema& source, const std::string& text) {
    return parse_dependencies(text, source);
}

inline Tgd dep(const Schema& source, const std::string& text) {
    return parse_dependencies(text, source)[0];
}

}  // namespace maprepair::testing
