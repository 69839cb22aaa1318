#include "maprepair/safety.hpp"

namespace maprepair {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Safe: return "Safe";
        case Verdict::Unsafe: return "Unsafe";
        case Verdict::PartiallyUnsafe: return "PartiallyUnsafe";
    }
    return "?";
}

nlohmann::ordered_json SafetyReport::to_json() const {
    nlohmann::ordered_json j;
    j["verdict"] = to_string(verdict);
    if (witness) {
        nlohmann::ordered_json w = nlohmann::ordered_json::object();
        for (const auto& [k, v] : witness->bindings) w[k.to_string()] = v.to_string();
        j["witness"] = w;
    }
    j["unsafe_bags"] = unsafe_bags;
    j["offending_tgds"] = offending_tgds;
    return j;
}

SafetyReport is_partially_safe(const std::vector<Tgd>& tgds, const Instance& vis_views) {
    SafetyReport report;
    Substitution combined;
    for (const Tgd& t : tgds) {
        Substitution fixed;
        for (const Term& x : t.frontier()) fixed.bindings[x] = Term::critical();
        std::optional<Substitution> found;
        find_homomorphisms(t.body, vis_views, fixed, {}, [&found](const Substitution& h) {
            found = h;
            return false;
        });
        if (!found) {
            report.offending_tgds.push_back(t.id);
            continue;
        }
        for (const auto& [k, v] : found->bindings) {
            Term qualified = Term::var("t" + std::to_string(t.id) + "." + k.to_string());
            combined.bindings[qualified] = v;
        }
    }
    if (report.offending_tgds.empty()) {
        report.verdict = Verdict::Safe;
        report.witness = std::move(combined);
    } else {
        report.verdict = Verdict::PartiallyUnsafe;
    }
    return report;
}

bool bag_is_safe(const Bag& bag, const Instance& vis_views) {
    return exists_instance_hom(bag.facts, vis_views);
}

bool bag_is_safe_unified(const Bag& bag, const Substitution& unifier,
                         const Instance& vis_views) {
    Instance unified;
    for (const Fact& f : bag.facts.facts()) unified.insert(unifier.apply(f));
    return exists_instance_hom(unified, vis_views);
}

SafetyReport check_safety(const BagForest& tgd_forest, const Instance& vis_views) {
    SafetyReport report;
    Instance whole = flat(tgd_forest);
    if (std::optional<Substitution> witness = find_instance_hom(whole, vis_views)) {
        report.verdict = Verdict::Safe;
        report.witness = std::move(*witness);
        return report;
    }
    report.verdict = Verdict::Unsafe;
    for (const Bag& b : tgd_forest.bags)
        if (!bag_is_safe_unified(b, tgd_forest.unifier, vis_views))
            report.unsafe_bags.push_back(b.id);
    if (report.unsafe_bags.empty())
        for (const Bag& b : tgd_forest.bags)
            if (!bag_is_safe(b, vis_views)) report.unsafe_bags.push_back(b.id);
    if (report.unsafe_bags.empty()) {
        // Each bag maps on its own but the shared nulls cannot be mapped
        // consistently; report every bag.
        for (const Bag& b : tgd_forest.bags) report.unsafe_bags.push_back(b.id);
    }
    return report;
}

SafetyReport is_safe(const std::vector<Tgd>& tgds, const std::vector<Tgd>& views,
                     const Schema& source, FreshSource& fresh, ChaseStats* stats) {
    BagForest view_forest = visible_chase(views, source, fresh, stats);
    Instance vis_views = flat(view_forest);
    BagForest tgd_forest = visible_chase(tgds, source, fresh, stats);
    return check_safety(tgd_forest, vis_views);
}

bool is_disclosed(const Cq& query, const std::vector<Tgd>& tgds, const Schema& source,
                  FreshSource& fresh) {
    if (!query.constants_free())
        throw std::invalid_argument("disclosure test requires a constants-free query");
    BagForest forest = visible_chase(tgds, source, fresh);
    Instance vis = flat(forest);
    Substitution fixed;
    for (const Term& x : query.free) fixed.bindings[x] = Term::critical();
    return exists_homomorphism(query.atoms, vis, fixed);
}

}  // namespace maprepair
