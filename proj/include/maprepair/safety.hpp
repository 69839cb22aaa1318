#pragma once

#include "maprepair/chase.hpp"

#include <json.hpp>

namespace maprepair {

enum class Verdict { Safe, Unsafe, PartiallyUnsafe };

std::string to_string(Verdict v);

struct SafetyReport {
    Verdict verdict = Verdict::Safe;
    std::optional<Substitution> witness;
    std::vector<int> unsafe_bags;
    std::vector<int> offending_tgds;

    bool safe() const { return verdict == Verdict::Safe; }
    nlohmann::ordered_json to_json() const;
};

// Per-tgd test: a homomorphism from the body into the views' visible-chase
// instance mapping every exported variable to the critical constant. The
// Safe witness is assembled over per-tgd qualified variables (t<id>.<var>),
// making it a single homomorphism from the disjoint union of the bodies.
SafetyReport is_partially_safe(const std::vector<Tgd>& tgds, const Instance& vis_views);

// A bag is safe when its stored facts admit a *-preserving homomorphism into
// the views' visible-chase instance.
bool bag_is_safe(const Bag& bag, const Instance& vis_views);
bool bag_is_safe_unified(const Bag& bag, const Substitution& unifier, const Instance& vis_views);

// Whole-instance test over an already-computed forest.
SafetyReport check_safety(const BagForest& tgd_forest, const Instance& vis_views);

// Full test: safe iff a *-preserving homomorphism maps the visible chase of
// the tgds into the visible chase of the views.
SafetyReport is_safe(const std::vector<Tgd>& tgds, const std::vector<Tgd>& views,
                     const Schema& source, FreshSource& fresh, ChaseStats* stats = nullptr);

// True iff the all-* tuple is an answer to p over the visible chase of the
// tgds. Rejects queries containing constants or nulls.
bool is_disclosed(const Cq& query, const std::vector<Tgd>& tgds, const Schema& source,
                  FreshSource& fresh);

}  // namespace maprepair
