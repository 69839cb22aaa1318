#pragma once

#include "maprepair/homomorphism.hpp"
#include "maprepair/model.hpp"

namespace maprepair {

class ChaseFailure : public std::runtime_error {
public:
    explicit ChaseFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct ChaseStats {
    long active_triggers = 0;
};

// --------------------------------------------------------------------------
// Plain chase steps
// --------------------------------------------------------------------------

// I union h'(head) where h' extends h with a fresh labeled null per
// existential head variable. Throws std::invalid_argument if h is not an
// active trigger for the tgd in I.
Instance chase_tgd_step(const Instance& instance, const Tgd& tgd, const Substitution& h,
                        FreshSource& fresh);

// Applies the unification required by a (derived) egd trigger: every equated
// variable is forced equal to the critical constant, and the renaming is
// applied to the whole instance. Throws std::invalid_argument when h violates
// the precondition (no equated side differs) and ChaseFailure when two
// distinct constants would have to be unified.
Instance chase_egd_step(const Instance& instance, const DerivedEgd& egd, const Substitution& h);

// Single-equality unifier per the egd chase-step rule; fails when both sides
// are constants.
Substitution egd_unifier(const Term& lhs, const Term& rhs);

// Fixpoint chase of I with a set of tgds (no egds). Deterministic: tgds in
// input order, triggers in enumeration order.
Instance chase(const Instance& instance, const std::vector<Tgd>& tgds, FreshSource& fresh,
               ChaseStats* stats = nullptr);

// One derived egd per tgd and realized equated subset: for every homomorphism
// h from body(tgd) into I with h(x) in Nulls for some frontier x, the egd
// equating exactly those frontier variables with * . Deduplicated.
std::vector<DerivedEgd> derived_egds(const std::vector<Tgd>& tgds, const Instance& instance);

// --------------------------------------------------------------------------
// Bag-organized visible chase
// --------------------------------------------------------------------------

struct BagOrigin {
    enum class Kind { InverseTgd, DerivedEgd };
    Kind kind = Kind::InverseTgd;
    int tgd_id = 0;  // for egd bags, the origin of the derived egd

    bool operator==(const BagOrigin& o) const { return kind == o.kind && tgd_id == o.tgd_id; }
    std::string to_string() const;
};

struct Bag {
    int id = 0;
    Instance facts;
    BagOrigin origin;
    Substitution trigger;  // sub(beta)
    Instance premise;      // prem(beta) = h(body(dependency))
    std::vector<int> predecessors;
    int depth = 1;
};

// Memo of the tgd phases of a previous chase, enabling incremental
// recomputation: depth-1 bags of unchanged tgds are reused (same labeled
// nulls); everything egd-derived is re-derived.
struct ChaseMemo {
    struct PerTgd {
        std::string structure_key;
        std::optional<Instance> b0_facts;
        std::vector<std::pair<Substitution, Bag>> b1;
    };
    std::map<int, PerTgd> per_tgd;
};

struct BagForest {
    std::vector<Bag> bags;
    // Accumulated null -> * unifications from the egd phase.
    Substitution unifier;
    std::vector<DerivedEgd> egds;

    const Bag* find(int id) const;
    bool has_successor(int id) const;
    // The depth-1 leaves supporting a bag (the bag itself when depth 1).
    std::vector<int> support(int id) const;
    std::string to_dot() const;
};

// Algorithm: chase the critical instance of `source` with `tgds`, chase the
// result (minus the critical instance) with the inverses, then run the
// derived egds to a fixpoint, recording one bag per chase step. The returned
// forest holds the inverse-phase and egd-phase bags.
BagForest visible_chase(const std::vector<Tgd>& tgds, const Schema& source, FreshSource& fresh,
                        ChaseStats* stats = nullptr, const ChaseMemo* reuse = nullptr,
                        ChaseMemo* memo_out = nullptr);

// Union of all bag facts with the accumulated unifier applied, deduplicated.
Instance flat(const BagForest& forest);

}  // namespace maprepair
