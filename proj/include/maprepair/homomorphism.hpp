#pragma once

#include <functional>

#include "maprepair/model.hpp"

namespace maprepair {

// A substitution maps variables (and, for instance-to-instance matching,
// labeled nulls) to terms. Constants always map to themselves; in particular
// the critical constant is preserved by construction.
struct Substitution {
    std::map<Term, Term> bindings;

    Term apply(const Term& t) const {
        auto it = bindings.find(t);
        return it == bindings.end() ? t : it->second;
    }
    Atom apply(const Atom& a) const {
        Atom out = a;
        for (Term& t : out.terms) t = apply(t);
        return out;
    }
    std::vector<Atom> apply(const std::vector<Atom>& atoms) const {
        std::vector<Atom> out;
        out.reserve(atoms.size());
        for (const Atom& a : atoms) out.push_back(apply(a));
        return out;
    }

    bool operator==(const Substitution& o) const { return bindings == o.bindings; }
    std::string to_string() const;
};

struct HomOptions {
    // When set, labeled nulls occurring in the pattern are treated as
    // mappable (used when matching one instance into another). Otherwise
    // nulls are rigid like constants.
    bool map_nulls = false;
};

// Enumerates every extension of `fixed` mapping each pattern atom onto a fact
// of `target`. Deterministic: atoms are processed most-constrained-first
// (fewest unbound terms, then fewest candidate facts, then position) and
// candidate facts in insertion order. The sequence is duplicate-free. The
// visitor returns false to stop the enumeration.
void find_homomorphisms(const std::vector<Atom>& pattern, const Instance& target,
                        const Substitution& fixed, const HomOptions& opts,
                        const std::function<bool(const Substitution&)>& visit);

std::vector<Substitution> all_homomorphisms(const std::vector<Atom>& pattern,
                                            const Instance& target,
                                            const Substitution& fixed = {},
                                            const HomOptions& opts = {});

bool exists_homomorphism(const std::vector<Atom>& pattern, const Instance& target,
                         const Substitution& fixed = {}, const HomOptions& opts = {});

// Instance-to-instance homomorphism preserving the critical constant.
bool exists_instance_hom(const Instance& from, const Instance& to);
std::optional<Substitution> find_instance_hom(const Instance& from, const Instance& to);

// Active triggers. For a tgd: homomorphisms from the body into I that admit
// no extension to the head in I. For a derived egd: homomorphisms h with
// h(x) != * for some equated x.
std::vector<Substitution> active_triggers(const Tgd& tgd, const Instance& instance);
std::vector<Substitution> active_triggers(const DerivedEgd& egd, const Instance& instance);

// Verifies h maps every pattern atom onto a fact of target (h total on the
// pattern's variables). Used by the composition-closure property tests.
bool is_homomorphism(const std::vector<Atom>& pattern, const Instance& target,
                     const Substitution& h);

}  // namespace maprepair
