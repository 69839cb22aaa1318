#include "maprepair/chase.hpp"

#include <algorithm>

namespace maprepair {

namespace {

// Extends a trigger with fresh nulls for unbound (existential) head
// variables and instantiates the head.
Instance instantiate_head(const std::vector<Atom>& head, const Substitution& h,
                          FreshSource& fresh) {
    Substitution ext = h;
    for (const Atom& a : head)
        for (const Term& t : a.terms)
            if (t.is_var() && !ext.bindings.count(t)) ext.bindings[t] = fresh.fresh_null();
    Instance out;
    for (const Atom& a : head) out.insert(ext.apply(a));
    return out;
}

bool is_active_tgd_trigger(const Instance& instance, const Tgd& tgd, const Substitution& h) {
    for (const Atom& a : tgd.body) {
        Atom img = h.apply(a);
        if (!img.is_ground() || !instance.contains(img)) return false;
    }
    Substitution on_head;
    std::unordered_set<Term, TermHash> head_vars;
    for (const Atom& a : tgd.head)
        for (const Term& t : a.terms)
            if (t.is_var()) head_vars.insert(t);
    for (const auto& [k, v] : h.bindings)
        if (head_vars.count(k)) on_head.bindings.emplace(k, v);
    return !exists_homomorphism(tgd.head, instance, on_head);
}

}  // namespace

Instance chase_tgd_step(const Instance& instance, const Tgd& tgd, const Substitution& h,
                        FreshSource& fresh) {
    if (!is_active_tgd_trigger(instance, tgd, h))
        throw std::invalid_argument("substitution is not an active trigger for tgd " +
                                    std::to_string(tgd.id));
    Instance out = instance;
    out.insert_all(instantiate_head(tgd.head, h, fresh));
    return out;
}

Substitution egd_unifier(const Term& lhs, const Term& rhs) {
    Substitution nu;
    if (lhs == rhs) return nu;
    if (lhs.is_constant_like() && rhs.is_constant_like())
        throw ChaseFailure("chase failure: cannot unify constants " + lhs.to_string() +
                           " and " + rhs.to_string());
    if (lhs.is_constant_like())
        nu.bindings[rhs] = lhs;
    else
        nu.bindings[lhs] = rhs;
    return nu;
}

Instance chase_egd_step(const Instance& instance, const DerivedEgd& egd, const Substitution& h) {
    Substitution nu;
    for (const Term& x : egd.equated) {
        Term side = h.apply(x);
        Substitution one = egd_unifier(side, Term::critical());
        nu.bindings.insert(one.bindings.begin(), one.bindings.end());
    }
    if (nu.bindings.empty())
        throw std::invalid_argument("substitution is not an active trigger for the egd");
    Instance out;
    for (const Fact& f : instance.facts()) out.insert(nu.apply(f));
    return out;
}

Instance chase(const Instance& instance, const std::vector<Tgd>& tgds, FreshSource& fresh,
               ChaseStats* stats) {
    Instance current = instance;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Tgd& t : tgds) {
            for (const Substitution& h : active_triggers(t, current)) {
                if (stats) stats->active_triggers++;
                // Re-check: an earlier application this round may already
                // satisfy the head.
                if (!is_active_tgd_trigger(current, t, h)) continue;
                current.insert_all(instantiate_head(t.head, h, fresh));
                changed = true;
            }
        }
    }
    return current;
}

std::vector<DerivedEgd> derived_egds(const std::vector<Tgd>& tgds, const Instance& instance) {
    std::vector<DerivedEgd> out;
    for (const Tgd& t : tgds) {
        std::vector<Term> frontier = t.frontier();
        std::vector<std::vector<Term>> seen_subsets;
        for (const Substitution& h : all_homomorphisms(t.body, instance)) {
            std::vector<Term> equated;
            for (const Term& x : frontier)
                if (h.apply(x).is_null()) equated.push_back(x);
            if (equated.empty()) continue;
            if (std::find(seen_subsets.begin(), seen_subsets.end(), equated) !=
                seen_subsets.end())
                continue;
            seen_subsets.push_back(equated);
            DerivedEgd egd;
            egd.body = t.body;
            egd.equated = equated;
            egd.origin = t.id;
            out.push_back(std::move(egd));
        }
    }
    return out;
}

std::string BagOrigin::to_string() const {
    switch (kind) {
        case Kind::InverseTgd: return "inv(t" + std::to_string(tgd_id) + ")";
        case Kind::DerivedEgd: return "egd(t" + std::to_string(tgd_id) + ")";
    }
    return "?";
}

const Bag* BagForest::find(int id) const {
    for (const Bag& b : bags)
        if (b.id == id) return &b;
    return nullptr;
}

bool BagForest::has_successor(int id) const {
    for (const Bag& b : bags)
        if (std::find(b.predecessors.begin(), b.predecessors.end(), id) !=
            b.predecessors.end())
            return true;
    return false;
}

std::vector<int> BagForest::support(int id) const {
    const Bag* b = find(id);
    if (!b) return {};
    if (b->depth == 1) return {id};
    std::vector<int> out;
    for (int pred : b->predecessors)
        for (int leaf : support(pred))
            if (std::find(out.begin(), out.end(), leaf) == out.end()) out.push_back(leaf);
    return out;
}

std::string BagForest::to_dot() const {
    std::string s = "digraph bags {\n";
    for (const Bag& b : bags) {
        s += "  b" + std::to_string(b.id) + " [label=\"b" + std::to_string(b.id) +
             " d=" + std::to_string(b.depth) + " " + b.origin.to_string() + "\"];\n";
    }
    for (const Bag& b : bags)
        for (int pred : b.predecessors)
            s += "  b" + std::to_string(pred) + " -> b" + std::to_string(b.id) + ";\n";
    s += "}\n";
    return s;
}

BagForest visible_chase(const std::vector<Tgd>& tgds, const Schema& source, FreshSource& fresh,
                        ChaseStats* stats, const ChaseMemo* reuse, ChaseMemo* memo_out) {
    BagForest forest;
    Instance crt = critical_instance(source);

    auto reusable = [&](int id, const std::string& key) -> const ChaseMemo::PerTgd* {
        if (!reuse) return nullptr;
        auto it = reuse->per_tgd.find(id);
        if (it == reuse->per_tgd.end() || it->second.structure_key != key) return nullptr;
        return &it->second;
    };

    // Phase 1: chase Crt(S) with the tgds. One bag per active trigger; only
    // the facts are needed downstream.
    Instance b0_union;
    std::map<int, ChaseMemo::PerTgd> memo;
    for (const Tgd& t : tgds) {
        std::string key = t.canonical_key();
        ChaseMemo::PerTgd entry;
        entry.structure_key = key;
        if (const ChaseMemo::PerTgd* prev = reusable(t.id, key)) {
            entry.b0_facts = prev->b0_facts;
        } else {
            std::vector<Substitution> triggers = active_triggers(t, crt);
            if (stats) stats->active_triggers += long(triggers.size());
            if (!triggers.empty()) {
                Instance facts;
                for (const Substitution& h : triggers)
                    facts.insert_all(instantiate_head(t.head, h, fresh));
                entry.b0_facts = std::move(facts);
            }
        }
        if (entry.b0_facts) b0_union.insert_all(*entry.b0_facts);
        memo.emplace(t.id, std::move(entry));
    }

    // Phase 2: chase the target-side facts (minus the critical instance)
    // with the inverse tgds; each trigger yields a depth-1 bag.
    Instance b1_input;
    for (const Fact& f : b0_union.facts())
        if (!crt.contains(f)) b1_input.insert(f);

    int next_id = 1;
    Instance i1;
    for (const Tgd& t : tgds) {
        Tgd inv = inverse(t);
        ChaseMemo::PerTgd& entry = memo.at(t.id);
        const ChaseMemo::PerTgd* prev = reusable(t.id, entry.structure_key);
        std::vector<Substitution> triggers = active_triggers(inv, b1_input);
        if (stats) stats->active_triggers += long(triggers.size());
        for (const Substitution& h : triggers) {
            const Bag* reused = nullptr;
            if (prev) {
                for (const auto& [ph, pb] : prev->b1)
                    if (ph == h) {
                        reused = &pb;
                        break;
                    }
            }
            Bag bag;
            if (reused) {
                bag = *reused;
            } else {
                bag.facts = instantiate_head(inv.head, h, fresh);
                bag.origin = BagOrigin{BagOrigin::Kind::InverseTgd, t.id};
                bag.trigger = h;
                for (const Atom& a : inv.body) bag.premise.insert(h.apply(a));
                bag.depth = 1;
            }
            bag.id = next_id++;
            entry.b1.emplace_back(h, bag);
            i1.insert_all(bag.facts);
            forest.bags.push_back(std::move(bag));
        }
    }

    // Phase 3: derived egds from the intermediate instance, then the egd
    // loop. Triggers are enumerated against the previous round's instance;
    // relevance considers the previous round's bags.
    forest.egds = derived_egds(tgds, i1);

    Instance current = b0_union;
    current.insert_all(i1);
    bool changed = true;
    while (changed) {
        changed = false;
        Instance snapshot = current;
        size_t snapshot_bags = forest.bags.size();
        for (const DerivedEgd& egd : forest.egds) {
            std::vector<Substitution> triggers = active_triggers(egd, snapshot);
            if (stats) stats->active_triggers += long(triggers.size());
            for (const Substitution& h : triggers) {
                Substitution nu;
                for (const Term& x : egd.equated) {
                    Term side = h.apply(x);
                    if (side.is_critical()) continue;
                    if (!side.is_null())
                        throw ChaseFailure("visible chase met a non-null, non-critical term");
                    nu.bindings[side] = Term::critical();
                }
                if (nu.bindings.empty()) continue;

                Instance premise;
                for (const Atom& a : egd.body) premise.insert(h.apply(a));

                std::vector<int> relevant;
                for (size_t bi = 0; bi < snapshot_bags; ++bi) {
                    const Bag& b = forest.bags[bi];
                    bool has_premise_fact = false;
                    for (const Fact& f : premise.facts())
                        if (b.facts.contains(f)) has_premise_fact = true;
                    if (!has_premise_fact) continue;
                    bool has_null = false;
                    for (const auto& [n, star] : nu.bindings) {
                        for (const Fact& f : b.facts.facts())
                            for (const Term& t : f.terms)
                                if (t == n) has_null = true;
                        (void)star;
                    }
                    if (has_null) relevant.push_back(b.id);
                }

                // The unification happens regardless of whether the derived
                // bag contributes new facts; flat() needs it either way.
                for (const auto& [n, star] : nu.bindings) forest.unifier.bindings[n] = star;

                Instance derived;
                for (int pred_id : relevant) {
                    const Bag* pred = forest.find(pred_id);
                    for (const Fact& f : pred->facts.facts()) derived.insert(nu.apply(f));
                }
                bool has_new = false;
                for (const Fact& f : derived.facts())
                    if (!current.contains(f)) has_new = true;
                if (!has_new) continue;

                Bag bag;
                bag.id = next_id++;
                bag.facts = derived;
                bag.origin = BagOrigin{BagOrigin::Kind::DerivedEgd, egd.origin};
                bag.trigger = h;
                bag.premise = premise;
                bag.predecessors = relevant;
                int depth = 1;
                for (int pred_id : relevant)
                    depth = std::max(depth, forest.find(pred_id)->depth + 1);
                bag.depth = relevant.empty() ? 1 : depth;
                current.insert_all(derived);
                forest.bags.push_back(std::move(bag));
                changed = true;
            }
        }
    }

    if (memo_out) memo_out->per_tgd = std::move(memo);
    return forest;
}

Instance flat(const BagForest& forest) {
    Instance out;
    for (const Bag& b : forest.bags)
        for (const Fact& f : b.facts.facts()) out.insert(forest.unifier.apply(f));
    return out;
}

}  // namespace maprepair
