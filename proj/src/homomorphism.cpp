#include "maprepair/homomorphism.hpp"

#include <algorithm>

namespace maprepair {

std::string Substitution::to_string() const {
    std::string s = "{";
    bool first = true;
    for (const auto& [k, v] : bindings) {
        if (!first) s += ", ";
        first = false;
        s += k.to_string() + " -> " + v.to_string();
    }
    s += "}";
    return s;
}

namespace {

class Search {
public:
    Search(const std::vector<Atom>& pattern, const Instance& target, const Substitution& fixed,
           const HomOptions& opts, const std::function<bool(const Substitution&)>& visit)
        : pattern_(pattern), target_(target), opts_(opts), visit_(visit) {
        for (const auto& [k, v] : fixed.bindings)
            if (mappable(k)) env_[k] = v;
        fixed_ = env_;
        done_.assign(pattern_.size(), false);
    }

    // Returns false if the visitor asked to stop.
    bool run() { return step(pattern_.size()); }

private:
    bool mappable(const Term& t) const {
        return t.is_var() || (opts_.map_nulls && t.is_null());
    }

    // Term of the pattern under the current environment; unbound mappable
    // terms stay as-is and are reported via `bound`.
    bool lookup(const Term& t, Term& out) const {
        if (!mappable(t)) {
            out = t;
            return true;
        }
        auto it = env_.find(t);
        if (it == env_.end()) return false;
        out = it->second;
        return true;
    }

    int count_unbound(const Atom& a) const {
        std::vector<Term> seen;
        for (const Term& t : a.terms) {
            if (!mappable(t) || env_.count(t)) continue;
            if (std::find(seen.begin(), seen.end(), t) == seen.end()) seen.push_back(t);
        }
        return int(seen.size());
    }

    // Matching fact indices under current bindings, in insertion order.
    std::vector<int> candidates(const Atom& a) const {
        const std::vector<int>* base = nullptr;
        // Prefer the sparsest per-position list among bound positions.
        for (int p = 0; p < int(a.terms.size()); ++p) {
            Term bound;
            if (!lookup(a.terms[size_t(p)], bound)) continue;
            const std::vector<int>* lst = target_.position_index(a.relation, p, bound);
            if (lst && (!base || lst->size() < base->size())) base = lst;
        }
        if (!base) base = &target_.facts_of(a.relation);

        std::vector<int> out;
        for (int idx : *base) {
            const Fact& f = target_.facts()[size_t(idx)];
            if (f.relation != a.relation || f.terms.size() != a.terms.size()) continue;
            bool ok = true;
            for (size_t p = 0; p < a.terms.size() && ok; ++p) {
                Term bound;
                if (lookup(a.terms[p], bound) && bound != f.terms[p]) ok = false;
            }
            if (ok) out.push_back(idx);
        }
        return out;
    }

    bool unify(const Atom& a, const Fact& f, std::vector<Term>& trail) {
        for (size_t p = 0; p < a.terms.size(); ++p) {
            const Term& t = a.terms[p];
            Term bound;
            if (lookup(t, bound)) {
                if (bound != f.terms[p]) return false;
            } else {
                env_[t] = f.terms[p];
                trail.push_back(t);
            }
        }
        return true;
    }

    bool step(size_t remaining) {
        if (remaining == 0) {
            Substitution result;
            result.bindings.insert(env_.begin(), env_.end());
            return visit_(result);
        }
        // Most-constrained-first: fewest unbound terms, then fewest
        // candidates, then pattern position.
        int best = -1;
        int best_unbound = 0;
        std::vector<int> best_cands;
        for (int i = 0; i < int(pattern_.size()); ++i) {
            if (done_[size_t(i)]) continue;
            int unbound = count_unbound(pattern_[size_t(i)]);
            std::vector<int> cands = candidates(pattern_[size_t(i)]);
            if (best < 0 || unbound < best_unbound ||
                (unbound == best_unbound && cands.size() < best_cands.size())) {
                best = i;
                best_unbound = unbound;
                best_cands = std::move(cands);
            }
        }
        done_[size_t(best)] = true;
        bool keep_going = true;
        if (best_unbound == 0) {
            // Fully bound: membership check only, no branching.
            if (!best_cands.empty()) keep_going = step(remaining - 1);
        } else {
            for (int idx : best_cands) {
                std::vector<Term> trail;
                if (unify(pattern_[size_t(best)], target_.facts()[size_t(idx)], trail)) {
                    keep_going = step(remaining - 1);
                }
                for (const Term& t : trail) env_.erase(t);
                if (!keep_going) break;
            }
        }
        done_[size_t(best)] = false;
        return keep_going;
    }

    const std::vector<Atom>& pattern_;
    const Instance& target_;
    HomOptions opts_;
    const std::function<bool(const Substitution&)>& visit_;
    std::unordered_map<Term, Term, TermHash> env_;
    std::unordered_map<Term, Term, TermHash> fixed_;
    std::vector<bool> done_;
};

}  // namespace

void find_homomorphisms(const std::vector<Atom>& pattern, const Instance& target,
                        const Substitution& fixed, const HomOptions& opts,
                        const std::function<bool(const Substitution&)>& visit) {
    Search(pattern, target, fixed, opts, visit).run();
}

std::vector<Substitution> all_homomorphisms(const std::vector<Atom>& pattern,
                                            const Instance& target, const Substitution& fixed,
                                            const HomOptions& opts) {
    std::vector<Substitution> out;
    find_homomorphisms(pattern, target, fixed, opts, [&out](const Substitution& s) {
        out.push_back(s);
        return true;
    });
    return out;
}

bool exists_homomorphism(const std::vector<Atom>& pattern, const Instance& target,
                         const Substitution& fixed, const HomOptions& opts) {
    bool found = false;
    find_homomorphisms(pattern, target, fixed, opts, [&found](const Substitution&) {
        found = true;
        return false;
    });
    return found;
}

bool exists_instance_hom(const Instance& from, const Instance& to) {
    return exists_homomorphism(from.facts(), to, {}, HomOptions{.map_nulls = true});
}

std::optional<Substitution> find_instance_hom(const Instance& from, const Instance& to) {
    std::optional<Substitution> out;
    find_homomorphisms(from.facts(), to, {}, HomOptions{.map_nulls = true},
                       [&out](const Substitution& s) {
                           out = s;
                           return false;
                       });
    return out;
}

std::vector<Substitution> active_triggers(const Tgd& tgd, const Instance& instance) {
    std::vector<Substitution> out;
    std::unordered_set<Term, TermHash> head_vars;
    for (const Atom& a : tgd.head)
        for (const Term& t : a.terms)
            if (t.is_var()) head_vars.insert(t);
    for (Substitution& h : all_homomorphisms(tgd.body, instance)) {
        Substitution on_head;
        for (const auto& [k, v] : h.bindings)
            if (head_vars.count(k)) on_head.bindings.emplace(k, v);
        if (!exists_homomorphism(tgd.head, instance, on_head)) out.push_back(std::move(h));
    }
    return out;
}

std::vector<Substitution> active_triggers(const DerivedEgd& egd, const Instance& instance) {
    std::vector<Substitution> out;
    for (Substitution& h : all_homomorphisms(egd.body, instance)) {
        bool active = false;
        for (const Term& x : egd.equated)
            if (!h.apply(x).is_critical()) active = true;
        if (active) out.push_back(std::move(h));
    }
    return out;
}

bool is_homomorphism(const std::vector<Atom>& pattern, const Instance& target,
                     const Substitution& h) {
    for (const Atom& a : pattern) {
        Atom image = h.apply(a);
        for (const Term& t : image.terms)
            if (t.is_var()) return false;
        if (!target.contains(image)) return false;
    }
    return true;
}

}  // namespace maprepair
