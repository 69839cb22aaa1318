#include "support/oracles.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace maprepair::testing {

std::vector<Substitution> brute_force_homomorphisms(const std::vector<Atom>& pattern,
                                                    const Instance& target,
                                                    const Substitution& fixed,
                                                    bool map_nulls) {
    auto mappable = [map_nulls](const Term& t) {
        return t.is_var() || (map_nulls && t.is_null());
    };

    std::vector<Term> unbound;
    for (const Atom& a : pattern)
        for (const Term& t : a.terms)
            if (mappable(t) && !fixed.bindings.count(t) &&
                std::find(unbound.begin(), unbound.end(), t) == unbound.end())
                unbound.push_back(t);

    std::vector<Term> domain = target.term_universe();
    std::vector<Substitution> out;
    if (domain.empty() && !unbound.empty()) return out;

    std::vector<size_t> odometer(unbound.size(), 0);
    for (;;) {
        Substitution h = fixed;
        for (size_t i = 0; i < unbound.size(); ++i) h.bindings[unbound[i]] = domain[odometer[i]];
        bool ok = true;
        for (const Atom& a : pattern) {
            Atom img = a;
            for (Term& t : img.terms)
                if (mappable(t)) t = h.apply(t);
            if (!img.is_ground() || !target.contains(img)) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(h);

        if (unbound.empty()) break;
        size_t i = 0;
        while (i < odometer.size()) {
            if (++odometer[i] < domain.size()) break;
            odometer[i] = 0;
            ++i;
        }
        if (i == odometer.size()) break;
    }
    return out;
}

bool same_substitution_set(std::vector<Substitution> a, std::vector<Substitution> b) {
    auto key = [](const Substitution& s) { return s.to_string(); };
    std::sort(a.begin(), a.end(),
              [&key](const Substitution& x, const Substitution& y) { return key(x) < key(y); });
    std::sort(b.begin(), b.end(),
              [&key](const Substitution& x, const Substitution& y) { return key(x) < key(y); });
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
    return true;
}

namespace {

Instance instantiate(const std::vector<Atom>& head, const Substitution& h,
                     FreshSource& fresh) {
    Substitution ext = h;
    for (const Atom& a : head)
        for (const Term& t : a.terms)
            if (t.is_var() && !ext.bindings.count(t)) ext.bindings[t] = fresh.fresh_null();
    Instance out;
    for (const Atom& a : head) out.insert(ext.apply(a));
    return out;
}

}  // namespace

Instance reference_visins(const std::vector<Tgd>& tgds, const Schema& source,
                          FreshSource& fresh) {
    Instance crt = critical_instance(source);

    Instance forward;
    for (const Tgd& t : tgds)
        for (const Substitution& h : active_triggers(t, crt))
            forward.insert_all(instantiate(t.head, h, fresh));

    Instance input;
    for (const Fact& f : forward.facts())
        if (!crt.contains(f)) input.insert(f);

    Instance current;
    for (const Tgd& t : tgds) {
        Tgd inv = inverse(t);
        for (const Substitution& h : active_triggers(inv, input))
            current.insert_all(instantiate(inv.head, h, fresh));
    }

    // Derived egds, computed directly from homomorphism scans.
    struct Egd {
        std::vector<Atom> body;
        std::vector<Term> equated;
    };
    std::vector<Egd> egds;
    for (const Tgd& t : tgds) {
        std::vector<Term> frontier = t.frontier();
        std::vector<std::vector<Term>> seen;
        for (const Substitution& h : all_homomorphisms(t.body, current)) {
            std::vector<Term> equated;
            for (const Term& x : frontier)
                if (h.apply(x).is_null()) equated.push_back(x);
            if (equated.empty()) continue;
            if (std::find(seen.begin(), seen.end(), equated) != seen.end()) continue;
            seen.push_back(equated);
            egds.push_back(Egd{t.body, equated});
        }
    }

    // Replacing egd chase, restarted after every unification.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Egd& egd : egds) {
            for (const Substitution& h : all_homomorphisms(egd.body, current)) {
                Substitution nu;
                for (const Term& x : egd.equated) {
                    Term side = h.apply(x);
                    if (side.is_null()) nu.bindings[side] = Term::critical();
                }
                if (nu.bindings.empty()) continue;
                Instance next;
                for (const Fact& f : current.facts()) next.insert(nu.apply(f));
                current = std::move(next);
                changed = true;
                break;
            }
            if (changed) break;
        }
    }
    return current;
}

namespace {

bool extend_iso(const Instance& a, const Instance& b, size_t idx,
                std::map<Term, Term>& fwd, std::map<Term, Term>& bwd,
                std::vector<bool>& used) {
    if (idx == a.facts().size()) return true;
    const Fact& f = a.facts()[idx];
    for (size_t j = 0; j < b.facts().size(); ++j) {
        if (used[j]) continue;
        const Fact& g = b.facts()[j];
        if (g.relation != f.relation || g.terms.size() != f.terms.size()) continue;
        std::vector<std::pair<Term, Term>> added;
        bool ok = true;
        for (size_t p = 0; p < f.terms.size() && ok; ++p) {
            const Term& x = f.terms[p];
            const Term& y = g.terms[p];
            if (x.is_null() && y.is_null()) {
                auto fit = fwd.find(x);
                auto bit = bwd.find(y);
                if (fit == fwd.end() && bit == bwd.end()) {
                    fwd[x] = y;
                    bwd[y] = x;
                    added.emplace_back(x, y);
                } else if (fit == fwd.end() || bit == bwd.end() || fit->second != y) {
                    ok = false;
                }
            } else if (x != y) {
                ok = false;
            }
        }
        if (ok) {
            used[j] = true;
            if (extend_iso(a, b, idx + 1, fwd, bwd, used)) return true;
            used[j] = false;
        }
        for (const auto& [x, y] : added) {
            fwd.erase(x);
            bwd.erase(y);
        }
    }
    return false;
}

}  // namespace

bool instances_isomorphic(const Instance& a, const Instance& b) {
    if (a.size() != b.size()) return false;
    std::map<Term, Term> fwd, bwd;
    std::vector<bool> used(b.facts().size(), false);
    return extend_iso(a, b, 0, fwd, bwd, used);
}

bool hom_equivalent(const Instance& a, const Instance& b) {
    return exists_instance_hom(a, b) && exists_instance_hom(b, a);
}

std::string canonical_instance(const Instance& instance) {
    std::map<Term, int> rename;
    std::vector<std::string> lines;
    for (const Fact& f : instance.facts()) {
        Fact c = f;
        for (Term& t : c.terms) {
            if (!t.is_null()) continue;
            auto [it, fresh] = rename.emplace(t, int(rename.size()) + 1);
            (void)fresh;
            t = Term::null(it->second);
        }
        lines.push_back(c.to_string());
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& l : lines) out += l + "\n";
    return out;
}

std::string forest_signature(const BagForest& forest) {
    // Label each bag by origin, depth and canonicalized facts; predecessor
    // structure is folded in by one refinement round over the labels.
    std::map<int, std::string> base;
    for (const Bag& b : forest.bags)
        base[b.id] = b.origin.to_string() + "|d" + std::to_string(b.depth) + "|" +
                     canonical_instance(b.facts);
    std::vector<std::string> lines;
    for (const Bag& b : forest.bags) {
        std::vector<std::string> preds;
        for (int p : b.predecessors) preds.push_back(base.at(p));
        std::sort(preds.begin(), preds.end());
        std::string line = base.at(b.id) + "<-[";
        for (const std::string& p : preds) line += p + ";";
        line += "]";
        lines.push_back(line);
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& l : lines) out += l + "\n";
    return out;
}

}  // namespace maprepair::testing
