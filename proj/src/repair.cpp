#include "maprepair/repair.hpp"

#include <algorithm>
#include <set>

namespace maprepair {

std::string to_string(RepairKind k) {
    switch (k) {
        case RepairKind::BreakJoinHideVar: return "BreakJoinHideVar";
        case RepairKind::HideExported: return "HideExported";
        case RepairKind::ModifyBody: return "ModifyBody";
        case RepairKind::DropTgd: return "DropTgd";
    }
    return "?";
}

nlohmann::ordered_json RepairStep::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = to_string(kind);
    j["tgd"] = original_id;
    if (result)
        j["result"] = result->to_string();
    else
        j["result"] = nullptr;
    j["iteration"] = iteration;
    return j;
}

namespace {

void log_step(std::vector<RepairStep>* log, RepairKind kind, int id, std::optional<Tgd> result,
              int iteration) {
    if (!log) return;
    RepairStep s;
    s.kind = kind;
    s.original_id = id;
    s.result = std::move(result);
    s.iteration = iteration;
    log->push_back(std::move(s));
}

// Removes the head positions holding the given variables. The variables stop
// being exported; head atoms may become nullary.
Tgd drop_head_vars(const Tgd& t, const std::set<Term>& hide) {
    Tgd out = t;
    for (Atom& a : out.head) {
        std::vector<Term> kept;
        for (const Term& term : a.terms)
            if (!(term.is_var() && hide.count(term))) kept.push_back(term);
        a.terms = std::move(kept);
    }
    return out;
}

// Ties: when the preference function does not separate two repairs in either
// argument order, the lexicographically smallest serialized form wins.
const Tgd& select_best(const std::vector<Tgd>& candidates, const PreferenceFunction& prf) {
    const Tgd* winner = &candidates[0];
    for (size_t i = 1; i < candidates.size(); ++i) {
        const Tgd& challenger = candidates[i];
        Choice ab = prf.compare(*winner, challenger);
        Choice ba = prf.compare(challenger, *winner);
        if (ab == Choice::Second && ba == Choice::First) {
            winner = &challenger;
        } else if (ab == Choice::First && ba == Choice::Second) {
            // keep winner
        } else if (challenger.to_string() < winner->to_string()) {
            winner = &challenger;
        }
    }
    return *winner;
}

// One frepair rewriting of `mu` for a single homomorphism xi from the
// fresh-atom set C into the views' instance.
Tgd rewrite_for_xi(const Tgd& mu, const std::vector<Atom>& c_atoms, const Substitution& xi,
                   FreshSource& fresh, std::unordered_set<int32_t>& avoid) {
    std::unordered_set<Term, TermHash> frontier;
    for (const Term& x : mu.frontier()) frontier.insert(x);

    std::vector<std::pair<Term, Term>> rho;  // original var -> prior replacement
    std::map<Term, Term> psi;                // partial body-to-instance substitution
    Tgd out = mu;

    for (size_t ai = 0; ai < mu.body.size(); ++ai) {
        for (size_t p = 0; p < mu.body[ai].terms.size(); ++p) {
            Term x = mu.body[ai].terms[p];
            Term target = xi.apply(c_atoms[ai].terms[p]);
            bool violation = (frontier.count(x) && !target.is_critical()) ||
                             (psi.count(x) && psi.at(x) != target);
            if (violation) {
                Term replacement;
                bool reused = false;
                for (const auto& [orig, repl] : rho) {
                    if (orig == x && psi.count(repl) && psi.at(repl) == target) {
                        replacement = repl;
                        reused = true;
                        break;
                    }
                }
                if (!reused) {
                    replacement = fresh.fresh_var(avoid);
                    avoid.insert(replacement.id);
                    rho.emplace_back(x, replacement);
                    psi[replacement] = target;
                }
                out.body[ai].terms[p] = replacement;
            } else if (!psi.count(x)) {
                psi[x] = target;
            }
        }
    }

    // Frontier variables with no remaining body occurrence leave the head.
    std::unordered_set<Term, TermHash> body_vars;
    for (const Atom& a : out.body)
        for (const Term& t : a.terms)
            if (t.is_var()) body_vars.insert(t);
    std::set<Term> hide;
    for (const Term& x : mu.frontier())
        if (!body_vars.count(x)) hide.insert(x);
    if (!hide.empty()) out = drop_head_vars(out, hide);
    return out;
}

}  // namespace

std::vector<Tgd> frepair(const std::vector<Tgd>& tgds, const Instance& vis_views,
                         const PreferenceFunction& prf, FreshSource& fresh,
                         std::vector<RepairStep>* log, const CandidateObserver& observer) {
    std::vector<Tgd> out;
    for (const Tgd& mu : tgds) {
        std::unordered_set<int32_t> avoid = mu.var_names();
        std::vector<Atom> c_atoms;
        for (const Atom& b : mu.body) {
            Atom c;
            c.relation = b.relation;
            for (size_t i = 0; i < b.terms.size(); ++i) {
                Term v = fresh.fresh_var(avoid);
                avoid.insert(v.id);
                c.terms.push_back(v);
            }
            c_atoms.push_back(std::move(c));
        }

        std::vector<Substitution> xis = all_homomorphisms(c_atoms, vis_views);
        if (xis.empty()) {
            // The body relations never co-occur in the views' instance; no
            // rewriting can make this tgd partially safe.
            log_step(log, RepairKind::DropTgd, mu.id, std::nullopt, -1);
            continue;
        }

        bool already_fine = false;
        std::vector<Tgd> candidates;
        std::set<std::string> keys;
        for (const Substitution& xi : xis) {
            Tgd r = rewrite_for_xi(mu, c_atoms, xi, fresh, avoid);
            if (r.same_structure(mu))
                already_fine = true;
            else if (keys.insert(r.canonical_key()).second)
                candidates.push_back(std::move(r));
        }
        if (already_fine) {
            out.push_back(mu);
            continue;
        }
        if (observer && candidates.size() >= 2) observer(candidates);
        Tgd best = select_best(candidates, prf);
        best.id = mu.id;
        log_step(log, RepairKind::BreakJoinHideVar, mu.id, best, -1);
        out.push_back(std::move(best));
    }
    return out;
}

HideResult hide_exported(const Bag& bag, const Tgd& origin, const Instance& vis_views,
                         const PreferenceFunction& prf, FreshSource& fresh,
                         const CandidateObserver& observer) {
    std::unordered_set<int32_t> avoid = origin.var_names();
    std::map<Term, Term> nu;      // null -> fresh variable
    std::map<Term, Term> nu_inv;  // fresh variable -> null
    std::vector<Atom> pattern;
    for (const Fact& f : bag.premise.facts()) {
        Atom a = f;
        for (Term& t : a.terms) {
            if (!t.is_null()) continue;
            auto it = nu.find(t);
            if (it == nu.end()) {
                Term v = fresh.fresh_var(avoid);
                avoid.insert(v.id);
                it = nu.emplace(t, v).first;
                nu_inv.emplace(v, t);
            }
            t = it->second;
        }
        pattern.push_back(std::move(a));
    }

    std::vector<Substitution> xis = all_homomorphisms(pattern, vis_views);
    if (xis.empty()) return {HideResult::Status::NoHomomorphism, std::nullopt};

    std::vector<Term> frontier = origin.frontier();
    std::vector<Tgd> candidates;
    std::set<std::string> keys;
    for (const Substitution& xi : xis) {
        std::set<Term> hide;
        for (const auto& [v, null_term] : nu_inv) {
            if (xi.apply(v).is_critical()) continue;
            for (const Term& y : frontier)
                if (bag.trigger.apply(y) == null_term) hide.insert(y);
        }
        if (hide.empty()) continue;
        Tgd r = drop_head_vars(origin, hide);
        if (!r.same_structure(origin) && keys.insert(r.canonical_key()).second)
            candidates.push_back(std::move(r));
    }
    if (candidates.empty()) return {HideResult::Status::NoViolation, std::nullopt};
    if (observer && candidates.size() >= 2) observer(candidates);
    Tgd best = select_best(candidates, prf);
    best.id = origin.id;
    return {HideResult::Status::Repaired, std::move(best)};
}

namespace {

// Marker constants standing for the variables of a body treated as an
// instance; "@" cannot occur in parsed identifiers.
Term var_marker(const Term& v) { return Term::constant("@" + Symbols::name(v.id)); }

}  // namespace

bool has_repeated_body_variable(const Tgd& t) {
    for (const Atom& a : t.body) {
        for (size_t i = 0; i < a.terms.size(); ++i)
            for (size_t j = i + 1; j < a.terms.size(); ++j)
                if (a.terms[i].is_var() && a.terms[i] == a.terms[j]) return true;
    }
    return false;
}

std::optional<Tgd> modify_body(const Tgd& modified, const Tgd& triggering,
                               const PreferenceFunction& prf, FreshSource& fresh,
                               const CandidateObserver& observer) {
    if (!has_repeated_body_variable(modified)) return std::nullopt;

    Instance body_as_instance;
    std::unordered_map<Term, Term, TermHash> unmark;
    for (const Atom& a : modified.body) {
        Atom f = a;
        for (Term& t : f.terms)
            if (t.is_var()) {
                Term m = var_marker(t);
                unmark[m] = t;
                t = m;
            }
        body_as_instance.insert(f);
    }

    std::unordered_set<Term, TermHash> modified_frontier;
    for (const Term& x : modified.frontier()) modified_frontier.insert(x);

    std::vector<Tgd> candidates;
    std::set<std::string> keys;
    std::unordered_set<int32_t> avoid = modified.var_names();

    for (const Substitution& xi : all_homomorphisms(triggering.body, body_as_instance)) {
        bool qualifies = false;
        for (const Term& xb : triggering.frontier()) {
            Term image = xi.apply(xb);
            auto it = unmark.find(image);
            if (it != unmark.end() && !modified_frontier.count(it->second)) qualifies = true;
        }
        if (!qualifies) continue;

        // Atoms of `modified` hit by the image of the triggering body.
        std::set<Atom> image_atoms;
        for (const Atom& a : triggering.body) {
            Atom img = xi.apply(a);
            for (Term& t : img.terms) {
                auto it = unmark.find(t);
                if (it != unmark.end()) t = it->second;
            }
            image_atoms.insert(img);
        }
        std::vector<size_t> b_indices;
        for (size_t i = 0; i < modified.body.size(); ++i)
            if (image_atoms.count(modified.body[i])) b_indices.push_back(i);

        // Variables repeated within a single atom of the image, and every
        // image position where they occur.
        std::set<Term> repeated;
        for (size_t i : b_indices) {
            const std::vector<Term>& ts = modified.body[i].terms;
            for (size_t p = 0; p < ts.size(); ++p)
                for (size_t q = p + 1; q < ts.size(); ++q)
                    if (ts[p].is_var() && ts[p] == ts[q]) repeated.insert(ts[p]);
        }
        std::vector<std::pair<size_t, size_t>> positions;  // (atom index, position)
        for (size_t i : b_indices)
            for (size_t p = 0; p < modified.body[i].terms.size(); ++p) {
                const Term& t = modified.body[i].terms[p];
                if (t.is_var() && repeated.count(t)) positions.emplace_back(i, p);
            }
        if (positions.empty()) continue;

        // Occurrence counts of each frontier variable over the whole body;
        // a subset may not swallow all of them.
        std::map<Term, std::vector<std::pair<size_t, size_t>>> frontier_positions;
        for (size_t i = 0; i < modified.body.size(); ++i)
            for (size_t p = 0; p < modified.body[i].terms.size(); ++p) {
                const Term& t = modified.body[i].terms[p];
                if (t.is_var() && modified_frontier.count(t))
                    frontier_positions[t].emplace_back(i, p);
            }

        size_t np = positions.size();
        // All non-empty strict subsets when small; single and double
        // positions otherwise.
        std::vector<uint32_t> masks;
        if (np <= 12) {
            for (uint32_t m = 1; m + 1 < (1u << np); ++m) masks.push_back(m);
        } else {
            for (size_t i = 0; i < np; ++i) masks.push_back(1u << i);
            for (size_t i = 0; i < np; ++i)
                for (size_t j = i + 1; j < np; ++j) masks.push_back((1u << i) | (1u << j));
        }

        for (uint32_t mask : masks) {
            std::set<std::pair<size_t, size_t>> chosen;
            for (size_t i = 0; i < np; ++i)
                if (mask & (1u << i)) chosen.insert(positions[i]);

            bool orphans_frontier = false;
            for (const auto& [v, occ] : frontier_positions) {
                bool all_replaced = true;
                for (const auto& pos : occ)
                    if (!chosen.count(pos)) all_replaced = false;
                if (all_replaced) orphans_frontier = true;
            }
            if (orphans_frontier) continue;

            Tgd r = modified;
            for (const auto& [i, p] : chosen) {
                Term v = fresh.fresh_var(avoid);
                avoid.insert(v.id);
                r.body[i].terms[p] = v;
            }
            if (keys.insert(r.canonical_key()).second) candidates.push_back(std::move(r));
        }
    }

    if (candidates.empty()) return std::nullopt;
    if (observer && candidates.size() >= 2) observer(candidates);
    Tgd best = select_best(candidates, prf);
    best.id = modified.id;
    return best;
}

namespace {

struct SigmaSet {
    std::vector<Tgd> tgds;

    const Tgd* find(int id) const {
        for (const Tgd& t : tgds)
            if (t.id == id) return &t;
        return nullptr;
    }
    void replace(int id, Tgd next) {
        for (Tgd& t : tgds)
            if (t.id == id) {
                next.id = id;
                t = std::move(next);
                return;
            }
    }
    void drop(int id) {
        tgds.erase(std::remove_if(tgds.begin(), tgds.end(),
                                  [id](const Tgd& t) { return t.id == id; }),
                   tgds.end());
    }
};

std::vector<const Bag*> stored_unsafe_bags(const BagForest& forest, const Instance& vis_views) {
    std::vector<const Bag*> out;
    for (const Bag& b : forest.bags)
        if (!bag_is_safe(b, vis_views)) out.push_back(&b);
    std::stable_sort(out.begin(), out.end(), [](const Bag* a, const Bag* b) {
        if (a->depth != b->depth) return a->depth < b->depth;
        return a->id < b->id;
    });
    return out;
}

std::vector<const Bag*> unified_unsafe_bags(const BagForest& forest, const Instance& vis_views) {
    std::vector<const Bag*> out;
    for (const Bag& b : forest.bags)
        if (!bag_is_safe_unified(b, forest.unifier, vis_views)) out.push_back(&b);
    std::stable_sort(out.begin(), out.end(), [](const Bag* a, const Bag* b) {
        if (a->depth != b->depth) return a->depth < b->depth;
        return a->id < b->id;
    });
    return out;
}

}  // namespace

std::vector<Tgd> srepair(const std::vector<Tgd>& tgds, const Instance& vis_views,
                         const Schema& source, const PreferenceFunction& prf,
                         FreshSource& fresh, const RepairOptions& opts,
                         std::vector<RepairStep>* log, ChaseStats* stats,
                         const CandidateObserver& observer) {
    SigmaSet sigma{tgds};
    ChaseMemo memo;
    bool have_memo = false;
    auto rechase = [&]() {
        ChaseMemo next;
        BagForest f =
            visible_chase(sigma.tgds, source, fresh, stats,
                          (!opts.full_recompute && have_memo) ? &memo : nullptr, &next);
        memo = std::move(next);
        have_memo = true;
        return f;
    };

    BagForest forest = rechase();
    const int n = opts.max_iterations;

    auto flat_safe = [&](const BagForest& f) {
        return exists_instance_hom(flat(f), vis_views);
    };

    // Unsafe bags to act on this round: the stored-facts check drives the
    // normal path; when every bag passes individually but the whole instance
    // does not embed, fall back to unifier-applied and then whole-forest
    // granularity.
    auto pick_unsafe = [&](const BagForest& f) -> std::vector<const Bag*> {
        std::vector<const Bag*> unsafe = stored_unsafe_bags(f, vis_views);
        if (!unsafe.empty()) return unsafe;
        if (flat_safe(f)) return {};
        unsafe = unified_unsafe_bags(f, vis_views);
        if (!unsafe.empty()) return unsafe;
        for (const Bag& b : f.bags) unsafe.push_back(&b);
        std::stable_sort(unsafe.begin(), unsafe.end(), [](const Bag* a, const Bag* b) {
            if (a->depth != b->depth) return a->depth < b->depth;
            return a->id < b->id;
        });
        return unsafe;
    };

    auto sweep = [&](const std::vector<const Bag*>& unsafe, int iteration) {
        std::set<int> touched;
        for (const Bag* beta : unsafe) {
            int tid = beta->origin.tgd_id;
            if (touched.count(tid)) continue;
            touched.insert(tid);
            const Tgd* origin = sigma.find(tid);
            if (!origin) continue;
            if (forest.has_successor(beta->id)) {
                log_step(log, RepairKind::DropTgd, tid, std::nullopt, iteration);
                sigma.drop(tid);
                continue;
            }
            HideResult hr = hide_exported(*beta, *origin, vis_views, prf, fresh, observer);
            if (hr.status == HideResult::Status::Repaired) {
                log_step(log, RepairKind::HideExported, tid, *hr.repaired, iteration);
                sigma.replace(tid, *hr.repaired);
            } else {
                log_step(log, RepairKind::DropTgd, tid, std::nullopt, iteration);
                sigma.drop(tid);
            }
        }
    };

    for (int iteration = 0;; ++iteration) {
        std::vector<const Bag*> unsafe = pick_unsafe(forest);
        if (unsafe.empty()) break;

        if (iteration >= n) {
            // Bound reached: repair all remaining unsafe bags at once, then
            // keep sweeping until the result verifies; hiding strictly
            // shrinks the mapping, so this terminates.
            sweep(unsafe, iteration);
            forest = rechase();
            while (!sigma.tgds.empty()) {
                std::vector<const Bag*> rest = pick_unsafe(forest);
                if (rest.empty()) break;
                sweep(rest, iteration);
                forest = rechase();
            }
            break;
        }

        const Bag* beta = unsafe.front();
        const Tgd* origin = sigma.find(beta->origin.tgd_id);
        if (!origin) {
            forest = rechase();
            continue;
        }

        HideResult hide = hide_exported(*beta, *origin, vis_views, prf, fresh, observer);

        std::optional<Tgd> modify;
        int modify_victim = 0;
        if (beta->depth == 2) {
            for (int pred_id : beta->predecessors) {
                const Bag* pred = forest.find(pred_id);
                if (!pred || pred->depth != 1) continue;
                const Tgd* pred_origin = sigma.find(pred->origin.tgd_id);
                if (!pred_origin || !has_repeated_body_variable(*pred_origin)) continue;
                modify = modify_body(*pred_origin, *origin, prf, fresh, observer);
                if (modify) {
                    modify_victim = pred_origin->id;
                    break;
                }
            }
        }

        bool use_modify = false;
        if (modify && hide.repaired) {
            switch (prf.move_bias()) {
                case PreferenceFunction::MoveBias::PreferModify: use_modify = true; break;
                case PreferenceFunction::MoveBias::PreferHide: use_modify = false; break;
                case PreferenceFunction::MoveBias::None: {
                    if (observer) observer({*modify, *hide.repaired});
                    use_modify = prf.compare(*modify, *hide.repaired) == Choice::First;
                    break;
                }
            }
        } else if (modify) {
            use_modify = true;
        }

        if (use_modify) {
            log_step(log, RepairKind::ModifyBody, modify_victim, *modify, iteration);
            sigma.replace(modify_victim, *modify);
        } else if (hide.repaired) {
            log_step(log, RepairKind::HideExported, origin->id, *hide.repaired, iteration);
            sigma.replace(origin->id, *hide.repaired);
        } else {
            log_step(log, RepairKind::DropTgd, origin->id, std::nullopt, iteration);
            sigma.drop(origin->id);
        }
        forest = rechase();
    }

    return sigma.tgds;
}

RepairOutcome repair(const std::vector<Tgd>& tgds, const Instance& vis_views,
                     const Schema& source, const PreferenceFunction& prf, FreshSource& fresh,
                     const RepairOptions& opts, ChaseStats* stats,
                     const CandidateObserver& observer) {
    RepairOutcome outcome;
    std::vector<Tgd> sigma1 = frepair(tgds, vis_views, prf, fresh, &outcome.log, observer);
    outcome.tgds =
        srepair(sigma1, vis_views, source, prf, fresh, opts, &outcome.log, stats, observer);
    BagForest verify = visible_chase(outcome.tgds, source, fresh, stats);
    outcome.verdict = check_safety(verify, vis_views);
    return outcome;
}

RepairOutcome repair(const std::vector<Tgd>& tgds, const std::vector<Tgd>& views,
                     const Schema& source, const PreferenceFunction& prf, FreshSource& fresh,
                     const RepairOptions& opts, ChaseStats* stats,
                     const CandidateObserver& observer) {
    BagForest view_forest = visible_chase(views, source, fresh, stats);
    return repair(tgds, flat(view_forest), source, prf, fresh, opts, stats, observer);
}

std::vector<Tgd> replay(const std::vector<Tgd>& original, const std::vector<RepairStep>& log) {
    SigmaSet sigma{original};
    for (const RepairStep& s : log) {
        if (s.kind == RepairKind::DropTgd)
            sigma.drop(s.original_id);
        else
            sigma.replace(s.original_id, *s.result);
    }
    return sigma.tgds;
}

}  // namespace maprepair
