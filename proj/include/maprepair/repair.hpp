#pragma once

#include "maprepair/preference.hpp"
#include "maprepair/safety.hpp"

namespace maprepair {

enum class RepairKind { BreakJoinHideVar, HideExported, ModifyBody, DropTgd };

std::string to_string(RepairKind k);

struct RepairStep {
    RepairKind kind = RepairKind::DropTgd;
    int original_id = 0;
    std::optional<Tgd> result;  // absent for DropTgd
    int iteration = -1;         // -1 for first-phase steps

    nlohmann::ordered_json to_json() const;
};

struct RepairOptions {
    int max_iterations = 10;
    bool full_recompute = false;
};

// Observes every candidate set (two or more repairs) a preference function
// is asked to choose from; used to build training sets.
using CandidateObserver = std::function<void(const std::vector<Tgd>&)>;

// First phase: rewrites each tgd independently so that its body admits a
// homomorphism into the views' visible-chase instance mapping every exported
// variable to the critical constant. Joins are broken and exported variables
// hidden per candidate homomorphism; the preference function picks among the
// distinct rewritings. Tgds whose body relations never co-occur in the
// views' instance are dropped.
std::vector<Tgd> frepair(const std::vector<Tgd>& tgds, const Instance& vis_views,
                         const PreferenceFunction& prf, FreshSource& fresh,
                         std::vector<RepairStep>* log = nullptr,
                         const CandidateObserver& observer = nullptr);

struct HideResult {
    enum class Status { Repaired, NoHomomorphism, NoViolation };
    Status status = Status::NoViolation;
    std::optional<Tgd> repaired;
};

// Rebuilds the bag's premise as a conjunction (nulls renamed to fresh
// variables) and, for every homomorphism into the views' instance, hides the
// exported variables whose trigger image lands on a non-critical term.
HideResult hide_exported(const Bag& bag, const Tgd& origin, const Instance& vis_views,
                         const PreferenceFunction& prf, FreshSource& fresh,
                         const CandidateObserver& observer = nullptr);

// Breaks a join in `modified`'s body: for each homomorphism from
// `triggering`'s body into `modified`'s body that maps a frontier variable of
// `triggering` onto a non-frontier variable of `modified`, every non-empty
// strict subset of the repeated-variable positions of the image yields a
// candidate with those positions freshened.
std::optional<Tgd> modify_body(const Tgd& modified, const Tgd& triggering,
                               const PreferenceFunction& prf, FreshSource& fresh,
                               const CandidateObserver& observer = nullptr);

// Second phase: repeatedly repairs the lowest-depth unsafe bag of the
// visible chase (modifyBody when a depth-1 predecessor with a repeated body
// variable exists, otherwise hideExported), recomputing the forest after
// each change. Once the iteration bound is reached, remaining unsafe bags
// are repaired wholesale: maximal ones by hiding, the rest by dropping
// their origin.
std::vector<Tgd> srepair(const std::vector<Tgd>& tgds, const Instance& vis_views,
                         const Schema& source, const PreferenceFunction& prf,
                         FreshSource& fresh, const RepairOptions& opts = {},
                         std::vector<RepairStep>* log = nullptr, ChaseStats* stats = nullptr,
                         const CandidateObserver& observer = nullptr);

struct RepairOutcome {
    std::vector<Tgd> tgds;
    std::vector<RepairStep> log;
    SafetyReport verdict;
};

RepairOutcome repair(const std::vector<Tgd>& tgds, const Instance& vis_views,
                     const Schema& source, const PreferenceFunction& prf, FreshSource& fresh,
                     const RepairOptions& opts = {}, ChaseStats* stats = nullptr,
                     const CandidateObserver& observer = nullptr);

RepairOutcome repair(const std::vector<Tgd>& tgds, const std::vector<Tgd>& views,
                     const Schema& source, const PreferenceFunction& prf, FreshSource& fresh,
                     const RepairOptions& opts = {}, ChaseStats* stats = nullptr,
                     const CandidateObserver& observer = nullptr);

// Applies a step log to the original tgds; repair runs are replayable.
std::vector<Tgd> replay(const std::vector<Tgd>& original, const std::vector<RepairStep>& log);

}  // namespace maprepair
