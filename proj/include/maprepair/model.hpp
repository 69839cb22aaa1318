#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace maprepair {

// ---------------------------------------------------------------------------
// Symbols: interned identifiers for relation names, variables and constants.
// Append-only; ids are assigned in first-intern order, so a fixed input
// stream always yields the same ids.
// ---------------------------------------------------------------------------
class Symbols {
public:
    static int32_t intern(std::string_view name);
    static const std::string& name(int32_t id);
};

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------
enum class TermKind : uint8_t { Constant = 0, Critical = 1, Null = 2, Var = 3 };

// A term is a compact (kind, id) pair. Constants and variables carry a
// symbol id; labeled nulls carry a numeric id drawn from a per-run counter.
// The critical constant is a singleton with id 0.
struct Term {
    TermKind kind = TermKind::Critical;
    int32_t id = 0;

    static Term constant(std::string_view name);
    static Term critical() { return Term{TermKind::Critical, 0}; }
    static Term null(int32_t id) { return Term{TermKind::Null, id}; }
    static Term var(std::string_view name);

    bool is_constant_like() const {
        return kind == TermKind::Constant || kind == TermKind::Critical;
    }
    bool is_null() const { return kind == TermKind::Null; }
    bool is_var() const { return kind == TermKind::Var; }
    bool is_critical() const { return kind == TermKind::Critical; }

    bool operator==(const Term& o) const { return kind == o.kind && id == o.id; }
    bool operator!=(const Term& o) const { return !(*this == o); }
    bool operator<(const Term& o) const {
        if (kind != o.kind) return kind < o.kind;
        return id < o.id;
    }

    std::string to_string() const;
};

struct TermHash {
    size_t operator()(const Term& t) const {
        return std::hash<uint64_t>()((uint64_t(uint8_t(t.kind)) << 32) ^ uint32_t(t.id));
    }
};

// Monotone counters for fresh labeled nulls and fresh variables. One
// instance per run keeps outputs deterministic and diffable.
class FreshSource {
public:
    Term fresh_null() { return Term::null(++null_counter_); }
    // Mints v1, v2, ... skipping any name in `avoid`.
    Term fresh_var(const std::unordered_set<int32_t>& avoid);
    int32_t null_counter() const { return null_counter_; }

private:
    int32_t null_counter_ = 0;
    int32_t var_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Atoms and instances
// ---------------------------------------------------------------------------
struct Atom {
    int32_t relation = 0;
    std::vector<Term> terms;

    Atom() = default;
    Atom(std::string_view rel, std::vector<Term> ts)
        : relation(Symbols::intern(rel)), terms(std::move(ts)) {}
    Atom(int32_t rel, std::vector<Term> ts) : relation(rel), terms(std::move(ts)) {}

    size_t arity() const { return terms.size(); }
    bool is_ground() const;

    bool operator==(const Atom& o) const { return relation == o.relation && terms == o.terms; }
    bool operator!=(const Atom& o) const { return !(*this == o); }
    bool operator<(const Atom& o) const;

    std::string to_string() const;
};

struct AtomHash {
    size_t operator()(const Atom& a) const {
        size_t h = std::hash<int32_t>()(a.relation);
        TermHash th;
        for (const Term& t : a.terms) h = h * 1000003u ^ th(t);
        return h;
    }
};

using Fact = Atom;

// A set of ground atoms with stable insertion order. Lookup structures are
// maintained incrementally so reads never mutate shared state.
class Instance {
public:
    Instance() = default;

    // Returns true if the fact was new.
    bool insert(const Fact& f);
    void insert_all(const Instance& other);

    bool contains(const Fact& f) const { return set_.count(f) > 0; }
    size_t size() const { return facts_.size(); }
    bool empty() const { return facts_.empty(); }

    const std::vector<Fact>& facts() const { return facts_; }
    // Indices of facts for a relation, in insertion order.
    const std::vector<int>& facts_of(int32_t relation) const;

    // Per-position term index, maintained once the instance outgrows a
    // linear scan (> 64 facts). Returns nullptr when inactive or empty.
    const std::vector<int>* position_index(int32_t relation, int pos, const Term& t) const;

    // All distinct terms occurring in the instance, in first-occurrence order.
    std::vector<Term> term_universe() const;

    bool operator==(const Instance& o) const;

    std::string to_string() const;

private:
    struct PosKey {
        int32_t relation;
        int32_t pos;
        Term term;
        bool operator==(const PosKey& o) const {
            return relation == o.relation && pos == o.pos && term == o.term;
        }
    };
    struct PosKeyHash {
        size_t operator()(const PosKey& k) const {
            size_t h = std::hash<int64_t>()((int64_t(k.relation) << 20) ^ k.pos);
            return h * 1000003u ^ TermHash()(k.term);
        }
    };

    void index_fact(int fact_idx);

    std::vector<Fact> facts_;
    std::unordered_set<Fact, AtomHash> set_;
    std::unordered_map<int32_t, std::vector<int>> by_relation_;
    bool pos_indexed_ = false;
    std::unordered_map<PosKey, std::vector<int>, PosKeyHash> pos_index_;
};

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------
class Schema {
public:
    Schema() = default;

    void add_relation(std::string_view name, int arity);
    bool has_relation(int32_t rel) const { return arity_.count(rel) > 0; }
    int arity(int32_t rel) const;
    // Relations in declaration order.
    const std::vector<int32_t>& relations() const { return order_; }
    size_t size() const { return order_.size(); }

private:
    std::vector<int32_t> order_;
    std::unordered_map<int32_t, int> arity_;
};

// ---------------------------------------------------------------------------
// Dependencies
// ---------------------------------------------------------------------------
struct Tgd {
    int id = 0;
    std::vector<Atom> body;
    std::vector<Atom> head;

    // Variables occurring in both body and head, in body-first-occurrence
    // order. This is the exported ("frontier") set.
    std::vector<Term> frontier() const;
    bool is_frontier(const Term& v) const;

    // Distinct body variables in first-occurrence order.
    std::vector<Term> body_vars() const;
    std::unordered_set<int32_t> var_names() const;

    bool same_structure(const Tgd& o) const { return body == o.body && head == o.head; }
    std::string to_string() const;
    // Variables renamed by first occurrence (body then head); used for
    // duplicate detection and "equal up to renaming" checks.
    std::string canonical_key() const;
};

// Number of distinct body variables occurring in two or more body positions.
int join_count(const Tgd& t);

// Body/head swap. Existential head variables of the inverse are exactly the
// non-frontier body variables of the original.
Tgd inverse(const Tgd& t);
std::vector<Tgd> inverse(const std::vector<Tgd>& tgds);

// An egd body -> /\ (x = *) derived from a tgd; `equated` is a non-empty
// subset of the origin's frontier.
struct DerivedEgd {
    std::vector<Atom> body;
    std::vector<Term> equated;
    int origin = 0;

    std::string to_string() const;
};

struct Mapping {
    Schema source;
    Schema target;
    std::vector<Tgd> tgds;
};

struct Cq {
    std::vector<Atom> atoms;
    std::vector<Term> free;

    bool constants_free() const;
};

// One fact R(*, ..., *) per relation.
Instance critical_instance(const Schema& schema);

}  // namespace maprepair
