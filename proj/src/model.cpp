#include "maprepair/model.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

namespace maprepair {

namespace {

struct SymbolTable {
    std::mutex mu;
    std::vector<std::string> names;
    std::unordered_map<std::string, int32_t> ids;
};

SymbolTable& table() {
    static SymbolTable t;
    return t;
}

}  // namespace

int32_t Symbols::intern(std::string_view name) {
    SymbolTable& t = table();
    std::lock_guard<std::mutex> lock(t.mu);
    auto it = t.ids.find(std::string(name));
    if (it != t.ids.end()) return it->second;
    int32_t id = int32_t(t.names.size());
    t.names.emplace_back(name);
    t.ids.emplace(t.names.back(), id);
    return id;
}

const std::string& Symbols::name(int32_t id) {
    SymbolTable& t = table();
    std::lock_guard<std::mutex> lock(t.mu);
    return t.names.at(size_t(id));
}

Term Term::constant(std::string_view name) {
    return Term{TermKind::Constant, Symbols::intern(name)};
}

Term Term::var(std::string_view name) {
    return Term{TermKind::Var, Symbols::intern(name)};
}

std::string Term::to_string() const {
    switch (kind) {
        case TermKind::Constant: return Symbols::name(id);
        case TermKind::Critical: return "*";
        case TermKind::Null: return "?n" + std::to_string(id);
        case TermKind::Var: return Symbols::name(id);
    }
    return "?";
}

Term FreshSource::fresh_var(const std::unordered_set<int32_t>& avoid) {
    for (;;) {
        std::string name = "v" + std::to_string(++var_counter_);
        int32_t sym = Symbols::intern(name);
        if (!avoid.count(sym)) return Term{TermKind::Var, sym};
    }
}

bool Atom::is_ground() const {
    for (const Term& t : terms)
        if (t.is_var()) return false;
    return true;
}

bool Atom::operator<(const Atom& o) const {
    if (relation != o.relation) return Symbols::name(relation) < Symbols::name(o.relation);
    return terms < o.terms;
}

std::string Atom::to_string() const {
    std::string s = Symbols::name(relation);
    s += '(';
    for (size_t i = 0; i < terms.size(); ++i) {
        if (i) s += ',';
        s += terms[i].to_string();
    }
    s += ')';
    return s;
}

bool Instance::insert(const Fact& f) {
    if (set_.count(f)) return false;
    set_.insert(f);
    by_relation_[f.relation].push_back(int(facts_.size()));
    facts_.push_back(f);
    if (!pos_indexed_ && facts_.size() > 64) {
        pos_indexed_ = true;
        for (int i = 0; i < int(facts_.size()); ++i) index_fact(i);
    } else if (pos_indexed_) {
        index_fact(int(facts_.size()) - 1);
    }
    return true;
}

void Instance::index_fact(int fact_idx) {
    const Fact& f = facts_[size_t(fact_idx)];
    for (int p = 0; p < int(f.terms.size()); ++p)
        pos_index_[PosKey{f.relation, p, f.terms[size_t(p)]}].push_back(fact_idx);
}

const std::vector<int>* Instance::position_index(int32_t relation, int pos,
                                                 const Term& t) const {
    if (!pos_indexed_) return nullptr;
    auto it = pos_index_.find(PosKey{relation, pos, t});
    if (it == pos_index_.end()) {
        static const std::vector<int> kEmpty;
        return &kEmpty;
    }
    return &it->second;
}

void Instance::insert_all(const Instance& other) {
    for (const Fact& f : other.facts()) insert(f);
}

const std::vector<int>& Instance::facts_of(int32_t relation) const {
    static const std::vector<int> kEmpty;
    auto it = by_relation_.find(relation);
    return it == by_relation_.end() ? kEmpty : it->second;
}

std::vector<Term> Instance::term_universe() const {
    std::vector<Term> out;
    std::unordered_set<Term, TermHash> seen;
    for (const Fact& f : facts_)
        for (const Term& t : f.terms)
            if (seen.insert(t).second) out.push_back(t);
    return out;
}

bool Instance::operator==(const Instance& o) const {
    if (size() != o.size()) return false;
    for (const Fact& f : facts_)
        if (!o.contains(f)) return false;
    return true;
}

std::string Instance::to_string() const {
    std::string s;
    for (const Fact& f : facts_) {
        s += f.to_string();
        s += ".\n";
    }
    return s;
}

void Schema::add_relation(std::string_view name, int arity) {
    int32_t rel = Symbols::intern(name);
    if (arity_.count(rel))
        throw std::invalid_argument("duplicate relation " + std::string(name));
    if (arity < 0) throw std::invalid_argument("negative arity for " + std::string(name));
    order_.push_back(rel);
    arity_[rel] = arity;
}

int Schema::arity(int32_t rel) const {
    auto it = arity_.find(rel);
    if (it == arity_.end())
        throw std::out_of_range("unknown relation " + Symbols::name(rel));
    return it->second;
}

std::vector<Term> Tgd::frontier() const {
    std::unordered_set<Term, TermHash> head_vars;
    for (const Atom& a : head)
        for (const Term& t : a.terms)
            if (t.is_var()) head_vars.insert(t);
    std::vector<Term> out;
    std::unordered_set<Term, TermHash> seen;
    for (const Atom& a : body)
        for (const Term& t : a.terms)
            if (t.is_var() && head_vars.count(t) && seen.insert(t).second) out.push_back(t);
    return out;
}

bool Tgd::is_frontier(const Term& v) const {
    for (const Term& t : frontier())
        if (t == v) return true;
    return false;
}

std::vector<Term> Tgd::body_vars() const {
    std::vector<Term> out;
    std::unordered_set<Term, TermHash> seen;
    for (const Atom& a : body)
        for (const Term& t : a.terms)
            if (t.is_var() && seen.insert(t).second) out.push_back(t);
    return out;
}

std::unordered_set<int32_t> Tgd::var_names() const {
    std::unordered_set<int32_t> out;
    for (const Atom& a : body)
        for (const Term& t : a.terms)
            if (t.is_var()) out.insert(t.id);
    for (const Atom& a : head)
        for (const Term& t : a.terms)
            if (t.is_var()) out.insert(t.id);
    return out;
}

namespace {

std::string render_tgd(const std::vector<Atom>& body, const std::vector<Atom>& head) {
    std::string s;
    for (size_t i = 0; i < body.size(); ++i) {
        if (i) s += ", ";
        s += body[i].to_string();
    }
    s += " -> ";
    for (size_t i = 0; i < head.size(); ++i) {
        if (i) s += ", ";
        s += head[i].to_string();
    }
    s += '.';
    return s;
}

}  // namespace

std::string Tgd::to_string() const { return render_tgd(body, head); }

std::string Tgd::canonical_key() const {
    std::unordered_map<int32_t, int> rename;
    auto canon = [&rename](const std::vector<Atom>& atoms) {
        std::vector<Atom> out;
        for (const Atom& a : atoms) {
            Atom c = a;
            for (Term& t : c.terms) {
                if (!t.is_var()) continue;
                auto [it, fresh] = rename.emplace(t.id, int(rename.size()) + 1);
                t = Term::var("_c" + std::to_string(it->second));
                (void)fresh;
            }
            out.push_back(std::move(c));
        }
        return out;
    };
    std::vector<Atom> b = canon(body);
    std::vector<Atom> h = canon(head);
    return render_tgd(b, h);
}

int join_count(const Tgd& t) {
    std::unordered_map<int32_t, int> occurrences;
    for (const Atom& a : t.body)
        for (const Term& v : a.terms)
            if (v.is_var()) occurrences[v.id]++;
    int joins = 0;
    for (auto& [var, n] : occurrences)
        if (n >= 2) joins++;
    return joins;
}

Tgd inverse(const Tgd& t) {
    Tgd inv;
    inv.id = t.id;
    inv.body = t.head;
    inv.head = t.body;
    return inv;
}

std::vector<Tgd> inverse(const std::vector<Tgd>& tgds) {
    std::vector<Tgd> out;
    out.reserve(tgds.size());
    for (const Tgd& t : tgds) out.push_back(inverse(t));
    return out;
}

std::string DerivedEgd::to_string() const {
    std::string s;
    for (size_t i = 0; i < body.size(); ++i) {
        if (i) s += ", ";
        s += body[i].to_string();
    }
    s += " -> ";
    for (size_t i = 0; i < equated.size(); ++i) {
        if (i) s += " & ";
        s += equated[i].to_string() + " = *";
    }
    s += '.';
    return s;
}

bool Cq::constants_free() const {
    for (const Atom& a : atoms)
        for (const Term& t : a.terms)
            if (t.is_constant_like() || t.is_null()) return false;
    return true;
}

Instance critical_instance(const Schema& schema) {
    Instance out;
    for (int32_t rel : schema.relations()) {
        Fact f;
        f.relation = rel;
        f.terms.assign(size_t(schema.arity(rel)), Term::critical());
        out.insert(f);
    }
    return out;
}

}  // namespace maprepair
