#include "maprepair/parse.hpp"

#include <cctype>

namespace maprepair {

namespace {

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++pos_;
                ++line_;
                col_ = 1;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                ++col_;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void expect(char c, const char* what) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "' " + what);
        advance();
    }

    bool accept(char c) {
        skip_ws();
        if (peek() != c) return false;
        advance();
        return true;
    }

    bool accept_arrow() {
        skip_ws();
        if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '>') {
            advance();
            advance();
            return true;
        }
        return false;
    }

    std::string identifier(const char* what) {
        skip_ws();
        if (!std::isalpha(static_cast<unsigned char>(peek())))
            fail(std::string("expected identifier ") + what);
        std::string out;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                out += c;
                advance();
            } else {
                break;
            }
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col_, msg); }

    int line() const { return line_; }
    int col() const { return col_; }

private:
    void advance() {
        ++pos_;
        ++col_;
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::vector<Tgd> parse_dependencies(std::string_view text, const Schema& source,
                                    const Schema* target) {
    Lexer lex(text);
    std::vector<Tgd> out;
    std::unordered_map<int32_t, int> inferred_head_arity;

    auto parse_atom = [&lex]() {
        Atom a;
        std::string rel = lex.identifier("(relation name)");
        a.relation = Symbols::intern(rel);
        lex.expect('(', "after relation name");
        if (!lex.accept(')')) {
            for (;;) {
                std::string v = lex.identifier("(variable)");
                a.terms.push_back(Term::var(v));
                if (lex.accept(')')) break;
                lex.expect(',', "between arguments");
            }
        }
        return a;
    };

    auto check_body_atom = [&](const Atom& a) {
        if (!source.has_relation(a.relation))
            lex.fail("unknown relation " + Symbols::name(a.relation) + " in body");
        if (size_t(source.arity(a.relation)) != a.arity())
            lex.fail("arity mismatch for " + Symbols::name(a.relation) + ": expected " +
                     std::to_string(source.arity(a.relation)) + ", got " +
                     std::to_string(a.arity()));
    };

    auto check_head_atom = [&](const Atom& a) {
        if (target != nullptr) {
            if (!target->has_relation(a.relation))
                lex.fail("unknown relation " + Symbols::name(a.relation) + " in head");
            if (size_t(target->arity(a.relation)) != a.arity())
                lex.fail("arity mismatch for " + Symbols::name(a.relation) + ": expected " +
                         std::to_string(target->arity(a.relation)) + ", got " +
                         std::to_string(a.arity()));
            return;
        }
        if (source.has_relation(a.relation)) {
            if (size_t(source.arity(a.relation)) != a.arity())
                lex.fail("arity mismatch for " + Symbols::name(a.relation) + ": expected " +
                         std::to_string(source.arity(a.relation)) + ", got " +
                         std::to_string(a.arity()));
            return;
        }
        auto [it, fresh] = inferred_head_arity.emplace(a.relation, int(a.arity()));
        if (!fresh && size_t(it->second) != a.arity())
            lex.fail("inconsistent arity for " + Symbols::name(a.relation) + ": previously " +
                     std::to_string(it->second) + ", now " + std::to_string(a.arity()));
    };

    while (!lex.eof()) {
        Tgd t;
        t.id = int(out.size()) + 1;
        for (;;) {
            Atom a = parse_atom();
            check_body_atom(a);
            t.body.push_back(std::move(a));
            if (lex.accept_arrow()) break;
            lex.expect(',', "between body atoms");
        }
        for (;;) {
            Atom a = parse_atom();
            check_head_atom(a);
            t.head.push_back(std::move(a));
            if (lex.accept('.')) break;
            lex.expect(',', "between head atoms");
        }
        if (t.body.empty() || t.head.empty()) lex.fail("empty body or head");
        out.push_back(std::move(t));
    }
    return out;
}

std::string serialize_dependencies(const std::vector<Tgd>& tgds) {
    std::string s;
    for (const Tgd& t : tgds) {
        s += t.to_string();
        s += '\n';
    }
    return s;
}

Schema parse_schema(std::string_view text) {
    Lexer lex(text);
    Schema schema;
    while (!lex.eof()) {
        std::string rel = lex.identifier("(relation name)");
        lex.expect('/', "after relation name");
        std::string digits;
        lex.skip_ws();
        while (std::isdigit(static_cast<unsigned char>(lex.peek()))) {
            digits += lex.peek();
            lex.expect(lex.peek(), "");
        }
        if (digits.empty()) lex.fail("expected arity after '/'");
        try {
            schema.add_relation(rel, std::stoi(digits));
        } catch (const std::invalid_argument& e) {
            lex.fail(e.what());
        }
    }
    return schema;
}

std::string serialize_schema(const Schema& schema) {
    std::string s;
    for (int32_t rel : schema.relations()) {
        s += Symbols::name(rel);
        s += '/';
        s += std::to_string(schema.arity(rel));
        s += '\n';
    }
    return s;
}

Instance parse_facts(std::string_view text, FreshSource& fresh) {
    Lexer lex(text);
    Instance out;
    std::unordered_map<std::string, Term> null_names;
    while (!lex.eof()) {
        Fact f;
        std::string rel = lex.identifier("(relation name)");
        f.relation = Symbols::intern(rel);
        lex.expect('(', "after relation name");
        if (!lex.accept(')')) {
            for (;;) {
                lex.skip_ws();
                if (lex.accept('*')) {
                    f.terms.push_back(Term::critical());
                } else if (lex.accept('?')) {
                    std::string n = lex.identifier("(null name)");
                    auto it = null_names.find(n);
                    if (it == null_names.end())
                        it = null_names.emplace(n, fresh.fresh_null()).first;
                    f.terms.push_back(it->second);
                } else {
                    std::string c = lex.identifier("(constant)");
                    f.terms.push_back(Term::constant(c));
                }
                if (lex.accept(')')) break;
                lex.expect(',', "between arguments");
            }
        }
        lex.expect('.', "after fact");
        out.insert(f);
    }
    return out;
}

std::string serialize_facts(const Instance& instance) {
    std::string s;
    for (const Fact& f : instance.facts()) {
        s += f.to_string();
        s += ".\n";
    }
    return s;
}

Schema schema_of_heads(const std::vector<Tgd>& tgds) {
    Schema schema;
    std::unordered_set<int32_t> seen;
    for (const Tgd& t : tgds)
        for (const Atom& a : t.head)
            if (seen.insert(a.relation).second)
                schema.add_relation(Symbols::name(a.relation), int(a.arity()));
    return schema;
}

}  // namespace maprepair
