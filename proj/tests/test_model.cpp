#include <doctest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace maprepair;
using namespace maprepair::testing;

TEST_CASE("critical instance has one all-critical fact per relation") {
    RunningExample r = load_running();
    Instance crt = critical_instance(r.source);
    CHECK(crt.size() == 5);
    for (const Fact& f : crt.facts())
        for (const Term& t : f.terms) CHECK(t.is_critical());

    Schema empty;
    CHECK(critical_instance(empty).empty());

    Schema nullary;
    nullary.add_relation("T", 0);
    Instance crt0 = critical_instance(nullary);
    CHECK(crt0.size() == 1);
    CHECK(crt0.facts()[0].terms.empty());
}

TEST_CASE("schema rejects duplicates and negative arity") {
    Schema s;
    s.add_relation("R", 2);
    CHECK_THROWS_AS(s.add_relation("R", 2), std::invalid_argument);
    CHECK_THROWS_AS(s.add_relation("Neg", -1), std::invalid_argument);
}

TEST_CASE("parsing the running-example dependency") {
    RunningExample r = load_running();
    const Tgd& mu_e = r.mapping[0];
    std::vector<Term> frontier = mu_e.frontier();
    REQUIRE(frontier.size() == 2);
    CHECK(frontier[0] == Term::var("e"));
    CHECK(frontier[1] == Term::var("d"));
    CHECK(mu_e.body.size() == 2);
    CHECK(mu_e.head.size() == 1);
}

TEST_CASE("parsing a copy tgd and a join-free body") {
    Schema s;
    s.add_relation("R", 1);
    s.add_relation("P", 4);
    s.add_relation("HN", 2);
    Tgd copy = dep(s, "R(x) -> R2(x).");
    CHECK(copy.frontier() == std::vector<Term>{Term::var("x")});

    Tgd nojoin = dep(s, "P(i,n,e,c), HN(j,d) -> T(e).");
    CHECK(join_count(nojoin) == 0);
    CHECK(nojoin.frontier() == std::vector<Term>{Term::var("e")});
}

TEST_CASE("parse errors carry position and cause") {
    Schema s;
    s.add_relation("R", 2);
    CHECK_THROWS_AS(deps(s, "R(x,y -> T(x)."), ParseError);
    CHECK_THROWS_AS(deps(s, "R(x) -> T(x)."), ParseError);      // arity mismatch
    CHECK_THROWS_AS(deps(s, "Q(x,y) -> T(x)."), ParseError);    // unknown relation
    CHECK_THROWS_AS(deps(s, "R(x,y) -> T(x), T(x,y)."), ParseError);  // inconsistent head
    try {
        deps(s, "R(x,y) ->\nT(x,y");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.col > 0);
    }
}

TEST_CASE("serialize then parse is the identity on dependency sets") {
    RunningExample r = load_running();
    std::string text = serialize_dependencies(r.mapping);
    std::vector<Tgd> again = parse_dependencies(text, r.source);
    REQUIRE(again.size() == r.mapping.size());
    for (size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].same_structure(r.mapping[i]));
        CHECK(again[i].id == r.mapping[i].id);
    }
    CHECK(serialize_dependencies(again) == text);
}

TEST_CASE("nullary relations and nullary heads are accepted") {
    Schema s;
    s.add_relation("Z", 0);
    Tgd t = dep(s, "Z() -> W().");
    CHECK(t.body[0].terms.empty());
    CHECK(t.head[0].terms.empty());
    CHECK(serialize_dependencies({t}) == "Z() -> W().\n");
}

TEST_CASE("join counting follows the distinct-repeated-variable rule") {
    Schema s;
    s.add_relation("R1", 3);
    s.add_relation("S1", 3);
    s.add_relation("R", 1);
    Tgd r1 = dep(s, "R1(x,y,z1), S1(y,z1,z1) -> T1(x).");
    Tgd r2 = dep(s, "R1(x,y,z1), S1(y,z2,z) -> T1(x,z).");
    Tgd copy = dep(s, "R(x) -> T(x).");
    CHECK(join_count(r1) == 2);
    CHECK(join_count(r2) == 1);
    CHECK(join_count(copy) == 0);
}

TEST_CASE("join count is invariant under variable renaming") {
    Schema s;
    s.add_relation("R1", 3);
    s.add_relation("S1", 3);
    Tgd a = dep(s, "R1(x,y,z1), S1(y,z1,z1) -> T1(x).");
    Tgd b = dep(s, "R1(p,q,r), S1(q,r,r) -> T1(p).");
    CHECK(join_count(a) == join_count(b));
    CHECK(a.canonical_key() == b.canonical_key());
}

TEST_CASE("inverse swaps body and head and is an involution") {
    RunningExample r = load_running();
    const Tgd& mu_e = r.mapping[0];
    Tgd inv = inverse(mu_e);
    CHECK(inv.body == mu_e.head);
    CHECK(inv.head == mu_e.body);

    Schema s;
    s.add_relation("R", 1);
    Tgd copy = dep(s, "R(x) -> R2(x).");
    CHECK(inverse(copy).to_string() == "R2(x) -> R(x).");

    for (const Tgd& t : r.mapping) CHECK(inverse(inverse(t)).same_structure(t));
}

TEST_CASE("frontier reacts to head changes") {
    Schema s;
    s.add_relation("R", 2);
    Tgd t = dep(s, "R(x,y) -> T(x,y).");
    CHECK(t.frontier().size() == 2);
    t.head[0].terms.pop_back();
    CHECK(t.frontier() == std::vector<Term>{Term::var("x")});
}

TEST_CASE("fact files round-trip modulo null identity") {
    FreshSource fresh;
    Instance i = parse_facts("R(*,?n1,bob).\nS(?n1).\n", fresh);
    CHECK(i.size() == 2);
    CHECK(i.facts()[0].terms[0].is_critical());
    CHECK(i.facts()[0].terms[1].is_null());
    CHECK(i.facts()[0].terms[1] == i.facts()[1].terms[0]);
    CHECK(i.facts()[0].terms[2] == Term::constant("bob"));

    FreshSource fresh2;
    Instance again = parse_facts(serialize_facts(i), fresh2);
    CHECK(testing::instances_isomorphic(i, again));
}

TEST_CASE("line comments are skipped everywhere") {
    Schema s = parse_schema("# header\nR/2 # trailing\n");
    CHECK(s.arity(Symbols::intern("R")) == 2);
    std::vector<Tgd> ts = deps(s, "# a comment\nR(x,y) -> T(x). # another\n");
    CHECK(ts.size() == 1);
}
