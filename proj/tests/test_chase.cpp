#include <doctest.h>

#include <algorithm>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace maprepair;
using namespace maprepair::testing;

TEST_CASE("tgd chase step instantiates the head with fresh nulls") {
    RunningExample r = load_running();
    FreshSource fresh;
    Instance crt = critical_instance(r.source);
    const Tgd& v1 = r.views[0];
    std::vector<Substitution> triggers = active_triggers(v1, crt);
    REQUIRE(triggers.size() == 1);
    Instance next = chase_tgd_step(crt, v1, triggers[0], fresh);
    CHECK(next.size() == crt.size() + 1);
    Fact v1_fact("V1", {Term::critical(), Term::critical()});
    CHECK(next.contains(v1_fact));

    // The same trigger is no longer active.
    CHECK_THROWS_AS(chase_tgd_step(next, v1, triggers[0], fresh), std::invalid_argument);
}

TEST_CASE("tgd chase step mints one null per existential head variable") {
    Schema s;
    s.add_relation("T", 1);
    FreshSource fresh;
    Instance i = parse_facts("T(*).\n", fresh);
    Tgd t = dep(s, "T(x) -> R(x,y).");
    std::vector<Substitution> triggers = active_triggers(t, i);
    REQUIRE(triggers.size() == 1);
    Instance next = chase_tgd_step(i, t, triggers[0], fresh);
    CHECK(next.size() == 2);
    const Fact& added = next.facts()[1];
    CHECK(added.terms[0].is_critical());
    CHECK(added.terms[1].is_null());
}

TEST_CASE("egd chase step unifies the equated null with the critical constant") {
    RunningExample r = load_running();
    FreshSource fresh;
    Instance i1 = parse_facts(
        "P(?a,?b,*,?c).\nHN(?a,*).\nP(?d,?e,?f,*).\nHN(?d,*).\n"
        "S(?h,?i,*,?j).\nO(?h,?k,?l).\n",
        fresh);
    DerivedEgd e1{r.mapping[0].body, {Term::var("e")}, r.mapping[0].id};
    std::vector<Substitution> triggers = active_triggers(e1, i1);
    REQUIRE(triggers.size() == 1);
    Instance next = chase_egd_step(i1, e1, triggers[0]);
    // ?f has been replaced by * everywhere.
    FreshSource fresh2;
    Instance expected = parse_facts(
        "P(?a,?b,*,?c).\nHN(?a,*).\nP(?d,?e,*,*).\nHN(?d,*).\n"
        "S(?h,?i,*,?j).\nO(?h,?k,?l).\n",
        fresh2);
    CHECK(instances_isomorphic(next, expected));

    // A substitution with every equated side already critical violates the
    // precondition.
    Substitution all_star = triggers[0];
    all_star.bindings[Term::var("e")] = Term::critical();
    CHECK_THROWS_AS(chase_egd_step(i1, e1, all_star), std::invalid_argument);
}

TEST_CASE("unifying two distinct constants is a chase failure") {
    CHECK_THROWS_AS(egd_unifier(Term::constant("a"), Term::constant("b")), ChaseFailure);
    CHECK_THROWS_AS(egd_unifier(Term::constant("a"), Term::critical()), ChaseFailure);
    CHECK(egd_unifier(Term::constant("a"), Term::constant("a")).bindings.empty());
    Substitution nu = egd_unifier(Term::null(3), Term::critical());
    CHECK(nu.apply(Term::null(3)).is_critical());
}

TEST_CASE("chasing the critical instance with the mapping adds the target facts") {
    RunningExample r = load_running();
    FreshSource fresh;
    Instance crt = critical_instance(r.source);
    Instance chased = chase(crt, r.mapping, fresh);
    Instance delta;
    for (const Fact& f : chased.facts())
        if (!crt.contains(f)) delta.insert(f);
    FreshSource fresh2;
    Instance expected = parse_facts("EthDis(*,*).\nCountyDis(*,*).\nSO(*).\n", fresh2);
    CHECK(delta == expected);

    CHECK(chase(crt, {}, fresh) == crt);
    Instance empty;
    CHECK(chase(empty, r.mapping, fresh).empty());
}

TEST_CASE("derived egds of the running example") {
    RunningExample r = load_running();
    FreshSource fresh;
    Instance i1 = parse_facts(
        "P(?a,?b,*,?c).\nHN(?a,*).\nP(?d,?e,?f,*).\nHN(?d,*).\n"
        "S(?h,?i,*,?j).\nO(?h,?k,?l).\n",
        fresh);
    std::vector<DerivedEgd> egds = derived_egds(r.mapping, i1);
    REQUIRE(egds.size() == 2);
    CHECK(egds[0].origin == r.mapping[0].id);
    CHECK(egds[0].equated == std::vector<Term>{Term::var("e")});
    CHECK(egds[0].body == r.mapping[0].body);
    CHECK(egds[1].origin == r.mapping[1].id);
    CHECK(egds[1].equated == std::vector<Term>{Term::var("c")});

    // The views derive no egds from their own intermediate instance.
    FreshSource fresh2;
    BagForest vf = visible_chase(r.views_hs, r.source, fresh2);
    CHECK(vf.egds.empty());

    // Null-free instances never yield egds.
    Instance crt = critical_instance(r.source);
    CHECK(derived_egds(r.mapping, crt).empty());
}

TEST_CASE("visible chase of the views reproduces the intermediate instance") {
    RunningExample r = load_running();
    FreshSource fresh;
    BagForest forest = visible_chase(r.views_hs, r.source, fresh);
    Instance vis = flat(forest);
    FreshSource fresh2;
    Instance expected = parse_facts(slurp_fixture("running/i1_hs.facts"), fresh2);
    CHECK(vis.size() == 6);
    CHECK(instances_isomorphic(vis, expected));
    CHECK(forest.bags.size() == 4);
    for (const Bag& b : forest.bags) {
        CHECK(b.depth == 1);
        CHECK(b.predecessors.empty());
    }
}

TEST_CASE("visible chase of the mapping yields five bags with cross edges") {
    RunningExample r = load_running();
    FreshSource fresh;
    BagForest forest = visible_chase(r.mapping, r.source, fresh);
    REQUIRE(forest.bags.size() == 5);

    auto by_origin = [&forest](BagOrigin::Kind kind, int tgd) -> const Bag* {
        for (const Bag& b : forest.bags)
            if (b.origin.kind == kind && b.origin.tgd_id == tgd) return &b;
        return nullptr;
    };
    const Bag* inv_e = by_origin(BagOrigin::Kind::InverseTgd, 1);
    const Bag* inv_c = by_origin(BagOrigin::Kind::InverseTgd, 2);
    const Bag* inv_s = by_origin(BagOrigin::Kind::InverseTgd, 3);
    const Bag* egd_e = by_origin(BagOrigin::Kind::DerivedEgd, 1);
    const Bag* egd_c = by_origin(BagOrigin::Kind::DerivedEgd, 2);
    REQUIRE(inv_e);
    REQUIRE(inv_c);
    REQUIRE(inv_s);
    REQUIRE(egd_e);
    REQUIRE(egd_c);

    // The egd derived from the first tgd fires on the second tgd's bag and
    // vice versa.
    CHECK(egd_e->predecessors == std::vector<int>{inv_c->id});
    CHECK(egd_c->predecessors == std::vector<int>{inv_e->id});
    CHECK(inv_e->depth == 1);
    CHECK(egd_e->depth == 2);

    // Depth/support recurrences.
    CHECK(forest.support(egd_e->id) == std::vector<int>{inv_c->id});
    CHECK(forest.support(inv_s->id) == std::vector<int>{inv_s->id});

    // Premises of derived bags occur in their predecessors.
    for (const Bag& b : forest.bags) {
        if (b.depth == 1) continue;
        for (const Fact& f : b.premise.facts()) {
            bool found = false;
            for (int pred : b.predecessors)
                if (forest.find(pred)->facts.contains(f)) found = true;
            CHECK(found);
        }
    }

    // Flat instance matches the final chase result modulo isomorphic
    // duplicates.
    FreshSource fresh2;
    Instance eq6 = parse_facts(slurp_fixture("running/eq6.facts"), fresh2);
    Instance vis = flat(forest);
    CHECK(hom_equivalent(vis, eq6));
}

TEST_CASE("a single join-free existential-free tgd yields one bag and no egds") {
    Schema s;
    s.add_relation("R", 2);
    FreshSource fresh;
    std::vector<Tgd> sigma = deps(s, "R(x,y) -> T(x,y).");
    BagForest forest = visible_chase(sigma, s, fresh);
    CHECK(forest.bags.size() == 1);
    CHECK(forest.egds.empty());
    CHECK(forest.bags[0].depth == 1);
}

TEST_CASE("bag flat equals the reference flat visible chase") {
    RunningExample r = load_running();
    SUBCASE("full mapping") {
        FreshSource f1, f2;
        Instance bagged = flat(visible_chase(r.mapping, r.source, f1));
        Instance reference = reference_visins(r.mapping, r.source, f2);
        CHECK(instances_isomorphic(bagged, reference));
    }
    SUBCASE("views") {
        FreshSource f1, f2;
        Instance bagged = flat(visible_chase(r.views_hs, r.source, f1));
        Instance reference = reference_visins(r.views_hs, r.source, f2);
        CHECK(instances_isomorphic(bagged, reference));
    }
    SUBCASE("views with the northern reading close under their own egds") {
        FreshSource f1, f2;
        Instance bagged = flat(visible_chase(r.views, r.source, f1));
        Instance reference = reference_visins(r.views, r.source, f2);
        CHECK(instances_isomorphic(bagged, reference));
    }
}

TEST_CASE("forest DOT dump lists every bag and edge") {
    RunningExample r = load_running();
    FreshSource fresh;
    BagForest forest = visible_chase(r.mapping, r.source, fresh);
    std::string dot = forest.to_dot();
    CHECK(dot.find("digraph") != std::string::npos);
    for (const Bag& b : forest.bags)
        CHECK(dot.find("b" + std::to_string(b.id) + " ") != std::string::npos);
    CHECK(std::count(dot.begin(), dot.end(), '>') == 2);  // two predecessor edges
}
