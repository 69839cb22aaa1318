#include <doctest.h>

#include <cmath>

#include "maprepair/scenario.hpp"
#include "support/fixtures.hpp"

using namespace maprepair;
using namespace maprepair::testing;

namespace {

struct Repairs {
    Tgd r1, r2, r3;
};

Repairs load_repairs() {
    Schema s = parse_schema(slurp_fixture("example4/source.schema"));
    Repairs r;
    r.r1 = parse_dependencies(slurp_fixture("example4/r1.tgds"), s)[0];
    r.r2 = parse_dependencies(slurp_fixture("example4/r2.tgds"), s)[0];
    r.r3 = parse_dependencies(slurp_fixture("example4/r3.tgds"), s)[0];
    return r;
}

}  // namespace

TEST_CASE("feature rows of the three repairs") {
    Repairs r = load_repairs();
    CHECK(features(r.r1, r.r2) == FeatureVector{1, -1});
    CHECK(features(r.r1, r.r3) == FeatureVector{1, 0});
    CHECK(features(r.r2, r.r3) == FeatureVector{0, 1});
    CHECK(features(r.r1, r.r1) == FeatureVector{0, 0});
}

TEST_CASE("features are antisymmetric") {
    Repairs r = load_repairs();
    const Tgd* all[] = {&r.r1, &r.r2, &r.r3};
    for (const Tgd* a : all)
        for (const Tgd* b : all) {
            FeatureVector fw = features(*a, *b);
            FeatureVector bw = features(*b, *a);
            CHECK(fw.delta_fv == -bw.delta_fv);
            CHECK(fw.delta_j == -bw.delta_j);
        }
}

TEST_CASE("the max-exports preference reproduces the recorded choices") {
    Repairs r = load_repairs();
    CHECK(p_max(r.r1, r.r2) == Choice::Second);
    CHECK(p_max(r.r1, r.r3) == Choice::Second);
    CHECK(p_max(r.r2, r.r3) == Choice::Second);
    CHECK(p_max(r.r1, r.r1) == Choice::Second);  // full tie defaults to the second
    CHECK(p_max(r.r2, r.r1) == Choice::First);
}

TEST_CASE("the averaging preference thresholds the feature mean") {
    Repairs r = load_repairs();
    CHECK(p_avg(r.r1, r.r2) == Choice::Second);  // mean 0
    CHECK(p_avg(r.r1, r.r3) == Choice::Second);  // mean 0.5
    CHECK(p_avg(r.r3, r.r1) == Choice::First);   // mean -0.5
    PreferenceFunction avg = PreferenceFunction::p_avg();
    CHECK(avg.predict(FeatureVector{-2, 0}) == Choice::First);
    CHECK(avg.predict(FeatureVector{-1, 1}) == Choice::Second);
}

TEST_CASE("decision consistency of the max preference under argument swap") {
    Repairs r = load_repairs();
    const Tgd* all[] = {&r.r1, &r.r2, &r.r3};
    for (const Tgd* a : all)
        for (const Tgd* b : all) {
            FeatureVector f = features(*a, *b);
            if (f.delta_fv == 0 && f.delta_j == 0) continue;
            bool picks_b = p_max(*a, *b) == Choice::Second;
            bool picks_b_swapped = p_max(*b, *a) == Choice::First;
            CHECK(picks_b == picks_b_swapped);
        }
}

TEST_CASE("k-NN prediction on the recorded training set") {
    std::vector<Measurement> data = {{{1, -1}, Choice::Second},
                                     {{1, 0}, Choice::Second},
                                     {{0, 1}, Choice::Second}};
    PreferenceFunction one = PreferenceFunction::knn(data, 1);
    CHECK(one.predict(FeatureVector{1, -1}) == Choice::Second);

    // A query equal to a training point returns that point's label.
    std::vector<Measurement> mixed = {{{2, 2}, Choice::First}, {{-2, -2}, Choice::Second}};
    PreferenceFunction nn = PreferenceFunction::knn(mixed, 1);
    CHECK(nn.predict(FeatureVector{2, 2}) == Choice::First);
    CHECK(nn.predict(FeatureVector{-2, -2}) == Choice::Second);

    PreferenceFunction three = PreferenceFunction::knn(data, 3);
    CHECK(three.predict(FeatureVector{0, 0}) == Choice::Second);  // majority of all three

    CHECK_THROWS_AS(PreferenceFunction::knn({}, 1), std::invalid_argument);
    CHECK_THROWS_AS(PreferenceFunction::knn(data, 4), std::invalid_argument);
    CHECK_THROWS_AS(PreferenceFunction::knn(data, 0), std::invalid_argument);
}

TEST_CASE("distance ties break by insertion order") {
    std::vector<Measurement> data = {{{0, 1}, Choice::First}, {{0, -1}, Choice::Second}};
    PreferenceFunction nn = PreferenceFunction::knn(data, 1);
    // Query equidistant from both rows: the earlier row wins.
    CHECK(nn.predict(FeatureVector{0, 0}) == Choice::First);
}

TEST_CASE("k = 1 achieves zero training error") {
    SplitMix64 rng(99);
    std::vector<Measurement> data;
    for (int i = 0; i < 50; ++i) {
        FeatureVector f{int(rng.below(9)) - 4, int(rng.below(9)) - 4};
        data.push_back({f, PreferenceFunction::p_max().predict(f)});
    }
    PreferenceFunction nn = PreferenceFunction::knn(data, 1);
    for (const Measurement& m : data) CHECK(nn.predict(m.features) == m.choice);
}

TEST_CASE("tournament folds left and is order-insensitive here") {
    Repairs r = load_repairs();
    PreferenceFunction max = PreferenceFunction::p_max();
    std::vector<Tgd> all = {r.r1, r.r2, r.r3};
    CHECK(tournament(all, max).canonical_key() == r.r3.canonical_key());
    CHECK(tournament({r.r1}, max).canonical_key() == r.r1.canonical_key());
    CHECK_THROWS_AS(tournament({}, max), std::invalid_argument);

    std::vector<std::vector<int>> perms = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                           {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
        std::vector<Tgd> order = {all[size_t(p[0])], all[size_t(p[1])], all[size_t(p[2])]};
        CHECK(tournament(order, max).canonical_key() == r.r3.canonical_key());
    }
}

TEST_CASE("confusion matrix and correlation coefficient") {
    Repairs r = load_repairs();
    PreferenceFunction max = PreferenceFunction::p_max();
    // Mixed-label pair set built from both argument orders.
    std::vector<std::pair<Tgd, Tgd>> pairs = {{r.r1, r.r2}, {r.r2, r.r1}, {r.r1, r.r3},
                                              {r.r3, r.r1}, {r.r2, r.r3}, {r.r3, r.r2}};
    auto [same, mcc_same] = evaluate(max, max, pairs);
    CHECK(same.n12 == 0);
    CHECK(same.n21 == 0);
    CHECK(same.n11 == 3);
    CHECK(same.n22 == 3);
    CHECK(mcc_same == doctest::Approx(1.0));

    PreferenceFunction inverted = PreferenceFunction::custom([](const Tgd& a, const Tgd& b) {
        return p_max(a, b) == Choice::First ? Choice::Second : Choice::First;
    });
    auto [inv, mcc_inv] = evaluate(max, inverted, pairs);
    CHECK(inv.n11 == 0);
    CHECK(inv.n22 == 0);
    CHECK(mcc_inv == doctest::Approx(-1.0));

    CHECK_THROWS_AS(evaluate(max, max, {}), std::invalid_argument);
}

TEST_CASE("the reported confusion matrix gives the reported coefficient") {
    ConfusionMatrix m;
    m.n11 = 290;
    m.n22 = 395577;
    m.n12 = 1;
    m.n21 = 42;
    CHECK(mcc(m) == doctest::Approx(0.93).epsilon(0.005));

    ConfusionMatrix degenerate;
    degenerate.n22 = 100;
    CHECK(mcc(degenerate) == 0.0);
}

TEST_CASE("measurement CSV round-trips with a header") {
    std::vector<Measurement> data = {{{1, -1}, Choice::Second},
                                     {{-3, 2}, Choice::First}};
    std::string csv = measurements_to_csv(data);
    CHECK(csv.rfind("delta_fv,delta_j,choice\n", 0) == 0);
    std::vector<Measurement> again = measurements_from_csv(csv);
    CHECK(again == data);
    CHECK(measurements_from_csv("delta_fv,delta_j,choice\n").empty());
    CHECK_THROWS_AS(measurements_from_csv("1,2,5\n"), std::invalid_argument);
}

TEST_CASE("training rows from the first-phase candidate set") {
    Schema s = parse_schema(slurp_fixture("example4/source.schema"));
    FreshSource fresh;
    Scenario scenario;
    scenario.source = s;
    scenario.vis_override = parse_facts(slurp_fixture("example4/visins.facts"), fresh);
    scenario.tgds = parse_dependencies(slurp_fixture("example4/mapping.tgds"), s);
    std::vector<Measurement> rows =
        generate_training_set({scenario}, PreferenceFunction::p_max());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == Measurement{{1, -1}, Choice::Second});
    CHECK(rows[1] == Measurement{{1, 0}, Choice::Second});
    CHECK(rows[2] == Measurement{{0, 1}, Choice::Second});

    CHECK(generate_training_set({}, PreferenceFunction::p_max()).empty());
}
