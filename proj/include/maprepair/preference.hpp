#pragma once

#include "maprepair/model.hpp"

#include <functional>

namespace maprepair {

enum class Choice { First = 1, Second = 2 };

// Pairwise comparison features, oriented second-minus-first: positive
// delta_fv means the second tgd exports more variables.
struct FeatureVector {
    int delta_fv = 0;
    int delta_j = 0;

    bool operator==(const FeatureVector& o) const {
        return delta_fv == o.delta_fv && delta_j == o.delta_j;
    }
};

struct Measurement {
    FeatureVector features;
    Choice choice = Choice::Second;

    bool operator==(const Measurement& o) const {
        return features == o.features && choice == o.choice;
    }
};

int exported_count(const Tgd& t);
FeatureVector features(const Tgd& first, const Tgd& second);

// Total, deterministic pairwise chooser. The built-in golden functions:
//  - p_max prefers the repair with more exported variables, then more joins,
//    defaulting to the second on a full tie;
//  - p_avg thresholds the feature average at zero.
// A k-NN model predicts from the stored measurements under Euclidean
// distance, distance ties broken by insertion order, label ties -> Second.
class PreferenceFunction {
public:
    enum class Kind { PMax, PAvg, Knn, Custom };
    // How the second repair phase should choose between a body-modifying and
    // an export-hiding repair; None means "ask compare()".
    enum class MoveBias { None, PreferHide, PreferModify };

    static PreferenceFunction p_max();
    static PreferenceFunction p_avg();
    static PreferenceFunction knn(std::vector<Measurement> data, int k);
    static PreferenceFunction custom(std::function<Choice(const Tgd&, const Tgd&)> fn,
                                     MoveBias bias = MoveBias::None);

    Choice compare(const Tgd& first, const Tgd& second) const;
    Choice predict(const FeatureVector& x) const;

    Kind kind() const { return kind_; }
    MoveBias move_bias() const { return bias_; }
    const std::vector<Measurement>& training_data() const { return data_; }

private:
    PreferenceFunction() = default;
    Kind kind_ = Kind::PMax;
    MoveBias bias_ = MoveBias::None;
    int k_ = 1;
    std::vector<Measurement> data_;
    std::function<Choice(const Tgd&, const Tgd&)> custom_;
};

Choice p_max(const Tgd& first, const Tgd& second);
Choice p_avg(const Tgd& first, const Tgd& second);

// Left fold: the winner of (c1, c2) meets c3, and so on.
const Tgd& tournament(const std::vector<Tgd>& candidates, const PreferenceFunction& prf);

struct ConfusionMatrix {
    long n11 = 0;  // predicted First, First expected
    long n22 = 0;  // predicted Second, Second expected
    long n12 = 0;  // predicted First, Second expected
    long n21 = 0;  // predicted Second, First expected

    long total() const { return n11 + n22 + n12 + n21; }
};

// Matthews correlation coefficient; 0 when a denominator factor vanishes.
double mcc(const ConfusionMatrix& m);

std::pair<ConfusionMatrix, double> evaluate(const PreferenceFunction& golden,
                                            const PreferenceFunction& learned,
                                            const std::vector<std::pair<Tgd, Tgd>>& pairs);

// Model file format: "delta_fv,delta_j,choice" header, one measurement per
// line, choice in {1,2}.
std::string measurements_to_csv(const std::vector<Measurement>& data);
std::vector<Measurement> measurements_from_csv(std::string_view text);

}  // namespace maprepair
