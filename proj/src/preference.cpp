#include "maprepair/preference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maprepair {

int exported_count(const Tgd& t) { return int(t.frontier().size()); }

FeatureVector features(const Tgd& first, const Tgd& second) {
    FeatureVector f;
    f.delta_fv = exported_count(second) - exported_count(first);
    f.delta_j = join_count(second) - join_count(first);
    return f;
}

namespace {

Choice p_max_on(const FeatureVector& f) {
    if (f.delta_fv < 0) return Choice::First;
    if (f.delta_fv > 0) return Choice::Second;
    if (f.delta_j < 0) return Choice::First;
    return Choice::Second;
}

Choice p_avg_on(const FeatureVector& f) {
    // (delta_fv + delta_j) / 2 < 0 exactly when the sum is negative.
    return (f.delta_fv + f.delta_j) < 0 ? Choice::First : Choice::Second;
}

}  // namespace

Choice p_max(const Tgd& first, const Tgd& second) { return p_max_on(features(first, second)); }
Choice p_avg(const Tgd& first, const Tgd& second) { return p_avg_on(features(first, second)); }

PreferenceFunction PreferenceFunction::p_max() {
    PreferenceFunction p;
    p.kind_ = Kind::PMax;
    return p;
}

PreferenceFunction PreferenceFunction::p_avg() {
    PreferenceFunction p;
    p.kind_ = Kind::PAvg;
    return p;
}

PreferenceFunction PreferenceFunction::knn(std::vector<Measurement> data, int k) {
    if (data.empty()) throw std::invalid_argument("k-NN training data is empty");
    if (k <= 0 || size_t(k) > data.size())
        throw std::invalid_argument("k must be in [1, |data|]");
    PreferenceFunction p;
    p.kind_ = Kind::Knn;
    p.k_ = k;
    p.data_ = std::move(data);
    return p;
}

PreferenceFunction PreferenceFunction::custom(std::function<Choice(const Tgd&, const Tgd&)> fn,
                                              MoveBias bias) {
    PreferenceFunction p;
    p.kind_ = Kind::Custom;
    p.custom_ = std::move(fn);
    p.bias_ = bias;
    return p;
}

Choice PreferenceFunction::predict(const FeatureVector& x) const {
    switch (kind_) {
        case Kind::PMax: return p_max_on(x);
        case Kind::PAvg: return p_avg_on(x);
        case Kind::Custom:
            throw std::logic_error("custom preference functions have no feature predictor");
        case Kind::Knn: break;
    }
    // Squared Euclidean distance keeps ties exact; stable sort keeps
    // insertion order on equal distances.
    std::vector<std::pair<long, size_t>> by_dist;
    by_dist.reserve(data_.size());
    for (size_t i = 0; i < data_.size(); ++i) {
        long dfv = data_[i].features.delta_fv - x.delta_fv;
        long dj = data_[i].features.delta_j - x.delta_j;
        by_dist.emplace_back(dfv * dfv + dj * dj, i);
    }
    std::stable_sort(by_dist.begin(), by_dist.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    int first_votes = 0;
    int second_votes = 0;
    for (int i = 0; i < k_; ++i) {
        if (data_[by_dist[size_t(i)].second].choice == Choice::First)
            first_votes++;
        else
            second_votes++;
    }
    return first_votes > second_votes ? Choice::First : Choice::Second;
}

Choice PreferenceFunction::compare(const Tgd& first, const Tgd& second) const {
    if (kind_ == Kind::Custom) return custom_(first, second);
    return predict(features(first, second));
}

const Tgd& tournament(const std::vector<Tgd>& candidates, const PreferenceFunction& prf) {
    if (candidates.empty()) throw std::invalid_argument("tournament over an empty candidate set");
    const Tgd* winner = &candidates[0];
    for (size_t i = 1; i < candidates.size(); ++i)
        if (prf.compare(*winner, candidates[i]) == Choice::Second) winner = &candidates[i];
    return *winner;
}

double mcc(const ConfusionMatrix& m) {
    long double num = (long double)(m.n11) * m.n22 - (long double)(m.n12) * m.n21;
    long double f1 = (long double)(m.n11 + m.n12);
    long double f2 = (long double)(m.n11 + m.n21);
    long double f3 = (long double)(m.n22 + m.n12);
    long double f4 = (long double)(m.n22 + m.n21);
    if (f1 == 0 || f2 == 0 || f3 == 0 || f4 == 0) return 0.0;
    return double(num / std::sqrt(f1 * f2 * f3 * f4));
}

std::pair<ConfusionMatrix, double> evaluate(const PreferenceFunction& golden,
                                            const PreferenceFunction& learned,
                                            const std::vector<std::pair<Tgd, Tgd>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("evaluation over an empty pair set");
    ConfusionMatrix m;
    for (const auto& [a, b] : pairs) {
        Choice expected = golden.compare(a, b);
        Choice predicted = learned.compare(a, b);
        if (predicted == Choice::First)
            (expected == Choice::First ? m.n11 : m.n12)++;
        else
            (expected == Choice::Second ? m.n22 : m.n21)++;
    }
    return {m, mcc(m)};
}

std::string measurements_to_csv(const std::vector<Measurement>& data) {
    std::string s = "delta_fv,delta_j,choice\n";
    for (const Measurement& m : data) {
        s += std::to_string(m.features.delta_fv);
        s += ',';
        s += std::to_string(m.features.delta_j);
        s += ',';
        s += std::to_string(int(m.choice));
        s += '\n';
    }
    return s;
}

std::vector<Measurement> measurements_from_csv(std::string_view text) {
    std::vector<Measurement> out;
    std::istringstream in{std::string(text)};
    std::string line;
    bool first_line = true;
    while (std::getline(in, line)) {
        if (first_line) {
            first_line = false;
            if (line.rfind("delta_fv", 0) == 0) continue;
        }
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string fv, j, c;
        if (!std::getline(row, fv, ',') || !std::getline(row, j, ',') || !std::getline(row, c))
            throw std::invalid_argument("malformed measurement row: " + line);
        Measurement m;
        m.features.delta_fv = std::stoi(fv);
        m.features.delta_j = std::stoi(j);
        int choice = std::stoi(c);
        if (choice != 1 && choice != 2)
            throw std::invalid_argument("choice must be 1 or 2 in row: " + line);
        m.choice = choice == 1 ? Choice::First : Choice::Second;
        out.push_back(m);
    }
    return out;
}

}  // namespace maprepair
