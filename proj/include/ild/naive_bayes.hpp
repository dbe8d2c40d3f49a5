#pragma once

// Categorical Naive Bayes with additive smoothing, used as the reference
// model whose ROC is compared against the dataset's optimal curve.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ild/dataio.hpp"
#include "ild/error.hpp"
#include "ild/roc.hpp"

namespace ild {

inline constexpr double kDefaultAlpha = 1.0;

/// Per feature, per code, per class conditional probabilities.
///
/// A feature's category space is its legitimate codes, plus the sentinel
/// when missing values occurred in the training data. A sentinel never seen
/// in training is ignored at scoring time (the feature is marginalized out).
struct NbModel {
    double prior = 0.5;  // P(y = 1)
    double alpha = kDefaultAlpha;
    std::vector<std::string> feature_names;
    std::vector<std::vector<std::array<double, 2>>> cond;  // [feature][code][class]
    std::vector<bool> sentinel_seen;

    std::size_t n_features() const { return cond.size(); }
    Code sentinel(std::size_t f) const { return static_cast<Code>(cond[f].size() - 1); }
    std::size_t n_categories(std::size_t f) const { return cond[f].size() - (sentinel_seen[f] ? 0 : 1); }
};

inline NbModel fit(const ObservationTable& train, const FeatureSchema& schema, double alpha = kDefaultAlpha) {
    detail::require(!train.empty(), "naive Bayes: training table is empty");
    detail::require(alpha >= 0.0 && std::isfinite(alpha), "naive Bayes: alpha must be non-negative");
    detail::require(is_valid_encoding(train, schema), "naive Bayes: table codes do not match the schema");

    const std::size_t nf = schema.size();
    std::array<double, 2> class_count{0.0, 0.0};
    std::vector<std::vector<std::array<double, 2>>> counts(nf);
    for (std::size_t f = 0; f < nf; ++f) counts[f].assign(schema.feature(f).code_space(), {0.0, 0.0});
    for (const auto& obs : train) {
        class_count[obs.label] += 1.0;
        for (std::size_t f = 0; f < nf; ++f) counts[f][static_cast<std::size_t>(obs.codes[f])][obs.label] += 1.0;
    }

    NbModel m;
    m.alpha = alpha;
    const double total = static_cast<double>(train.size());
    m.prior = (class_count[1] + alpha) / (total + 2.0 * alpha);
    m.cond.resize(nf);
    m.sentinel_seen.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        const auto& feat = schema.feature(f);
        m.feature_names.push_back(feat.name);
        const auto s = static_cast<std::size_t>(feat.sentinel());
        m.sentinel_seen[f] = counts[f][s][0] + counts[f][s][1] > 0.0;
        const auto n_cat = static_cast<double>(feat.cardinality() + (m.sentinel_seen[f] ? 1 : 0));
        m.cond[f].assign(feat.code_space(), {0.0, 0.0});
        for (std::size_t c = 0; c < feat.code_space(); ++c) {
            if (c == s && !m.sentinel_seen[f]) continue;
            for (int y = 0; y < 2; ++y) {
                const double den = class_count[y] + alpha * n_cat;
                m.cond[f][c][y] = den > 0.0 ? (counts[f][c][y] + alpha) / den : 1.0 / n_cat;
            }
        }
    }
    return m;
}

/// Posterior P(y = 1 | x), computed in log space.
inline double score(const NbModel& model, std::span<const Code> x) {
    detail::require(x.size() == model.n_features(), "naive Bayes: feature vector has the wrong width");
    double log1 = std::log(model.prior);
    double log0 = std::log(1.0 - model.prior);
    for (std::size_t f = 0; f < x.size(); ++f) {
        detail::require(x[f] >= 0 && x[f] <= model.sentinel(f), "naive Bayes: code out of range");
        if (x[f] == model.sentinel(f) && !model.sentinel_seen[f]) continue;
        const auto& p = model.cond[f][static_cast<std::size_t>(x[f])];
        log0 += std::log(p[0]);
        log1 += std::log(p[1]);
    }
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    if (log0 == ninf && log1 == ninf) return model.prior;
    if (log1 == ninf) return 0.0;
    if (log0 == ninf) return 1.0;
    return 1.0 / (1.0 + std::exp(log0 - log1));
}

inline std::vector<double> score_all(const NbModel& model, const ObservationTable& table) {
    std::vector<double> out;
    out.reserve(table.size());
    for (const auto& obs : table) out.push_back(score(model, obs.codes));
    return out;
}

namespace detail {

inline std::vector<std::uint8_t> labels_of(const ObservationTable& table) {
    std::vector<std::uint8_t> y;
    y.reserve(table.size());
    for (const auto& obs : table) y.push_back(obs.label);
    return y;
}

}  // namespace detail

inline RocCurve nb_roc(const NbModel& model, const ObservationTable& eval) {
    const auto scores = score_all(model, eval);
    const auto labels = detail::labels_of(eval);
    return roc_from_scores(std::span<const double>(scores), std::span<const std::uint8_t>(labels));
}

struct ThresholdChoice {
    double threshold = 0.0;
    double accuracy = 0.0;
};

/// Cut point among the distinct scores that maximizes accuracy of the rule
/// "positive iff score >= threshold"; ties go to the smaller threshold.
inline ThresholdChoice best_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    detail::require(!scores.empty() && scores.size() == labels.size(), "best_threshold: need matching, non-empty inputs");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const auto negatives = static_cast<long long>(std::count(labels.begin(), labels.end(), std::uint8_t{0}));
    long long correct = negatives;  // everything predicted 0
    ThresholdChoice best{scores[idx.front()], -1.0};
    long long best_correct = -1;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        correct += labels[idx[k]] ? 1 : -1;
        const bool group_end = k + 1 == idx.size() || scores[idx[k + 1]] != scores[idx[k]];
        if (group_end && correct >= best_correct) {
            best_correct = correct;
            best.threshold = scores[idx[k]];
        }
    }
    best.accuracy = static_cast<double>(best_correct) / static_cast<double>(scores.size());
    return best;
}

inline ThresholdChoice best_threshold(const NbModel& model, const ObservationTable& train) {
    const auto scores = score_all(model, train);
    const auto labels = detail::labels_of(train);
    return best_threshold(std::span<const double>(scores), std::span<const std::uint8_t>(labels));
}

inline double accuracy_at_threshold(const NbModel& model, const ObservationTable& table, double threshold) {
    detail::require(!table.empty(), "accuracy of an empty table is undefined");
    std::size_t correct = 0;
    for (const auto& obs : table) {
        const int predicted = score(model, obs.codes) >= threshold ? 1 : 0;
        correct += predicted == obs.label ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(table.size());
}

inline nlohmann::ordered_json model_to_json(const NbModel& m) {
    nlohmann::ordered_json j;
    j["alpha"] = m.alpha;
    j["prior"] = m.prior;
    auto feats = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < m.n_features(); ++f) {
        auto cond = nlohmann::ordered_json::array();
        for (const auto& p : m.cond[f]) cond.push_back({p[0], p[1]});
        feats.push_back({{"name", m.feature_names[f]}, {"sentinel_seen", static_cast<bool>(m.sentinel_seen[f])},
                         {"cond", std::move(cond)}});
    }
    j["features"] = std::move(feats);
    return j;
}

inline NbModel model_from_json(const nlohmann::ordered_json& j) {
    NbModel m;
    m.alpha = j.at("alpha").get<double>();
    m.prior = j.at("prior").get<double>();
    for (const auto& f : j.at("features")) {
        m.feature_names.push_back(f.at("name").get<std::string>());
        m.sentinel_seen.push_back(f.at("sentinel_seen").get<bool>());
        std::vector<std::array<double, 2>> cond;
        for (const auto& p : f.at("cond")) cond.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        detail::require(!cond.empty(), "naive Bayes JSON: empty conditional table");
        m.cond.push_back(std::move(cond));
    }
    return m;
}

}  // namespace ild
