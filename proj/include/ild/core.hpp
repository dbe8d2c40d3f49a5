#pragma once

// Performance limits of an aggregated categorical dataset.
//
// Any deterministic classifier over the bucket features reduces to a
// prediction vector p with one 0/1 entry per bucket. From the bucket counts
// this header derives the confusion counts of any p, the best and worst
// achievable accuracy, the perfection index, and the ROC curve with the
// largest possible area (flip buckets out of the all-ones prediction in
// ascending order of m1/m0).

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ild/bucketizer.hpp"
#include "ild/error.hpp"
#include "ild/random.hpp"
#include "ild/roc.hpp"

namespace ild {

class PredictionVector {
public:
    PredictionVector() = default;
    explicit PredictionVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        for (auto b : bits_) detail::require(b == 0 || b == 1, "prediction entries must be 0 or 1");
    }

    static PredictionVector constant(std::size_t n, std::uint8_t value) {
        return PredictionVector(std::vector<std::uint8_t>(n, value));
    }

    std::size_t size() const { return bits_.size(); }
    std::uint8_t operator[](std::size_t j) const { return bits_[j]; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    friend bool operator==(const PredictionVector&, const PredictionVector&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

struct ConfusionCounts {
    Count tp = 0;
    Count tn = 0;
    Count fp = 0;
    Count fn = 0;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

namespace detail {

inline void require_observations(const AggregatedDataset& data) {
    if (data.total() <= 0) throw UndefinedMetricError("metric undefined on an empty dataset");
}

inline void require_both_classes(const AggregatedDataset& data) {
    if (data.total0() <= 0 || data.total1() <= 0) {
        throw DegenerateClassError("dataset has a single class (M0=" + std::to_string(data.total0()) +
                                   ", M1=" + std::to_string(data.total1()) + "); ROC is undefined");
    }
}

inline double over_total(Count num, const AggregatedDataset& data) {
    return static_cast<double>(num) / static_cast<double>(data.total());
}

/// Strict order of buckets by m1/m0, with m0 = 0 ranking as +infinity.
inline bool slope_less(const Bucket& a, const Bucket& b) {
    return static_cast<__int128>(a.m1) * b.m0 < static_cast<__int128>(b.m1) * a.m0;
}

}  // namespace detail

inline ConfusionCounts confusion(const AggregatedDataset& data, const PredictionVector& p) {
    detail::require(p.size() == data.size(), "prediction vector length must equal the bucket count");
    ConfusionCounts c;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& b = data[i];
        if (p[i]) {
            c.tp += b.m1;
            c.fp += b.m0;
        } else {
            c.tn += b.m0;
            c.fn += b.m1;
        }
    }
    return c;
}

/// (FPR, TPR) operating point of `p`. Requires both classes.
inline RocPoint operating_point(const AggregatedDataset& data, const PredictionVector& p) {
    detail::require_both_classes(data);
    const auto c = confusion(data, p);
    return {static_cast<double>(c.fp) / static_cast<double>(data.total0()),
            static_cast<double>(c.tp) / static_cast<double>(data.total1())};
}

inline double accuracy(const AggregatedDataset& data, const PredictionVector& p) {
    detail::require(p.size() == data.size(), "prediction vector length must equal the bucket count");
    detail::require_observations(data);
    Count correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& b = data[i];
        correct += p[i] * (b.m1 - b.m0) + b.m0;
    }
    return detail::over_total(correct, data);
}

struct AccuracyBound {
    double value = 0.0;
    PredictionVector prediction;
};

/// Best accuracy over all prediction vectors: predict 1 exactly where
/// m1 > m0. Ties predict 0; the value does not depend on them.
inline AccuracyBound max_accuracy(const AggregatedDataset& data) {
    detail::require_observations(data);
    Count correct = 0;
    std::vector<std::uint8_t> bits(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& b = data[i];
        bits[i] = b.m1 > b.m0 ? 1 : 0;
        correct += std::max(b.m0, b.m1);
    }
    return {detail::over_total(correct, data), PredictionVector(std::move(bits))};
}

/// Worst accuracy over all prediction vectors: predict 1 exactly where
/// m1 < m0.
inline AccuracyBound min_accuracy(const AggregatedDataset& data) {
    detail::require_observations(data);
    Count correct = 0;
    std::vector<std::uint8_t> bits(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& b = data[i];
        bits[i] = b.m1 < b.m0 ? 1 : 0;
        correct += std::min(b.m0, b.m1);
    }
    return {detail::over_total(correct, data), PredictionVector(std::move(bits))};
}

/// (1/M) * sum |m1 - m0|. 1 for a perfect dataset, 0 when every bucket is
/// balanced.
inline double perfection_index(const AggregatedDataset& data) {
    detail::require_observations(data);
    Count sum = 0;
    for (const auto& b : data.buckets()) sum += b.m1 > b.m0 ? b.m1 - b.m0 : b.m0 - b.m1;
    return detail::over_total(sum, data);
}

struct FlipEffect {
    double delta_tpr = 0.0;
    double delta_fpr = 0.0;
};

/// How far TPR and FPR drop when bucket j's prediction goes from 1 to 0.
inline FlipEffect flip_effect(const AggregatedDataset& data, std::size_t j) {
    detail::require(j < data.size(), "bucket index out of range");
    detail::require_both_classes(data);
    return {static_cast<double>(data[j].m1) / static_cast<double>(data.total1()),
            static_cast<double>(data[j].m0) / static_cast<double>(data.total0())};
}

/// Curve traced by flipping buckets out of the all-ones prediction in
/// `flip_order`. The stored points run in ascending FPR, i.e. the reverse of
/// the flip sequence.
inline RocCurve curve_for_flip_order(const AggregatedDataset& data, std::span<const std::size_t> flip_order) {
    detail::require_both_classes(data);
    detail::require(flip_order.size() == data.size(), "flip order must list every bucket once");
    std::vector<bool> seen(data.size(), false);
    std::vector<RocStep> steps;
    steps.reserve(flip_order.size());
    for (auto it = flip_order.rbegin(); it != flip_order.rend(); ++it) {
        detail::require(*it < data.size() && !seen[*it], "flip order must be a permutation of bucket indices");
        seen[*it] = true;
        steps.push_back({data[*it].m0, data[*it].m1});
    }
    auto curve = curve_from_steps(steps, data.total0(), data.total1());
    curve.flip_order.assign(flip_order.begin(), flip_order.end());
    return curve;
}

/// Flip order of the optimal curve: ascending m1/m0, buckets with m0 = 0
/// last, equal slopes in bucket (key) order.
inline std::vector<std::size_t> ild_flip_order(const AggregatedDataset& data) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return detail::slope_less(data[a], data[b]); });
    return order;
}

/// The ROC curve with the largest AUC any flip ordering (and hence any
/// deterministic classifier on these features) can reach.
inline RocCurve ild_curve(const AggregatedDataset& data) {
    detail::require_both_classes(data);
    const auto order = ild_flip_order(data);
    return curve_for_flip_order(data, order);
}

/// True when consecutive flips a then b make the descending curve turn the
/// wrong way (interior angle below pi), i.e. a is steeper than b. Evaluated as
/// the sign of the cross product of the two segment directions.
inline bool angle_below_pi(const Bucket& a, const Bucket& b) {
    const __int128 cross = static_cast<__int128>(a.m0) * b.m1 - static_cast<__int128>(a.m1) * b.m0;
    return cross < 0;
}

/// Repeated passes of adjacent swaps over `order` until no pair of
/// consecutive segments has an interior angle below pi. Returns the number of
/// swaps performed.
inline std::size_t bubble_flip_order(const AggregatedDataset& data, std::vector<std::size_t>& order) {
    std::size_t swaps = 0;
    while (true) {
        std::size_t pass_swaps = 0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            if (angle_below_pi(data[order[i]], data[order[i + 1]])) {
                std::swap(order[i], order[i + 1]);
                ++pass_swaps;
            }
        }
        swaps += pass_swaps;
        if (pass_swaps == 0) return swaps;
    }
}

/// Optimal curve built by the constructive swap procedure, starting from a
/// random flip order drawn with `seed`. Same AUC as ild_curve; O(N_B^2).
inline RocCurve ild_curve_bubble(const AggregatedDataset& data, std::uint64_t seed) {
    detail::require_both_classes(data);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    bubble_flip_order(data, order);
    return curve_for_flip_order(data, order);
}

/// Curve for a uniformly random flip order.
inline RocCurve roc_of_random_flips(const AggregatedDataset& data, std::uint64_t seed) {
    detail::require_both_classes(data);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    return curve_for_flip_order(data, order);
}

struct LimitReport {
    std::optional<double> max_auc;  // empty for single-class datasets
    double max_accuracy = 0.0;
    double min_accuracy = 0.0;
    double perfection_index = 0.0;
    std::size_t n_buckets = 0;
    std::size_t n_perfect_buckets = 0;
    bool is_perfect = false;
};

inline LimitReport limit_report(const AggregatedDataset& data) {
    detail::require_observations(data);
    LimitReport r;
    Count hi = 0;
    Count lo = 0;
    for (const auto& b : data.buckets()) {
        hi += std::max(b.m0, b.m1);
        lo += std::min(b.m0, b.m1);
    }
    r.max_accuracy = detail::over_total(hi, data);
    r.min_accuracy = detail::over_total(lo, data);
    r.perfection_index = detail::over_total(hi - lo, data);
    const auto part = classify_buckets(data);
    r.n_buckets = data.size();
    r.n_perfect_buckets = part.n_perfect();
    r.is_perfect = part.dataset_is_perfect();
    if (data.total0() > 0 && data.total1() > 0) r.max_auc = ild_curve(data).auc;
    return r;
}

inline nlohmann::ordered_json report_to_json(const LimitReport& r) {
    nlohmann::ordered_json j;
    j["max_auc"] = r.max_auc ? nlohmann::ordered_json(*r.max_auc) : nlohmann::ordered_json(nullptr);
    j["max_accuracy"] = r.max_accuracy;
    j["min_accuracy"] = r.min_accuracy;
    j["perfection_index"] = r.perfection_index;
    j["n_buckets"] = r.n_buckets;
    j["n_perfect_buckets"] = r.n_perfect_buckets;
    j["is_perfect"] = r.is_perfect;
    return j;
}

}  // namespace ild
