#pragma once

// ROC curve representation shared by the optimal-curve construction and the
// score-based baselines. Curves are assembled from integer (dFP, dTP) steps so
// their area is also available as an exact ratio.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "ild/bucketizer.hpp"
#include "ild/csv.hpp"
#include "ild/error.hpp"

namespace ild {

/// Non-negative rational num/den with den > 0; compared by cross-multiplication.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(static_cast<long double>(num) / den); }

    friend bool operator==(const Ratio& a, const Ratio& b) {
        return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<(const Ratio& a, const Ratio& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator>(const Ratio& a, const Ratio& b) { return b < a; }
    friend bool operator<=(const Ratio& a, const Ratio& b) { return !(b < a); }
    friend bool operator>=(const Ratio& a, const Ratio& b) { return !(a < b); }
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;

    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Points run from (0,0) to (1,1) in ascending FPR. `flip_order` lists the
/// bucket indices in the order they were flipped from the all-ones prediction
/// (empty for score-sweep curves).
struct RocCurve {
    std::vector<RocPoint> points;
    std::vector<std::size_t> flip_order;
    double auc = 0.0;
    Ratio exact_auc;
};

/// Trapezoidal area under a piecewise-linear curve. Points must start at
/// (0,0), end at (1,1), lie in the unit square, and have nondecreasing FPR.
inline double auc(std::span<const RocPoint> points) {
    detail::require(points.size() >= 2, "auc: need at least two points");
    detail::require(points.front() == RocPoint{0.0, 0.0}, "auc: curve must start at (0,0)");
    detail::require(points.back() == RocPoint{1.0, 1.0}, "auc: curve must end at (1,1)");
    double area = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& p = points[k];
        detail::require(p.fpr >= 0.0 && p.fpr <= 1.0 && p.tpr >= 0.0 && p.tpr <= 1.0,
                        "auc: point outside the unit square");
        if (k == 0) continue;
        const auto& q = points[k - 1];
        detail::require(p.fpr >= q.fpr, "auc: points must be sorted by fpr");
        area += (p.fpr - q.fpr) * (p.tpr + q.tpr) / 2.0;
    }
    return area;
}

inline double auc(const RocCurve& curve) { return auc(std::span<const RocPoint>(curve.points)); }

/// One move along an ROC curve, in counts: dfp negatives and dtp positives
/// newly predicted positive.
struct RocStep {
    Count dfp = 0;
    Count dtp = 0;
};

/// Builds a curve from (0,0) by applying `steps` in order. The steps must sum
/// to (negatives, positives); both totals must be positive.
inline RocCurve curve_from_steps(std::span<const RocStep> steps, Count negatives, Count positives) {
    if (negatives <= 0 || positives <= 0) {
        throw DegenerateClassError("ROC curve needs both classes (negatives=" + std::to_string(negatives) +
                                   ", positives=" + std::to_string(positives) + ")");
    }
    RocCurve curve;
    curve.points.reserve(steps.size() + 1);
    curve.points.push_back({0.0, 0.0});
    Count fp = 0;
    Count tp = 0;
    __int128 twice_area = 0;  // in units of 1 / (negatives * positives)
    for (const auto& s : steps) {
        detail::require(s.dfp >= 0 && s.dtp >= 0, "ROC steps must be non-negative");
        twice_area += static_cast<__int128>(s.dfp) * (2 * tp + s.dtp);
        fp += s.dfp;
        tp += s.dtp;
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                                static_cast<double>(tp) / static_cast<double>(positives)});
    }
    detail::require(fp == negatives && tp == positives, "ROC steps must cover every observation");
    const __int128 den = static_cast<__int128>(2) * negatives * positives;
    detail::require(den <= std::numeric_limits<std::int64_t>::max(), "dataset too large for exact AUC");
    curve.exact_auc = {static_cast<std::int64_t>(twice_area), static_cast<std::int64_t>(den)};
    curve.auc = curve.exact_auc.value();
    return curve;
}

/// ROC of a scorer by threshold sweep: predict positive iff score >= t, for
/// every distinct score t from highest to lowest. `less` orders scores; equal
/// scores form one diagonal step.
template <typename Score, typename Less = std::less<Score>>
RocCurve roc_from_scores(std::span<const Score> scores, std::span<const std::uint8_t> labels, Less less = {}) {
    detail::require(scores.size() == labels.size(), "scores and labels differ in length");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return less(scores[b], scores[a]); });

    Count negatives = 0;
    Count positives = 0;
    std::vector<RocStep> steps;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const bool same = k > 0 && !less(scores[idx[k - 1]], scores[idx[k]]) && !less(scores[idx[k]], scores[idx[k - 1]]);
        if (!same) steps.push_back({});
        if (labels[idx[k]]) {
            ++steps.back().dtp;
            ++positives;
        } else {
            ++steps.back().dfp;
            ++negatives;
        }
    }
    return curve_from_steps(steps, negatives, positives);
}

/// Highest TPR the curve reaches at `fpr`, interpolating linearly between
/// points and taking the top of any vertical run.
inline double tpr_at(const RocCurve& curve, double fpr) {
    const auto& pts = curve.points;
    double best = -1.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const auto& a = pts[k];
        const auto& b = pts[k + 1];
        if (fpr < a.fpr || fpr > b.fpr) continue;
        if (b.fpr == a.fpr) {
            best = std::max({best, a.tpr, b.tpr});
        } else {
            const double t = (fpr - a.fpr) / (b.fpr - a.fpr);
            best = std::max(best, a.tpr + t * (b.tpr - a.tpr));
        }
    }
    return best;
}

inline void write_curve_csv(std::ostream& out, const RocCurve& curve) {
    csv::write_record(out, {"fpr", "tpr"});
    for (const auto& p : curve.points) csv::write_record(out, {csv::format_double(p.fpr), csv::format_double(p.tpr)});
}

inline nlohmann::ordered_json curve_to_json(const RocCurve& curve) {
    nlohmann::ordered_json j;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : curve.points) pts.push_back({p.fpr, p.tpr});
    j["points"] = std::move(pts);
    j["auc"] = curve.auc;
    j["flip_order"] = curve.flip_order;
    return j;
}

}  // namespace ild
