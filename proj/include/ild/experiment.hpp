#pragma once

// Repeated train/validation comparison of the optimal curve against the
// Naive Bayes baseline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ild/bucketizer.hpp"
#include "ild/core.hpp"
#include "ild/csv.hpp"
#include "ild/dataio.hpp"
#include "ild/naive_bayes.hpp"
#include "ild/random.hpp"
#include "ild/roc.hpp"

namespace ild {

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = false;
};

struct Split {
    ObservationTable train;
    ObservationTable valid;
};

namespace detail {

inline std::size_t train_count(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

inline Split take_rows(const ObservationTable& table, std::vector<std::size_t> train_idx,
                       std::vector<std::size_t> valid_idx) {
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(valid_idx.begin(), valid_idx.end());
    Split s{ObservationTable(table.n_features()), ObservationTable(table.n_features())};
    for (auto i : train_idx) s.train.add(table[i]);
    for (auto i : valid_idx) s.valid.add(table[i]);
    return s;
}

}  // namespace detail

/// Seeded random partition. Unstratified: shuffle row indices and take the
/// first round(f*M) as training rows. Stratified: the same per class, class 0
/// first, so each side keeps the class balance (total sizes may then differ
/// from round(f*M) by one). Both sides keep the original row order.
inline Split split(const ObservationTable& table, const SplitSpec& spec) {
    detail::require(spec.train_fraction > 0.0 && spec.train_fraction < 1.0, "train fraction must be in (0, 1)");
    detail::require(table.size() >= 2, "split needs at least two rows");
    Rng rng(spec.seed);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> valid_idx;
    const auto deal = [&](std::vector<std::size_t> idx) {
        rng.shuffle(std::span<std::size_t>(idx));
        const auto n_train = detail::train_count(idx.size(), spec.train_fraction);
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        valid_idx.insert(valid_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    };
    if (spec.stratified) {
        for (int label = 0; label < 2; ++label) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < table.size(); ++i) {
                if (table[i].label == label) idx.push_back(i);
            }
            deal(std::move(idx));
        }
    } else {
        std::vector<std::size_t> idx(table.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        deal(std::move(idx));
    }
    return detail::take_rows(table, std::move(train_idx), std::move(valid_idx));
}

/// Bucket score m1/m0 learned from training counts, kept as an exact pair.
struct SlopeScore {
    Count m1 = 0;
    Count m0 = 0;
};

struct SlopeLess {
    bool operator()(const SlopeScore& a, const SlopeScore& b) const {
        return static_cast<__int128>(a.m1) * b.m0 < static_cast<__int128>(b.m1) * a.m0;
    }
};

/// Scores each validation row by the training slope of its bucket; buckets
/// absent from training get the overall training ratio M1/M0.
inline std::vector<SlopeScore> slope_scores(const AggregatedDataset& train, const ObservationTable& valid) {
    std::vector<SlopeScore> scores;
    scores.reserve(valid.size());
    for (const auto& obs : valid) {
        const auto j = train.find(obs.codes);
        scores.push_back(j < train.size() ? SlopeScore{train[j].m1, train[j].m0}
                                          : SlopeScore{train.total1(), train.total0()});
    }
    return scores;
}

/// ROC on the validation rows of the ranking learned on the training rows.
/// With train == valid it coincides with ild_curve of that table.
inline RocCurve evaluate_ild_on_validation(const ObservationTable& train, const ObservationTable& valid) {
    detail::require(!train.empty() && !valid.empty(), "train and validation sets must be non-empty");
    const auto agg = aggregate(train);
    const auto scores = slope_scores(agg, valid);
    const auto labels = detail::labels_of(valid);
    return roc_from_scores(std::span<const SlopeScore>(scores), std::span<const std::uint8_t>(labels), SlopeLess{});
}

/// Distinct validation bucket keys that never occur in training.
inline std::size_t count_unseen_buckets(const AggregatedDataset& train, const ObservationTable& valid) {
    const auto v = aggregate(valid);
    std::size_t unseen = 0;
    for (const auto& b : v.buckets()) unseen += train.find(b.key) == train.size() ? 1 : 0;
    return unseen;
}

struct TrialOptions {
    double train_fraction = 0.8;
    double alpha = kDefaultAlpha;
    bool stratified = false;
};

struct TrialResult {
    std::uint64_t seed = 0;
    std::optional<double> auc_ild;
    std::optional<double> auc_nb;
    std::optional<double> auc_diff;  // auc_ild - auc_nb
    std::optional<double> acc_ild;   // max accuracy over the validation buckets
    std::optional<double> acc_nb;    // validation accuracy at the train-optimal threshold
    std::optional<double> nb_threshold;
    std::size_t n_buckets_train = 0;
    std::size_t n_unseen_buckets_valid = 0;
    std::vector<std::string> warnings;
};

inline TrialResult run_trial(const ObservationTable& table, const FeatureSchema& schema, std::uint64_t seed,
                             const TrialOptions& opt = {}) {
    TrialResult r;
    r.seed = seed;
    const auto parts = split(table, {opt.train_fraction, seed, opt.stratified});
    const auto train_agg = aggregate(parts.train);
    r.n_buckets_train = train_agg.size();
    r.n_unseen_buckets_valid = count_unseen_buckets(train_agg, parts.valid);

    const auto model = fit(parts.train, schema, opt.alpha);
    const auto choice = best_threshold(model, parts.train);
    r.nb_threshold = choice.threshold;
    if (!parts.valid.empty()) {
        r.acc_ild = max_accuracy(aggregate(parts.valid)).value;
        r.acc_nb = accuracy_at_threshold(model, parts.valid, choice.threshold);
    }
    if (parts.train.count_label(0) == 0 || parts.train.count_label(1) == 0) {
        r.warnings.push_back("seed " + std::to_string(seed) + ": training split has a single class");
    }
    try {
        r.auc_ild = evaluate_ild_on_validation(parts.train, parts.valid).auc;
        r.auc_nb = nb_roc(model, parts.valid).auc;
        r.auc_diff = *r.auc_ild - *r.auc_nb;
    } catch (const DegenerateClassError&) {
        r.auc_ild.reset();
        r.auc_nb.reset();
        r.warnings.push_back("seed " + std::to_string(seed) + ": validation split has a single class; AUC undefined");
    }
    return r;
}

/// Trial i uses seed base_seed + i. Results come back in seed order.
inline std::vector<TrialResult> run_trials(const ObservationTable& table, const FeatureSchema& schema, std::size_t n,
                                           std::uint64_t base_seed, const TrialOptions& opt = {}) {
    detail::require(n >= 1, "at least one trial is required");
    std::vector<TrialResult> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(run_trial(table, schema, base_seed + i, opt));
    return out;
}

namespace detail {

inline std::string opt_field(const std::optional<double>& v) { return v ? csv::format_double(*v) : "NA"; }

}  // namespace detail

inline void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
    csv::write_record(out, {"seed", "auc_ild", "auc_nb", "auc_diff", "acc_ild", "acc_nb", "n_buckets_train",
                            "n_unseen_buckets_valid"});
    for (const auto& t : trials) {
        csv::write_record(out, {std::to_string(t.seed), detail::opt_field(t.auc_ild), detail::opt_field(t.auc_nb),
                                detail::opt_field(t.auc_diff), detail::opt_field(t.acc_ild),
                                detail::opt_field(t.acc_nb), std::to_string(t.n_buckets_train),
                                std::to_string(t.n_unseen_buckets_valid)});
    }
}

struct Stat {
    std::size_t n = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
};

template <typename Field>
Stat summarize(const std::vector<TrialResult>& trials, Field field) {
    Stat s;
    double sum = 0.0;
    for (const auto& t : trials) {
        const std::optional<double>& v = field(t);
        if (!v) continue;
        if (s.n == 0) s.min = s.max = *v;
        s.min = std::min(s.min, *v);
        s.max = std::max(s.max, *v);
        sum += *v;
        ++s.n;
    }
    if (s.n) s.mean = sum / static_cast<double>(s.n);
    return s;
}

}  // namespace ild
