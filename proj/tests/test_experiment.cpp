#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ild/experiment.hpp"

using namespace ild;

namespace {

FeatureSchema schema3() {
    return FeatureSchema({{"a", FeatureKind::categorical, {"0", "1", "2"}, {}},
                          {"b", FeatureKind::categorical, {"0", "1"}, {}}},
                         "y");
}

ObservationTable synthetic(std::uint64_t seed, std::size_t rows) {
    Rng rng(seed);
    ObservationTable t(2);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto a = static_cast<Code>(rng.uniform_below(4));  // includes sentinel 3
        const auto b = static_cast<Code>(rng.uniform_below(2));
        const std::uint64_t pct = 10 + 20 * static_cast<std::uint64_t>(a) + 15 * static_cast<std::uint64_t>(b);
        t.add({a, b}, rng.uniform_below(100) < pct ? 1 : 0);
    }
    return t;
}

std::multiset<std::pair<std::vector<Code>, int>> as_multiset(const ObservationTable& t) {
    std::multiset<std::pair<std::vector<Code>, int>> out;
    for (const auto& o : t) out.emplace(o.codes, o.label);
    return out;
}

}  // namespace

TEST(Split, SizesFollowRounding) {
    const auto t = synthetic(1, 10);
    const auto s = split(t, {0.8, 5, false});
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.valid.size(), 2u);
    const auto big = synthetic(2, 4238);
    const auto sb = split(big, {0.8, 0, false});
    EXPECT_EQ(sb.train.size(), 3390u);
    EXPECT_EQ(sb.valid.size(), 848u);
}

TEST(Split, DeterministicPartition) {
    const auto t = synthetic(3, 500);
    for (bool stratified : {false, true}) {
        const auto a = split(t, {0.7, 42, stratified});
        const auto b = split(t, {0.7, 42, stratified});
        EXPECT_EQ(a.train, b.train);
        EXPECT_EQ(a.valid, b.valid);
        auto joined = as_multiset(a.train);
        for (const auto& o : a.valid) joined.emplace(o.codes, o.label);
        EXPECT_EQ(joined, as_multiset(t));
        EXPECT_EQ(a.train.size() + a.valid.size(), t.size());
    }
    EXPECT_NE(split(t, {0.7, 1, false}).train, split(t, {0.7, 2, false}).train);
}

TEST(Split, StratifiedKeepsBalance) {
    const auto t = synthetic(4, 1000);
    const auto s = split(t, {0.8, 9, true});
    const auto expected1 = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(t.count_label(1))));
    EXPECT_EQ(s.train.count_label(1), expected1);
}

TEST(Split, RejectsBadSpec) {
    const auto t = synthetic(5, 10);
    EXPECT_THROW(split(t, {0.0, 1, false}), ContractViolation);
    EXPECT_THROW(split(t, {1.0, 1, false}), ContractViolation);
    EXPECT_THROW(split(synthetic(5, 1), {0.5, 1, false}), ContractViolation);
}

TEST(EvaluateIld, TrainEqualsValidGivesInSampleCurve) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto t = synthetic(seed, 50 + 10 * seed);
        const auto c = evaluate_ild_on_validation(t, t);
        EXPECT_EQ(c.exact_auc, ild_curve(aggregate(t)).exact_auc);
    }
}

TEST(EvaluateIld, PerfectPatternTransfers) {
    ObservationTable train(2), valid(2);
    for (int i = 0; i < 5; ++i) {
        train.add({0, 0}, 0);
        train.add({1, 1}, 1);
        train.add({2, 0}, 0);
    }
    valid.add({0, 0}, 0);
    valid.add({1, 1}, 1);
    valid.add({1, 1}, 1);
    valid.add({2, 0}, 0);
    EXPECT_DOUBLE_EQ(evaluate_ild_on_validation(train, valid).auc, 1.0);
}

TEST(EvaluateIld, UnseenBucketsGetGlobalRatio) {
    ObservationTable train(2), valid(2);
    train.add({0, 0}, 0);
    train.add({0, 0}, 0);
    train.add({1, 1}, 1);
    train.add({1, 1}, 0);
    valid.add({2, 1}, 1);
    valid.add({0, 0}, 0);
    valid.add({2, 0}, 1);
    const auto agg = aggregate(train);
    const auto scores = slope_scores(agg, valid);
    EXPECT_EQ(scores[0].m1, 1);
    EXPECT_EQ(scores[0].m0, 3);
    EXPECT_EQ(count_unseen_buckets(agg, valid), 2u);
}

TEST(EvaluateIld, SingleClassValidationIsDegenerate) {
    const auto t = synthetic(8, 50);
    ObservationTable valid(2);
    valid.add({0, 0}, 1);
    EXPECT_THROW(evaluate_ild_on_validation(t, valid), DegenerateClassError);
}

TEST(RunTrials, SingleTrialIsComposition) {
    const auto t = synthetic(10, 600);
    const auto s = schema3();
    const auto trials = run_trials(t, s, 1, 77);
    ASSERT_EQ(trials.size(), 1u);
    const auto& r = trials[0];
    const auto parts = split(t, {0.8, 77, false});
    const auto model = fit(parts.train, s);
    EXPECT_EQ(r.seed, 77u);
    EXPECT_DOUBLE_EQ(*r.auc_ild, evaluate_ild_on_validation(parts.train, parts.valid).auc);
    EXPECT_DOUBLE_EQ(*r.auc_nb, nb_roc(model, parts.valid).auc);
    EXPECT_DOUBLE_EQ(*r.auc_diff, *r.auc_ild - *r.auc_nb);
    EXPECT_DOUBLE_EQ(*r.acc_ild, max_accuracy(aggregate(parts.valid)).value);
    EXPECT_DOUBLE_EQ(*r.acc_nb, accuracy_at_threshold(model, parts.valid, best_threshold(model, parts.train).threshold));
    EXPECT_EQ(r.n_buckets_train, aggregate(parts.train).size());
}

TEST(RunTrials, SeedOrderAndReproducibleCsv) {
    const auto t = synthetic(11, 400);
    const auto s = schema3();
    const auto a = run_trials(t, s, 5, 100);
    const auto b = run_trials(t, s, 5, 100);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].seed, 100 + i);
    std::ostringstream oa, ob;
    write_trials_csv(oa, a);
    write_trials_csv(ob, b);
    EXPECT_EQ(oa.str(), ob.str());
    EXPECT_EQ(oa.str().substr(0, oa.str().find('\n')),
              "seed,auc_ild,auc_nb,auc_diff,acc_ild,acc_nb,n_buckets_train,n_unseen_buckets_valid");
}

TEST(RunTrials, DegenerateTrialRecordedAndRunContinues) {
    // Four rows, one positive: some splits put the positive in training only.
    ObservationTable t(2);
    t.add({0, 0}, 0);
    t.add({1, 0}, 0);
    t.add({2, 1}, 0);
    t.add({0, 1}, 1);
    const auto trials = run_trials(t, schema3(), 10, 0, {0.5, 1.0, false});
    ASSERT_EQ(trials.size(), 10u);
    std::size_t undefined = 0;
    for (const auto& r : trials) {
        if (!r.auc_ild) {
            ++undefined;
            EXPECT_FALSE(r.warnings.empty());
            EXPECT_FALSE(r.auc_diff.has_value());
        }
    }
    EXPECT_GT(undefined, 0u);
    std::ostringstream os;
    write_trials_csv(os, trials);
    EXPECT_NE(os.str().find("NA"), std::string::npos);
}

TEST(Summarize, MeanMinMax) {
    std::vector<TrialResult> trials(3);
    trials[0].auc_diff = 0.1;
    trials[1].auc_diff = 0.3;
    const auto s = summarize(trials, [](const TrialResult& r) -> const std::optional<double>& { return r.auc_diff; });
    EXPECT_EQ(s.n, 2u);
    EXPECT_DOUBLE_EQ(s.mean, 0.2);
    EXPECT_DOUBLE_EQ(s.min, 0.1);
    EXPECT_DOUBLE_EQ(s.max, 0.3);
}
