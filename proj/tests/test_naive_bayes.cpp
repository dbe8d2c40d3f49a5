#include <gtest/gtest.h>

#include <cmath>

#include "ild/bucketizer.hpp"
#include "ild/core.hpp"
#include "ild/naive_bayes.hpp"
#include "ild/random.hpp"

using namespace ild;

namespace {

FeatureSchema one_binary() { return FeatureSchema({{"f", FeatureKind::categorical, {"0", "1"}, {}}}, "y"); }

ObservationTable toy() {
    ObservationTable t(1);
    t.add({0}, 0);
    t.add({0}, 0);
    t.add({1}, 1);
    t.add({1}, 0);
    return t;
}

FeatureSchema wide_schema() {
    return FeatureSchema({{"a", FeatureKind::categorical, {"x", "y", "z"}, {}},
                          {"b", FeatureKind::binned, {}, {1.0}},
                          {"c", FeatureKind::categorical, {"0", "1"}, {}}},
                         "t");
}

ObservationTable random_table(Rng& rng, const FeatureSchema& s, std::size_t rows) {
    ObservationTable t(s.size());
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<Code> codes;
        for (const auto& f : s.features()) codes.push_back(static_cast<Code>(rng.uniform_below(f.code_space())));
        // Label correlated with the first feature so the model has signal.
        const int y = rng.uniform_below(4) < (codes[0] == 0 ? 3u : 1u) ? 1 : 0;
        t.add(std::move(codes), y);
    }
    return t;
}

}  // namespace

TEST(Fit, ToyCountsWithLaplaceSmoothing) {
    const auto m = fit(toy(), one_binary(), 1.0);
    EXPECT_DOUBLE_EQ(m.prior, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.cond[0][1][1], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.cond[0][1][0], 2.0 / 5.0);
    EXPECT_FALSE(m.sentinel_seen[0]);
}

TEST(Fit, PerfectCorrelationWithoutSmoothing) {
    ObservationTable t(1);
    t.add({0}, 0);
    t.add({1}, 1);
    t.add({1}, 1);
    const auto m = fit(t, one_binary(), 0.0);
    EXPECT_DOUBLE_EQ(m.cond[0][1][1], 1.0);
    EXPECT_DOUBLE_EQ(m.cond[0][1][0], 0.0);
    EXPECT_DOUBLE_EQ(score(m, std::vector<Code>{1}), 1.0);
    EXPECT_DOUBLE_EQ(score(m, std::vector<Code>{0}), 0.0);
}

TEST(Fit, ConditionalsSumToOne) {
    Rng rng(6);
    const auto s = wide_schema();
    for (double alpha : {0.0, 0.5, 1.0, 3.0}) {
        const auto m = fit(random_table(rng, s, 200), s, alpha);
        for (std::size_t f = 0; f < m.n_features(); ++f) {
            for (int y = 0; y < 2; ++y) {
                double sum = 0.0;
                for (const auto& p : m.cond[f]) sum += p[y];
                EXPECT_NEAR(sum, 1.0, 1e-12);
            }
        }
        if (alpha > 0) {
            EXPECT_GT(m.prior, 0.0);
            EXPECT_LT(m.prior, 1.0);
        }
    }
}

TEST(Fit, RejectsBadInput) {
    EXPECT_THROW(fit(ObservationTable(1), one_binary()), ContractViolation);
    EXPECT_THROW(fit(toy(), one_binary(), -1.0), ContractViolation);
}

TEST(Score, ToyPosteriorMatchesJointEnumeration) {
    const auto m = fit(toy(), one_binary(), 1.0);
    EXPECT_NEAR(score(m, std::vector<Code>{1}), 5.0 / 11.0, 1e-15);
    EXPECT_NEAR(score(m, std::vector<Code>{0}), 5.0 / 23.0, 1e-15);
}

TEST(Score, UniformConditionalsReturnPrior) {
    NbModel m;
    m.prior = 0.3;
    m.feature_names = {"a", "b"};
    m.cond = {{{0.5, 0.5}, {0.5, 0.5}, {0.0, 0.0}}, {{0.25, 0.25}, {0.25, 0.25}, {0.25, 0.25}, {0.25, 0.25}}};
    m.sentinel_seen = {false, true};
    for (Code a = 0; a < 2; ++a) {
        for (Code b = 0; b < 4; ++b) EXPECT_NEAR(score(m, std::vector<Code>{a, b}), 0.3, 1e-15);
    }
}

TEST(Score, OutOfRangeCodeIsContractViolation) {
    const auto m = fit(toy(), one_binary());
    EXPECT_THROW(score(m, std::vector<Code>{3}), ContractViolation);
    EXPECT_THROW(score(m, std::vector<Code>{0, 0}), ContractViolation);
}

TEST(Score, UnseenSentinelIsMarginalized) {
    const auto m = fit(toy(), one_binary());
    EXPECT_DOUBLE_EQ(score(m, std::vector<Code>{2}), m.prior);
}

TEST(Score, StrictlyInsideUnitIntervalWithSmoothing) {
    Rng rng(9);
    const auto s = wide_schema();
    const auto t = random_table(rng, s, 100);
    const auto m = fit(t, s, 1.0);
    for (const auto& obs : t) {
        const double p = score(m, obs.codes);
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
    }
}

TEST(Score, InvariantUnderJointFeaturePermutation) {
    Rng rng(12);
    const auto s = wide_schema();
    const auto t = random_table(rng, s, 150);
    const auto m = fit(t, s, 1.0);
    const std::vector<std::size_t> perm{2, 0, 1};
    NbModel pm = m;
    for (std::size_t k = 0; k < perm.size(); ++k) {
        pm.cond[k] = m.cond[perm[k]];
        pm.sentinel_seen[k] = m.sentinel_seen[perm[k]];
        pm.feature_names[k] = m.feature_names[perm[k]];
    }
    for (const auto& obs : t) {
        std::vector<Code> px(perm.size());
        for (std::size_t k = 0; k < perm.size(); ++k) px[k] = obs.codes[perm[k]];
        EXPECT_NEAR(score(m, obs.codes), score(pm, px), 1e-14);
    }
}

TEST(NbRoc, MonotoneAndBelowIldCeiling) {
    Rng rng(21);
    const auto s = wide_schema();
    for (int iter = 0; iter < 30; ++iter) {
        const auto train = random_table(rng, s, 120);
        const auto eval = random_table(rng, s, 80);
        const auto m = fit(train, s, 1.0);
        const auto c = nb_roc(m, eval);
        for (std::size_t k = 1; k < c.points.size(); ++k) {
            EXPECT_GE(c.points[k].fpr, c.points[k - 1].fpr);
            EXPECT_GE(c.points[k].tpr, c.points[k - 1].tpr);
        }
        EXPECT_LE(c.exact_auc, ild_curve(aggregate(eval)).exact_auc);
    }
}

TEST(BestThreshold, LabelsAsScores) {
    const std::vector<double> s{0.0, 1.0, 1.0, 0.0};
    const std::vector<std::uint8_t> y{0, 1, 1, 0};
    const auto c = best_threshold(std::span<const double>(s), std::span<const std::uint8_t>(y));
    EXPECT_DOUBLE_EQ(c.threshold, 1.0);
    EXPECT_DOUBLE_EQ(c.accuracy, 1.0);
}

TEST(BestThreshold, TiesGoToSmallerThreshold) {
    // Cut points 0.9 and 0.5 both classify 3 of 4 correctly.
    const std::vector<double> s{0.9, 0.8, 0.5, 0.2};
    const std::vector<std::uint8_t> y{1, 0, 1, 0};
    const auto c = best_threshold(std::span<const double>(s), std::span<const std::uint8_t>(y));
    EXPECT_DOUBLE_EQ(c.threshold, 0.5);
    EXPECT_DOUBLE_EQ(c.accuracy, 0.75);
}

TEST(BestThreshold, ToyMatchesExhaustiveSearch) {
    const auto m = fit(toy(), one_binary(), 1.0);
    const auto scores = score_all(m, toy());
    double best_t = 0.0;
    double best_acc = -1.0;
    for (double t : scores) {
        const double acc = accuracy_at_threshold(m, toy(), t);
        if (acc > best_acc || (acc == best_acc && t < best_t)) {
            best_acc = acc;
            best_t = t;
        }
    }
    const auto c = best_threshold(m, toy());
    EXPECT_DOUBLE_EQ(c.threshold, best_t);
    EXPECT_DOUBLE_EQ(c.accuracy, best_acc);
    EXPECT_NEAR(c.threshold, 5.0 / 11.0, 1e-15);
    EXPECT_DOUBLE_EQ(c.accuracy, 0.75);
}

TEST(ModelJson, RoundTrip) {
    Rng rng(2);
    const auto s = wide_schema();
    const auto t = random_table(rng, s, 50);
    const auto m = fit(t, s, 0.5);
    const auto back = model_from_json(nlohmann::ordered_json::parse(model_to_json(m).dump()));
    for (const auto& obs : t) EXPECT_DOUBLE_EQ(score(back, obs.codes), score(m, obs.codes));
    EXPECT_EQ(back.alpha, 0.5);
}
