#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sqlcal/errors.hpp"
#include "sqlcal/metrics.hpp"

using namespace sqlcal;
using namespace sqlcal::metrics;
namespace oracle = sqlcal::testkit::oracle;

namespace {

struct Instance {
    std::vector<double> s;
    std::vector<int> y;
};

/// Random scores with deliberate ties and exact bin-edge values.
Instance random_instance(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> edge(0, 10);
    Instance inst;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = unif(rng);
        double s = r < 0.2 ? edge(rng) / 10.0 : r < 0.3 ? std::round(unif(rng) * 20.0) / 20.0 : unif(rng);
        inst.s.push_back(s);
        inst.y.push_back(unif(rng) < s ? 1 : 0);
    }
    return inst;
}

}  // namespace

TEST(Brier, Examples) {
    EXPECT_EQ(brier(std::vector<double>{0, 1, 1, 0}, std::vector<int>{0, 1, 1, 0}), 0.0);
    EXPECT_NEAR(brier(std::vector<double>{0.2, 0.9}, std::vector<int>{0, 1}), 0.025, 1e-15);
    EXPECT_THROW(brier(std::vector<double>{0.2}, std::vector<int>{0, 1}), LengthMismatch);
    EXPECT_THROW(brier(std::vector<double>{}, std::vector<int>{}), EmptyInput);
}

TEST(Brier, ConstantPredictorAtTheBaseRate) {
    // 10,000 labels with mean a exactly; the score is a itself.
    for (auto [a, expected] : {std::pair{0.3585, 0.2300}, std::pair{0.5335, 0.2489}}) {
        const int positives = static_cast<int>(std::lround(a * 10000));
        std::vector<int> y(10000, 0);
        for (int i = 0; i < positives; ++i) y[static_cast<std::size_t>(i)] = 1;
        const std::vector<double> s(10000, a);
        const auto r = evaluate(s, y);
        EXPECT_NEAR(r.brier, a * (1 - a), 1e-12);
        EXPECT_NEAR(r.brier, expected, 1e-4);
        EXPECT_NEAR(r.ece, 0.0, 1e-12);
    }
}

TEST(Ece, FourPointExample) {
    const auto r = ece(std::vector<double>{0.05, 0.15, 0.85, 0.95}, std::vector<int>{0, 0, 1, 1}, 10);
    EXPECT_NEAR(r.value, 0.10, 1e-12);
    ASSERT_EQ(r.bins.size(), 10u);
    EXPECT_EQ(r.bins[0].count, 1u);
    EXPECT_NEAR(r.bins[0].bias, -0.05, 1e-12);
    EXPECT_EQ(r.bins[5].count, 0u);
}

TEST(Ece, SharpPerfectPredictor) {
    const std::vector<double> s = {0, 1, 1, 0, 1};
    const std::vector<int> y = {0, 1, 1, 0, 1};
    const auto r = evaluate(s, y);
    EXPECT_EQ(r.ece, 0.0);
    EXPECT_EQ(r.ace, 0.0);
    EXPECT_EQ(r.brier, 0.0);
    EXPECT_EQ(*r.auc, 1.0);
}

TEST(Ece, ScoreOfOneLandsInTheLastBin) {
    EXPECT_EQ(equal_width_bin(1.0, 10), 9u);
    EXPECT_EQ(equal_width_bin(0.0, 10), 0u);
    EXPECT_EQ(equal_width_bin(0.3, 10), 3u);
    EXPECT_EQ(equal_width_bin(0.7, 10), 7u);
    const auto r = ece(std::vector<double>{1.0}, std::vector<int>{1}, 10);
    EXPECT_EQ(r.bins[9].count, 1u);
}

TEST(Ece, BoundsAreExactFractions) {
    const auto rows = reliability_curve(std::vector<double>{0.5}, std::vector<int>{1}, Binning::EqualWidth, 7);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].lower, static_cast<double>(i) / 7);
        EXPECT_EQ(rows[i].upper, static_cast<double>(i + 1) / 7);
    }
}

TEST(Ace, ConstantScoresAreBoundedBelowByTheBaseRateGap) {
    // Ties split by input index, so per-bin accuracy can differ from the overall mean.
    const std::vector<double> s(23, 0.4);
    std::vector<int> y(23, 0);
    for (int i = 0; i < 9; ++i) y[static_cast<std::size_t>(i * 2)] = 1;
    const auto r = ace(s, y, 10);
    EXPECT_GE(r.value + 1e-15, std::abs(9.0 / 23 - 0.4));
    EXPECT_NEAR(r.value, oracle::weighted_error(oracle::mass_bins(s, y, 10), 23), 1e-15);
}

TEST(Ace, ConstantScoresWithBalancedBinsGiveTheBaseRateGap) {
    const std::vector<double> s(20, 0.4);
    std::vector<int> y(20, 0);
    for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i * 2)] = 1;
    EXPECT_NEAR(ace(s, y, 10).value, 0.1, 1e-12);
}

TEST(Ace, SingletonBinsGiveMeanAbsoluteError) {
    const std::vector<double> s = {0.1, 0.9, 0.3, 0.5, 0.7, 0.2, 0.4, 0.6, 0.8, 0.05};
    const std::vector<int> y = {0, 1, 1, 0, 1, 0, 0, 1, 1, 0};
    double mae = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) mae += std::abs(y[i] - s[i]);
    EXPECT_NEAR(ace(s, y, 10).value, mae / 10, 1e-12);
}

TEST(Ace, RemainderGoesToTheFirstBins) {
    std::vector<double> s(23);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i) / 23;
    const auto rows = ace(s, std::vector<int>(23, 1), 10).bins;
    for (std::size_t b = 0; b < 10; ++b) EXPECT_EQ(rows[b].count, b < 3 ? 3u : 2u) << b;
}

TEST(Auc, Examples) {
    EXPECT_EQ(auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
    EXPECT_EQ(auc(std::vector<double>(6, 0.3), std::vector<int>{0, 1, 0, 1, 1, 0}), 0.5);
    EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), SingleClass);
}

TEST(Auc, InvariantUnderMonotoneMaps) {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const auto inst = random_instance(rng, 150);
        std::vector<double> mapped;
        for (double v : inst.s) mapped.push_back(std::pow(v, 3.0) * 0.5 + 0.1);
        EXPECT_EQ(auc(inst.s, inst.y), auc(mapped, inst.y));
    }
}

TEST(OracleEquivalence, AucEceAceAgreeWithBruteForce) {
    std::mt19937_64 rng(123);
    for (int rep = 0; rep < 50; ++rep) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
        auto inst = random_instance(rng, n);
        inst.y[0] = 0;
        inst.y[1] = 1;
        EXPECT_NEAR(auc(inst.s, inst.y), oracle::pairwise_auc(inst.s, inst.y), 1e-15);
        for (int k : {1, 3, 10, 15}) {
            const auto e = ece(inst.s, inst.y, k);
            const auto a = ace(inst.s, inst.y, k);
            const auto wb = oracle::width_bins(inst.s, inst.y, k);
            const auto mb = oracle::mass_bins(inst.s, inst.y, k);
            ASSERT_NEAR(e.value, oracle::weighted_error(wb, n), 1e-15);
            ASSERT_NEAR(a.value, oracle::weighted_error(mb, n), 1e-15);
            for (std::size_t b = 0; b < static_cast<std::size_t>(k); ++b) {
                ASSERT_EQ(e.bins[b].count, wb[b].count);
                ASSERT_EQ(a.bins[b].count, mb[b].count);
            }
            ASSERT_NEAR(calibration_error(e.bins), e.value, 1e-15);
            ASSERT_NEAR(calibration_error(a.bins), a.value, 1e-15);
        }
    }
}

TEST(Metrics, RangesAndPartition) {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 30; ++rep) {
        const auto inst = random_instance(rng, 97);
        const auto r = evaluate(inst.s, inst.y, 10);
        for (double v : {r.brier, r.ece, r.ace}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        std::size_t we = 0, wa = 0, lo = 1000, hi = 0;
        for (const auto& b : r.bins_ece) {
            we += b.count;
            EXPECT_EQ(b.bias, b.empirical_accuracy - b.mean_score);
        }
        for (const auto& b : r.bins_ace) {
            wa += b.count;
            lo = std::min(lo, b.count);
            hi = std::max(hi, b.count);
        }
        EXPECT_EQ(we, 97u);
        EXPECT_EQ(wa, 97u);
        EXPECT_LE(hi - lo, 1u);
    }
}

TEST(Metrics, RejectsBadInputs) {
    EXPECT_THROW(ece(std::vector<double>{0.5}, std::vector<int>{1}, 0), UsageError);
    EXPECT_THROW(ece(std::vector<double>{1.5}, std::vector<int>{1}, 10), DataError);
}

TEST(CompareShift, IdenticalScoresHaveZeroDeltas) {
    const std::vector<double> s = {0.1, 0.4, 0.8, 0.3};
    const std::vector<int> y = {0, 1, 1, 0};
    const std::vector<double> fr = {0.25, 0.5};
    for (const auto& st : compare_shift(s, s, y, fr)) {
        EXPECT_EQ(st.mean_delta, 0.0);
        EXPECT_EQ(st.mean_a, st.mean_b);
    }
}

TEST(CompareShift, HalfFractionsPartitionEvenInputs) {
    const std::vector<double> a = {0.1, 0.4, 0.8, 0.3, 0.5, 0.5};
    const std::vector<double> b = {0.2, 0.1, 0.9, 0.3, 0.7, 0.4};
    const std::vector<int> y = {0, 1, 1, 0, 1, 0};
    const std::vector<double> fr = {0.5};
    const auto strata = compare_shift(a, b, y, fr);
    ASSERT_EQ(strata.size(), 2u);
    std::vector<int> seen(6, 0);
    for (const auto& st : strata)
        for (auto i : st.members) ++seen[i];
    for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(CompareShift, StratumSizeRoundsUpWithoutFloatingPointDrift) {
    EXPECT_EQ(stratum_size(0.07, 100), 7u);
    EXPECT_EQ(stratum_size(0.01, 50), 1u);
    EXPECT_EQ(stratum_size(0.2, 59), 12u);
    EXPECT_EQ(stratum_size(0.5, 7), 4u);
}

TEST(CompareShift, MatchesSortAndSliceOracle) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif;
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 20 + static_cast<std::size_t>(rep) * 7;
        std::vector<double> a, b;
        std::vector<int> y;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(std::round(unif(rng) * 10) / 10);
            b.push_back(std::round(unif(rng) * 10) / 10);
            y.push_back(unif(rng) < 0.5);
        }
        const std::vector<double> fractions = {0.01, 0.05, 0.1, 0.2, 0.5};
        const auto strata = compare_shift(a, b, y, fractions);
        ASSERT_EQ(strata.size(), 10u);
        for (const auto& st : strata) {
            const auto ref = oracle::shift_stratum(a, b, y, stratum_size(st.fraction, n), st.side == "top");
            ASSERT_EQ(st.members, ref.members);
            ASSERT_NEAR(st.mean_delta, ref.mean_delta, 1e-12);
            ASSERT_NEAR(st.accuracy, ref.accuracy, 1e-12);
        }
    }
    EXPECT_THROW(compare_shift(std::vector<double>{0.1}, std::vector<double>{0.2}, std::vector<int>{1},
                               std::vector<double>{0.6}),
                 UsageError);
    EXPECT_THROW(compare_shift(std::vector<double>{0.1}, std::vector<double>{0.2, 0.3}, std::vector<int>{1},
                               std::vector<double>{0.1}),
                 LengthMismatch);
}
