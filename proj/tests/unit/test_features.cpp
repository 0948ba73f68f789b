#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "sqlcal/errors.hpp"
#include "sqlcal/features.hpp"
#include "sqlcal/prob.hpp"
#include "sqlcal/sql/parser.hpp"

using namespace sqlcal;
using sql::parse_sql;
using sql::QueryTree;

namespace {

using TreePools = std::map<Source, std::vector<QueryTree>>;

}  // namespace

TEST(Prob, ClipAndLogit) {
    EXPECT_EQ(clip_probability(0.0), kProbEpsilon);
    EXPECT_EQ(clip_probability(1.0), 1.0 - kProbEpsilon);
    EXPECT_EQ(clip_probability(0.3), 0.3);
    EXPECT_NEAR(logit(0.5), 0.0, 1e-15);
    EXPECT_NEAR(sigmoid(logit(0.2)), 0.2, 1e-15);
    EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
    EXPECT_EQ(sigmoid(800.0), 1.0);
}

TEST(Prob, LogitOfClippedCertaintyMatchesHighPrecisionOracle) {
    // ln(p / (1 - p)) for p = 1 - 1e-12 rounded to double, evaluated at 40 digits.
    EXPECT_NEAR(logit(probability_from_log(0.0)), 27.63104323789236, 1e-9);
    EXPECT_NEAR(logit(probability_from_log(-1e6)), -27.631021115927548, 1e-9);
}

TEST(Schema, KnownLayouts) {
    EXPECT_EQ(FeatureSchema::parse("ps").size(), 1u);
    EXPECT_EQ(FeatureSchema::parse("mps-nucleus").size(), 21u);
    EXPECT_EQ(FeatureSchema::parse("mps-beam").size(), 21u);
    EXPECT_EQ(FeatureSchema::parse("mps-nb").size(), 41u);
    EXPECT_THROW(FeatureSchema::parse("mps-all"), SchemaMismatch);
}

TEST(Schema, ExtrasExtendTheIdAndLayout) {
    const auto s = FeatureSchema::parse("mps-nb+ptrue+ppl");
    EXPECT_EQ(s.id(), "mps-nb+ptrue+ppl");
    EXPECT_EQ(s.size(), 43u);
    const auto names = s.feature_names();
    EXPECT_EQ(names.front(), "logit_prob");
    EXPECT_EQ(names[1], "nucleus.set_op");
    EXPECT_EQ(names[20], "nucleus.aggregate");
    EXPECT_EQ(names[21], "beam.set_op");
    EXPECT_EQ(names[40], "beam.aggregate");
    EXPECT_EQ(names[41], "extra.ptrue");
    EXPECT_THROW(FeatureSchema::parse("ps+"), SchemaMismatch);
}

TEST(AssembleFeatures, NucleusSingletonSelfPool) {
    const auto q = parse_sql("select a from b where c = 1");
    const auto f = assemble_features(q, std::log(0.25), TreePools{{Source::Nucleus, {q}}},
                                     FeatureSchema::parse("mps-nucleus"));
    ASSERT_EQ(f.values.size(), 21u);
    EXPECT_NEAR(f.values[0], std::log(0.25 / 0.75), 1e-12);
    for (std::size_t i = 1; i < 21; ++i) EXPECT_EQ(f.values[i], 1.0);
}

TEST(AssembleFeatures, NucleusAndBeamGiveFortyOneValues) {
    const auto q = parse_sql("select a from b");
    const auto other = parse_sql("select a from b where x = 1");
    const auto f = assemble_features(q, -0.5, TreePools{{Source::Nucleus, {q, other}}, {Source::Beam, {other}}},
                                     FeatureSchema::parse("mps-nb"));
    ASSERT_EQ(f.values.size(), 41u);
    EXPECT_EQ(f.schema_id, "mps-nb");
    EXPECT_DOUBLE_EQ(f.values[1 + 5], 0.5);   // nucleus q1.where
    EXPECT_DOUBLE_EQ(f.values[21 + 5], 0.0);  // beam q1.where
    EXPECT_DOUBLE_EQ(f.values[40], 0.0);      // beam aggregate
}

TEST(AssembleFeatures, ZeroLogProbabilityIsClipped) {
    const auto q = parse_sql("select a from b");
    const auto f = assemble_features(q, 0.0, TreePools{}, FeatureSchema::parse("ps"));
    ASSERT_EQ(f.values.size(), 1u);
    EXPECT_NEAR(f.values[0], 27.63104323789236, 1e-9);
    EXPECT_TRUE(std::isfinite(f.values[0]));
}

TEST(AssembleFeatures, MissingPoolIsASchemaMismatch) {
    const auto q = parse_sql("select a from b");
    EXPECT_THROW(assemble_features(q, -1.0, TreePools{{Source::Nucleus, {q}}}, FeatureSchema::parse("mps-nb")),
                 SchemaMismatch);
    EXPECT_THROW(assemble_features(q, -1.0, TreePools{{Source::Beam, {}}}, FeatureSchema::parse("mps-beam")),
                 EmptyPool);
}

TEST(AssembleFeatures, ExtrasAppendAfterTheStandardLayout) {
    const auto q = parse_sql("select a from b");
    const auto schema = FeatureSchema::parse("ps+ptrue");
    const auto f = assemble_features(q, -1.0, TreePools{}, schema, {{"ptrue", 0.8}});
    ASSERT_EQ(f.values.size(), 2u);
    EXPECT_EQ(f.values[1], 0.8);
    EXPECT_THROW(assemble_features(q, -1.0, TreePools{}, schema), SchemaMismatch);
    EXPECT_THROW(assemble_features(q, -1.0, TreePools{}, schema,
                                   {{"ptrue", std::numeric_limits<double>::quiet_NaN()}}),
                 NonFinite);
}
