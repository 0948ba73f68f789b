#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "ast_gen.hpp"
#include "oracles.hpp"
#include "sqlcal/errors.hpp"
#include "sqlcal/scf.hpp"
#include "sqlcal/sql/parser.hpp"

using namespace sqlcal;
using namespace sqlcal::scf;
using sql::ClauseKind;
using sql::parse_sql;
using sql::QueryTree;

namespace oracle = sqlcal::testkit::oracle;

namespace {

int total(std::span<const std::uint8_t> v) { return std::accumulate(v.begin(), v.end(), 0); }

std::vector<int> as_ints(const MatchVector& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(SqMatch, BothNoneMatchEverywhere) {
    const auto m = sq_match(static_cast<const QueryTree*>(nullptr), static_cast<const QueryTree*>(nullptr));
    for (auto v : m) EXPECT_EQ(v, 1);
}

TEST(SqMatch, OneSidedNoneMatchesNothing) {
    const auto q = parse_sql("select a from b");
    for (auto v : sq_match(&q, static_cast<const QueryTree*>(nullptr))) EXPECT_EQ(v, 0);
    for (auto v : sq_match(static_cast<const QueryTree*>(nullptr), &q)) EXPECT_EQ(v, 0);
}

TEST(SqMatch, MissingWhereIsTheOnlyMismatch) {
    const auto a = parse_sql("select a from b");
    const auto b = parse_sql("select a from b where c > 1");
    const auto m = sq_match(&a, &b);
    for (auto c : sql::kAllClauses)
        EXPECT_EQ(m[static_cast<std::size_t>(c)], c == ClauseKind::Where ? 0 : 1) << sql::to_string(c);
}

TEST(TraverseAndMatch, IdenticalLeaves) {
    const auto a = parse_sql("select a from b where x = 1");
    EXPECT_EQ(traverse_and_match(ClauseKind::Where, a, a), 1);
}

TEST(TraverseAndMatch, LeafAgainstNodeIsAShapeMismatch) {
    const auto a = parse_sql("select a from b where x = 1");
    const auto b = parse_sql("select a from b where x = 1 union select a from b where x = 1");
    EXPECT_EQ(traverse_and_match(ClauseKind::Where, a, b), 0);
    EXPECT_EQ(traverse_and_match(ClauseKind::Where, b, a), 0);
}

TEST(TraverseAndMatch, CrossedChildPairing) {
    const auto a = parse_sql("select a from t union select b from t");
    const auto b = parse_sql("select b from t union select a from t");
    EXPECT_EQ(traverse_and_match(ClauseKind::Select, a, b), 1);
    EXPECT_EQ(oracle::clause_matches(ClauseKind::Select, a, b), true);
}

TEST(TraverseAndMatch, PairingIsChosenPerClause) {
    // SELECT matches only when crossed, WHERE only when straight.
    const auto a = parse_sql("select a from t where x = 1 union select b from t where x = 2");
    const auto b = parse_sql("select b from t where x = 1 union select a from t where x = 2");
    EXPECT_EQ(traverse_and_match(ClauseKind::Select, a, b), 1);
    EXPECT_EQ(traverse_and_match(ClauseKind::Where, a, b), 1);
}

TEST(TraverseAndMatch, IgnoresInnerSetOperators) {
    const auto a = parse_sql("select a from t union select b from t");
    const auto b = parse_sql("select a from t except select b from t");
    EXPECT_EQ(traverse_and_match(ClauseKind::Select, a, b), 1);
}

TEST(QMatch, SelfMatchIsAllOnes) {
    testkit::AstGenerator gen(11);
    for (int i = 0; i < 200; ++i) {
        const auto q = gen.query();
        for (auto v : q_match(q, q)) ASSERT_EQ(v, 1);
    }
}

TEST(QMatch, LeafAgainstUnion) {
    const auto a = parse_sql("select a from b");
    const auto b = parse_sql("select a from b union select c from d");
    const auto v = q_match(a, b);
    const auto brute = oracle::query_match(a, b);
    EXPECT_EQ(v[0], 0);
    for (std::size_t i = 10; i < 19; ++i) EXPECT_EQ(v[i], 0) << i;
    for (std::size_t i = 1; i < 10; ++i) EXPECT_EQ(v[i], 1) << i;
    EXPECT_EQ(as_ints(v), brute.chosen);
    EXPECT_TRUE(brute.chose_straight);
}

TEST(QMatch, PrefersTheCrossedPairingWhenItMatchesMore) {
    const auto a = parse_sql("select a from t union select b from u");
    const auto b = parse_sql("select b from u union select a from t");
    const auto m = q_match_detailed(prepare(a), prepare(b));
    EXPECT_EQ(m.pairing, Pairing::Crossed);
    EXPECT_EQ(total(m.vector), 19);
}

TEST(QMatch, TiesKeepTheStraightPairing) {
    const auto a = parse_sql("select a from t union select b from t");
    const auto b = parse_sql("select c from t union select d from t");
    EXPECT_EQ(q_match_detailed(prepare(a), prepare(b)).pairing, Pairing::Straight);
}

TEST(QMatch, AgreesWithExhaustivePairingOracle) {
    testkit::AstGenerator gen(99, {.small_vocab = true});
    int crossed = 0;
    for (int i = 0; i < 500; ++i) {
        const auto a = gen.query();
        const auto b = gen.query();
        const auto m = q_match_detailed(prepare(a), prepare(b));
        const auto brute = oracle::query_match(a, b);
        ASSERT_EQ(as_ints(m.vector), brute.chosen) << sql::canonicalize(a) << "  vs  " << sql::canonicalize(b);
        ASSERT_EQ(m.pairing == Pairing::Straight, brute.chose_straight);
        const int chosen = std::accumulate(brute.chosen.begin(), brute.chosen.end(), 0);
        ASSERT_GE(chosen, std::accumulate(brute.straight.begin(), brute.straight.end(), 0));
        ASSERT_GE(chosen, std::accumulate(brute.crossed.begin(), brute.crossed.end(), 0));
        crossed += m.pairing == Pairing::Crossed;
    }
    EXPECT_GT(crossed, 0) << "generator never exercised the crossed pairing";
}

TEST(QMatch, MatchCountIsSymmetric) {
    testkit::AstGenerator gen(5, {.small_vocab = true});
    for (int i = 0; i < 500; ++i) {
        const auto a = gen.query();
        const auto b = gen.query();
        ASSERT_EQ(total(q_match(a, b)), total(q_match(b, a)));
    }
}

TEST(ScfScore, SingletonSelfPool) {
    const auto q = parse_sql("select a from b where c = 1");
    const std::vector<QueryTree> pool{q};
    const auto s = scf_score(q, pool);
    for (double f : s.frequencies) EXPECT_EQ(f, 1.0);
    EXPECT_EQ(s.aggregate, 1.0);
}

TEST(ScfScore, WhereFrequencyOfThreeInFour) {
    const auto q = parse_sql("select a from b where c = 1");
    const std::vector<QueryTree> pool{q, parse_sql("select a from b where c = 1"), parse_sql("select a from b where c = 2"),
                                      parse_sql("SELECT A FROM B WHERE C = 1")};
    const auto s = scf_score(q, pool);
    const auto names = match_names();
    for (std::size_t i = 0; i < kMatchLength; ++i)
        EXPECT_DOUBLE_EQ(s.frequencies[i], names[i] == "q1.where" ? 0.75 : 1.0) << names[i];
    EXPECT_DOUBLE_EQ(s.aggregate, 0.75);
}

TEST(ScfScore, EmptyPoolThrows) {
    const auto q = parse_sql("select a from b");
    EXPECT_THROW(scf_score(q, std::span<const QueryTree>{}), EmptyPool);
}

TEST(ScfScore, MatchNamesFollowTheVectorLayout) {
    const auto names = match_names();
    EXPECT_EQ(names[0], "set_op");
    EXPECT_EQ(names[1], "q1.distinct");
    EXPECT_EQ(names[6], "q1.group_by");
    EXPECT_EQ(names[10], "q2.distinct");
    EXPECT_EQ(names[18], "q2.limit");
}

TEST(ScfProperties, SelfConsistencyBoundednessProductAndGrowth) {
    testkit::AstGenerator gen(2024, {.small_vocab = true});
    std::vector<QueryTree> queries;
    for (int i = 0; i < 1000; ++i) queries.push_back(gen.query());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& q = queries[i];
        const std::vector<QueryTree> copies(3, q);
        const auto self = scf_score(q, copies);
        for (double f : self.frequencies) ASSERT_EQ(f, 1.0);
        ASSERT_EQ(self.aggregate, 1.0);

        std::vector<QueryTree> pool;
        for (std::size_t k = 1; k <= 5; ++k) pool.push_back(queries[(i + k * 37) % queries.size()]);
        const auto s = scf_score(q, pool);
        double product = 1.0;
        for (double f : s.frequencies) {
            ASSERT_GE(f, 0.0);
            ASSERT_LE(f, 1.0);
            product *= f;
        }
        ASSERT_DOUBLE_EQ(s.aggregate, product);
        ASSERT_GE(s.aggregate, 0.0);
        ASSERT_LE(s.aggregate, 1.0);

        pool.push_back(q);
        const auto grown = scf_score(q, pool);
        for (std::size_t k = 0; k < kMatchLength; ++k) ASSERT_GE(grown.frequencies[k], s.frequencies[k]);
    }
}
