#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "support/builders.hpp"
#include "support/oracles.hpp"
#include "topicstab/agreement.hpp"
#include "topicstab/hungarian.hpp"
#include "topicstab/rng.hpp"

using topicstab::agree;
using topicstab::best_match;
using topicstab::RankingSet;
using topicstab::similarity_matrix;

namespace {

RankingSet make_set(std::vector<std::vector<int>> topics, int depth) {
    RankingSet s;
    s.topics = std::move(topics);
    s.depth = depth;
    return s;
}

} // namespace

TEST_CASE("similarity matrix basics") {
    SUBCASE("self-comparison of disjoint topics is the identity pattern") {
        const auto s = make_set({{0, 1}, {2, 3}, {4, 5}}, 2);
        const Eigen::MatrixXd m = similarity_matrix(s, s);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(m(i, j) == (i == j ? 1.0 : 0.0));
    }
    SUBCASE("k=1 reduces to a single average-jaccard score") {
        const auto sx = make_set({{0, 1}}, 2);
        const auto sy = make_set({{1, 0}}, 2);
        const Eigen::MatrixXd m = similarity_matrix(sx, sy);
        CHECK(m.rows() == 1);
        CHECK(m(0, 0) == doctest::Approx(0.5));
    }
    SUBCASE("crossed pairs produce the anti-diagonal") {
        const auto sx = make_set({{0, 1}, {2, 3}}, 2);
        const auto sy = make_set({{2, 3}, {0, 1}}, 2);
        const Eigen::MatrixXd m = similarity_matrix(sx, sy);
        CHECK(m(0, 0) == 0.0);
        CHECK(m(0, 1) == 1.0);
        CHECK(m(1, 0) == 1.0);
        CHECK(m(1, 1) == 0.0);
    }
    SUBCASE("mismatched shapes are rejected") {
        const auto two = make_set({{0}, {1}}, 1);
        const auto three = make_set({{0}, {1}, {2}}, 1);
        CHECK_THROWS_AS(similarity_matrix(two, three), std::invalid_argument);
        const auto deep = make_set({{0}, {1}}, 3);
        CHECK_THROWS_AS(similarity_matrix(two, deep), std::invalid_argument);
    }
}

TEST_CASE("best match on small matrices") {
    SUBCASE("identity similarity yields the identity permutation") {
        const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
        CHECK(best_match(m) == std::vector<int>{0, 1, 2, 3});
    }
    SUBCASE("anti-diagonal similarity yields the swap") {
        Eigen::MatrixXd m(2, 2);
        m << 0, 1, 1, 0;
        CHECK(best_match(m) == std::vector<int>{1, 0});
    }
    SUBCASE("ties resolve to the lexicographically smallest permutation") {
        CHECK(best_match(Eigen::MatrixXd::Constant(3, 3, 0.7)) ==
              std::vector<int>{0, 1, 2});
        // Two optimal matchings: (0->0,1->1) and (0->1,1->0), both total 1.
        Eigen::MatrixXd m(2, 2);
        m << 0.5, 0.5, 0.5, 0.5;
        CHECK(best_match(m) == std::vector<int>{0, 1});
    }
}

TEST_CASE("best match equals the exhaustive optimum on random matrices") {
    topicstab::Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd m(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) m(i, j) = rng.next_open01();
        const auto [oracle_value, oracle_perm] = testsupport::exhaustive_best_match(m);
        const std::vector<int> got = best_match(m);
        double total = 0.0;
        for (int i = 0; i < 6; ++i) total += m(i, got[static_cast<std::size_t>(i)]);
        CHECK(total == doctest::Approx(oracle_value).epsilon(1e-12));
        CHECK(got == oracle_perm); // unique optimum almost surely
    }
}

TEST_CASE("low-level assignment solver validates input") {
    CHECK_THROWS_AS(topicstab::min_cost_assignment(Eigen::MatrixXd::Zero(2, 3)),
                    std::invalid_argument);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(topicstab::min_cost_assignment(bad), std::invalid_argument);
}

TEST_CASE("agreement scores") {
    SUBCASE("identical models score exactly one") {
        const auto s = make_set({{0, 1}, {2, 3}}, 2);
        CHECK(agree(s, s).score == 1.0);
    }
    SUBCASE("topic reordering is absorbed by the matching") {
        const auto sx = make_set({{0, 1}, {2, 3}}, 2);
        const auto sy = make_set({{2, 3}, {0, 1}}, 2);
        const auto result = agree(sx, sy);
        CHECK(result.score == doctest::Approx(1.0));
        CHECK(result.permutation == std::vector<int>{1, 0});
    }
    SUBCASE("half-overlapping models score one half") {
        const auto sx = make_set({{0, 1}, {2, 3}}, 2);
        const auto sy = make_set({{0, 1}, {4, 5}}, 2);
        CHECK(agree(sx, sy).score == doctest::Approx(0.5));
    }
}

TEST_CASE("agreement is invariant under topic permutation") {
    topicstab::Rng rng(55);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(5));
        const int t = 2 + static_cast<int>(rng.next_below(6));
        const auto sx = testsupport::random_ranking_set(rng, k, 30, t);
        const auto sy = testsupport::random_ranking_set(rng, k, 30, t);
        const double base = agree(sx, sy).score;

        RankingSet shuffled = sy;
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(rng.next_below(
                                   static_cast<std::uint64_t>(k - i)));
            std::swap(shuffled.topics[static_cast<std::size_t>(i)],
                      shuffled.topics[static_cast<std::size_t>(j)]);
        }
        CHECK(agree(sx, shuffled).score == doctest::Approx(base).epsilon(1e-12));
        CHECK(agree(sy, sx).score == doctest::Approx(base).epsilon(1e-12));
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
    }
}

TEST_CASE("breaking a matched pair never raises the score") {
    topicstab::Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(4));
        const int t = 3;
        // Universe small enough for genuine overlaps.
        const auto sx = testsupport::random_ranking_set(rng, k, 12, t);
        auto sy = sx;
        const double before = agree(sx, sy).score;

        // Replace one topic of sy with terms entirely outside the universe.
        const int victim = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k)));
        sy.topics[static_cast<std::size_t>(victim)] = {100, 101, 102};
        const double after = agree(sx, sy).score;
        CHECK(after <= before + 1e-12);
    }
}

TEST_CASE("json rendering carries matrix, matching and score") {
    const auto sx = make_set({{0, 1}, {2, 3}}, 2);
    const auto sy = make_set({{2, 3}, {0, 1}}, 2);
    const std::string json = topicstab::to_json_string(agree(sx, sy));
    CHECK(json.find("\"similarity\"") != std::string::npos);
    CHECK(json.find("\"matching\"") != std::string::npos);
    CHECK(json.find("\"score\"") != std::string::npos);
    CHECK(json.find("1.0") != std::string::npos);
}
