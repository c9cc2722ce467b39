#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "topicstab/agreement.hpp"
#include "topicstab/hungarian.hpp"
#include "topicstab/ranking.hpp"

namespace {

// Shuffled index lists of the given length over a vocabulary 10x larger,
// mimicking top-t topic rankings with partial overlap.
std::pair<std::vector<int>, std::vector<int>> ranking_pair(int t, unsigned seed) {
    std::mt19937 gen(seed);
    std::vector<int> pool(static_cast<std::size_t>(t) * 10);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), gen);
    std::vector<int> a(pool.begin(), pool.begin() + t);
    std::shuffle(pool.begin(), pool.end(), gen);
    std::vector<int> b(pool.begin(), pool.begin() + t);
    return {std::move(a), std::move(b)};
}

void BM_AverageJaccard(benchmark::State& state) {
    const int t = static_cast<int>(state.range(0));
    auto [a, b] = ranking_pair(t, 42);
    for (auto _ : state)
        benchmark::DoNotOptimize(topicstab::average_jaccard(a, b, t));
    state.SetComplexityN(t);
}

void BM_AgreementScore(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    const int t = 20;
    topicstab::RankingSet lhs, rhs;
    lhs.depth = rhs.depth = t;
    for (int i = 0; i < k; ++i) {
        auto [a, b] = ranking_pair(t, 1000u + static_cast<unsigned>(i));
        lhs.topics.push_back(std::move(a));
        rhs.topics.push_back(std::move(b));
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(topicstab::agree(lhs, rhs));
}

void BM_MinCostAssignment(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd cost(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) cost(i, j) = unif(gen);
    for (auto _ : state)
        benchmark::DoNotOptimize(topicstab::min_cost_assignment(cost));
}

}  // namespace

BENCHMARK(BM_AverageJaccard)->RangeMultiplier(2)->Range(10, 160)->Complexity();
BENCHMARK(BM_AgreementScore)->DenseRange(4, 12, 4);
BENCHMARK(BM_MinCostAssignment)->RangeMultiplier(2)->Range(8, 64);
