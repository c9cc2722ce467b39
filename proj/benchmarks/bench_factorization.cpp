#include <benchmark/benchmark.h>

#include <vector>

#include "topicstab/corpus.hpp"
#include "topicstab/factorization.hpp"
#include "topicstab/rng.hpp"

namespace {

// Sparse nonnegative matrix with roughly 5% fill, the shape of a small
// TF-IDF corpus slice.
topicstab::DocTermMatrix random_corpus(Eigen::Index terms, Eigen::Index docs,
                                       std::uint64_t seed) {
    topicstab::Rng rng(seed);
    std::vector<Eigen::Triplet<double>> cells;
    std::vector<std::string> vocab;
    vocab.reserve(static_cast<std::size_t>(terms));
    for (Eigen::Index r = 0; r < terms; ++r) vocab.push_back("t" + std::to_string(r));
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(docs));
    for (Eigen::Index c = 0; c < docs; ++c) {
        ids.push_back("d" + std::to_string(c));
        const Eigen::Index nnz = 5 + static_cast<Eigen::Index>(rng.next_below(15));
        for (Eigen::Index e = 0; e < nnz; ++e) {
            const auto r = static_cast<Eigen::Index>(
                rng.next_below(static_cast<std::uint64_t>(terms)));
            cells.emplace_back(r, c, rng.next_open01() + 0.05);
        }
        // Spread guaranteed hits across documents so no term row stays empty
        // (the deterministic initialization rejects unused terms).
        for (Eigen::Index r = c % terms; r < terms; r += docs)
            cells.emplace_back(r, c, rng.next_open01() + 0.05);
    }
    Eigen::SparseMatrix<double> m(terms, docs);
    m.setFromTriplets(cells.begin(), cells.end());
    return topicstab::DocTermMatrix(topicstab::Vocabulary(std::move(vocab)),
                                    std::move(ids), std::move(m), false);
}

void BM_NmfRandomInit(benchmark::State& state) {
    const auto docs = state.range(0);
    const auto corpus = random_corpus(200, docs, 11);
    for (auto _ : state) {
        auto f = topicstab::nmf(corpus, 5, topicstab::InitStrategy::RandomUniform,
                                30, 1e-5, 99);
        benchmark::DoNotOptimize(f.final_error());
    }
}

void BM_NndsvdInit(benchmark::State& state) {
    const auto docs = state.range(0);
    const auto corpus = random_corpus(200, docs, 13);
    for (auto _ : state) {
        auto init = topicstab::nndsvd_init(corpus, 5);
        benchmark::DoNotOptimize(init.first.sum());
    }
}

}  // namespace

BENCHMARK(BM_NmfRandomInit)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NndsvdInit)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);
