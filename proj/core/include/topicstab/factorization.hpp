#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "topicstab/corpus.hpp"

namespace topicstab {

enum class InitStrategy {
    RandomUniform, // seeded uniform (0,1) entries; used for sample runs
    Nndsvd,        // deterministic SVD-based init; used for reference runs
};

std::string to_string(InitStrategy init);

/// Rank-k non-negative factorization A ~= W * H. Columns of W are topics
/// over terms, rows of H are per-document memberships. error_trace[0] is the
/// reconstruction error of the initial factors, followed by one entry per
/// outer iteration; the trace never increases beyond numerical noise.
struct Factorization {
    Eigen::MatrixXd W; // m x k
    Eigen::MatrixXd H; // k x n
    std::vector<double> error_trace;
    int iterations = 0;
    bool converged = false;

    int k() const { return static_cast<int>(W.cols()); }
    double final_error() const { return error_trace.back(); }
};

/// A topic model reduced to its term rankings: one descending-weight list of
/// term indices per topic, truncated at `depth`. Lists can be shorter than
/// depth when a basis vector has fewer strictly-positive weights.
struct RankingSet {
    std::vector<std::vector<int>> topics;
    int depth = 0;

    int k() const { return static_cast<int>(topics.size()); }
};

/// W0 (m x k) and H0 (k x n) with entries uniform in the open interval
/// (0,1), drawn from the portable generator. Deterministic given seed: W0 is
/// filled column by column, then H0.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> random_init(Eigen::Index m,
                                                        Eigen::Index n, int k,
                                                        std::uint64_t seed);

/// Deterministic non-negative init from the k leading singular triplets:
/// each singular vector pair is split into positive and negative parts and
/// the side with the larger combined mass is kept (ties go to the positive
/// side). Repeated calls are bitwise identical.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> nndsvd_init(const DocTermMatrix& matrix,
                                                        int k);

/// Alternating non-negative least squares from explicit starting factors.
/// Each half-problem is solved by projected gradient with an adaptive step
/// size and a small fixed inner budget. Stops when the relative drop in
/// reconstruction error falls below `tol` or after `max_iter` outer
/// iterations.
Factorization nmf_from_init(const DocTermMatrix::Sparse& matrix, Eigen::MatrixXd w0,
                            Eigen::MatrixXd h0, int max_iter, double tol);

/// Convenience wrapper: build the starting factors per `init` (seed is only
/// consumed by RandomUniform) and run nmf_from_init. NNDSVD requires every
/// term to occur somewhere; an all-zero row signals an upstream filtering
/// bug and is rejected.
Factorization nmf(const DocTermMatrix& matrix, int k, InitStrategy init,
                  int max_iter = 50, double tol = 1e-5, std::uint64_t seed = 0);

/// Per-topic term indices sorted by basis weight descending, ties broken by
/// ascending index, zero-weight terms excluded, truncated at t.
RankingSet extract_ranking_set(const Factorization& f, int t);

/// Writes W.csv and H.csv (row-major, 17 significant digits) plus meta.json
/// (k, seed, init, iterations, final error) into `dir`, creating it if
/// needed.
void save_factorization(const std::filesystem::path& dir, const Factorization& f,
                        InitStrategy init, std::uint64_t seed);

} // namespace topicstab
