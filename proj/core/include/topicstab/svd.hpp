#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace topicstab {

/// Leading singular triplets, values descending. Columns of `left`/`right`
/// are the singular vectors; the sign of each triplet is fixed by making the
/// largest-magnitude entry of the left vector positive (first such entry on
/// magnitude ties).
struct SvdResult {
    Eigen::MatrixXd left;   // m x k
    Eigen::VectorXd values; // k
    Eigen::MatrixXd right;  // n x k
};

/// k leading singular triplets of a sparse matrix. Fully deterministic:
/// small matrices go through a dense Jacobi SVD, larger ones through Lanczos
/// iteration on the Gram operator started from the normalized all-ones
/// vector with full reorthogonalization and a fixed growth schedule.
/// Throws numerical_error if the iteration budget is exhausted before the
/// requested triplets converge.
SvdResult svd_top_k(const Eigen::SparseMatrix<double>& matrix, int k);

namespace detail {

/// Lanczos path, exposed for oracle tests against the dense route.
SvdResult lanczos_svd(const Eigen::SparseMatrix<double>& matrix, int k);

SvdResult dense_svd(const Eigen::SparseMatrix<double>& matrix, int k);

} // namespace detail

} // namespace topicstab
