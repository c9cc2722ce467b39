#include "topicstab/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "topicstab/errors.hpp"

namespace topicstab {
namespace {

// Make the largest-magnitude entry of each left vector positive; on ties the
// first such entry decides. Flipping negates the right vector too, so the
// product u * s * v^T is unchanged.
void fix_signs(Eigen::MatrixXd& left, Eigen::MatrixXd& right) {
    for (Eigen::Index j = 0; j < left.cols(); ++j) {
        double best = -1.0;
        Eigen::Index best_row = 0;
        for (Eigen::Index i = 0; i < left.rows(); ++i) {
            const double mag = std::abs(left(i, j));
            if (mag > best) {
                best = mag;
                best_row = i;
            }
        }
        if (left(best_row, j) < 0.0) {
            left.col(j) = -left.col(j);
            right.col(j) = -right.col(j);
        }
    }
}

// Symmetric Lanczos on an abstract operator, started from ones/sqrt(dim).
// Returns the `k` largest Ritz pairs once their explicit residuals drop
// below `rel_tol` times the largest Ritz value, growing the subspace along a
// fixed schedule. Breakdown vectors are replaced by the first canonical
// basis vector with a usable component outside the current span, keeping the
// run deterministic.
template <typename Apply>
void lanczos_gram(const Apply& apply, Eigen::Index dim, int k,
                  Eigen::VectorXd& eigenvalues, Eigen::MatrixXd& eigenvectors) {
    const double rel_tol = 1e-9;
    Eigen::Index subspace = std::min<Eigen::Index>(dim, std::max(3 * k + 16, 40));
    const Eigen::Index subspace_max =
        std::min<Eigen::Index>(dim, std::max(8 * k + 64, 240));

    while (true) {
        Eigen::MatrixXd basis(dim, subspace);
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(subspace);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(subspace > 1 ? subspace - 1 : 1);
        basis.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(dim)));

        Eigen::Index built = subspace;
        Eigen::Index replacement_cursor = 0;
        for (Eigen::Index j = 0; j < subspace; ++j) {
            Eigen::VectorXd w = apply(basis.col(j));
            alpha(j) = basis.col(j).dot(w);
            w -= alpha(j) * basis.col(j);
            if (j > 0) w -= beta(j - 1) * basis.col(j - 1);
            // Two-pass full reorthogonalization keeps the basis orthonormal
            // to machine precision, which the residual check relies on.
            for (int pass = 0; pass < 2; ++pass) {
                w.noalias() -=
                    basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
            }
            if (j + 1 == subspace) break;

            const double scale =
                std::max({alpha.head(j + 1).cwiseAbs().maxCoeff(),
                          j > 0 ? beta.head(j).maxCoeff() : 0.0, 1e-30});
            const double norm = w.norm();
            if (norm > 1e-12 * scale) {
                beta(j) = norm;
                basis.col(j + 1) = w / norm;
                continue;
            }
            // Invariant subspace found: continue with a fresh deterministic
            // direction, or stop early if the basis already spans everything
            // reachable.
            beta(j) = 0.0;
            bool replaced = false;
            while (replacement_cursor < dim) {
                Eigen::VectorXd cand = Eigen::VectorXd::Zero(dim);
                cand(replacement_cursor++) = 1.0;
                for (int pass = 0; pass < 2; ++pass) {
                    cand.noalias() -= basis.leftCols(j + 1) *
                                      (basis.leftCols(j + 1).transpose() * cand);
                }
                const double cnorm = cand.norm();
                if (cnorm > 1e-6) {
                    basis.col(j + 1) = cand / cnorm;
                    replaced = true;
                    break;
                }
            }
            if (!replaced) {
                built = j + 1;
                break;
            }
        }

        Eigen::MatrixXd tridiag = Eigen::MatrixXd::Zero(built, built);
        for (Eigen::Index j = 0; j < built; ++j) {
            tridiag(j, j) = alpha(j);
            if (j + 1 < built) {
                tridiag(j, j + 1) = beta(j);
                tridiag(j + 1, j) = beta(j);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(tridiag);
        if (solver.info() != Eigen::Success)
            throw numerical_error("eigendecomposition of the Lanczos tridiagonal failed");

        // Eigen returns ascending order; take the top k.
        const Eigen::Index take = std::min<Eigen::Index>(k, built);
        eigenvalues.resize(k);
        eigenvectors.resize(dim, k);
        bool converged = take == k;
        if (converged) {
            const double theta_max =
                std::max(std::abs(solver.eigenvalues()(built - 1)), 1e-300);
            for (Eigen::Index i = 0; i < k; ++i) {
                const Eigen::Index src = built - 1 - i;
                eigenvalues(i) = solver.eigenvalues()(src);
                eigenvectors.col(i).noalias() =
                    basis.leftCols(built) * solver.eigenvectors().col(src);
                const Eigen::VectorXd residual =
                    apply(eigenvectors.col(i)) - eigenvalues(i) * eigenvectors.col(i);
                if (residual.norm() > rel_tol * theta_max) {
                    converged = false;
                    break;
                }
            }
        }
        if (converged) return;

        if (subspace >= subspace_max || subspace >= dim)
            throw numerical_error(
                "Lanczos iteration did not converge within the subspace budget");
        subspace = std::min(subspace_max, 2 * subspace);
    }
}

} // namespace

namespace detail {

SvdResult dense_svd(const Eigen::SparseMatrix<double>& matrix, int k) {
    const Eigen::MatrixXd dense(matrix);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult result;
    result.left = svd.matrixU().leftCols(k);
    result.values = svd.singularValues().head(k);
    result.right = svd.matrixV().leftCols(k);
    fix_signs(result.left, result.right);
    return result;
}

SvdResult lanczos_svd(const Eigen::SparseMatrix<double>& matrix, int k) {
    const Eigen::Index rows = matrix.rows();
    const Eigen::Index cols = matrix.cols();
    const bool gram_on_rows = rows <= cols;
    const Eigen::Index dim = gram_on_rows ? rows : cols;

    Eigen::VectorXd theta;
    Eigen::MatrixXd vectors;
    if (gram_on_rows) {
        auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return matrix * (matrix.transpose() * x);
        };
        lanczos_gram(apply, dim, k, theta, vectors);
    } else {
        auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return matrix.transpose() * (matrix * x);
        };
        lanczos_gram(apply, dim, k, theta, vectors);
    }

    SvdResult result;
    result.values.resize(k);
    result.left.resize(rows, k);
    result.right.resize(cols, k);
    const double sigma_floor = 1e-12 * std::sqrt(std::max(theta(0), 0.0));
    for (int i = 0; i < k; ++i) {
        const double sigma = std::sqrt(std::max(theta(i), 0.0));
        result.values(i) = sigma;
        Eigen::VectorXd primary = vectors.col(i);
        if (gram_on_rows) {
            result.left.col(i) = primary;
            if (sigma > sigma_floor && sigma > 0.0)
                result.right.col(i) = (matrix.transpose() * primary) / sigma;
            else
                result.right.col(i).setZero();
        } else {
            result.right.col(i) = primary;
            if (sigma > sigma_floor && sigma > 0.0)
                result.left.col(i) = (matrix * primary) / sigma;
            else
                result.left.col(i).setZero();
        }
    }
    fix_signs(result.left, result.right);
    return result;
}

} // namespace detail

SvdResult svd_top_k(const Eigen::SparseMatrix<double>& matrix, int k) {
    const Eigen::Index min_dim = std::min(matrix.rows(), matrix.cols());
    if (k < 1) throw std::invalid_argument("svd_top_k: k must be at least 1");
    if (k > min_dim)
        throw std::invalid_argument(
            "svd_top_k: k exceeds the smaller matrix dimension");
    if (min_dim <= 32) return detail::dense_svd(matrix, k);
    return detail::lanczos_svd(matrix, k);
}

} // namespace topicstab
