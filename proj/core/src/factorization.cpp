#include "topicstab/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "topicstab/errors.hpp"
#include "topicstab/rng.hpp"
#include "topicstab/svd.hpp"

namespace topicstab {
namespace {

// Projected-gradient solve of min_X 0.5*||V - F X||_F^2 s.t. X >= 0, with
// gram = F^T F and cross = F^T V precomputed by the caller. Adaptive step
// size with the sufficient-decrease condition
// (1-sigma)*<g,d> + 0.5*<d, gram d> <= 0, growing or shrinking the step by
// 1/beta per trial. The solve stops once the projected gradient has dropped
// below rel_tol times its norm on entry, so a half-problem with any slack
// always makes progress; the small iteration budget keeps each half-step
// cheap, and the outer alternation does the real work.
void solve_nnls_subproblem(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                           Eigen::MatrixXd& x, double rel_tol, int max_sub_iter) {
    constexpr double kBeta = 0.1;
    constexpr double kSigma = 0.01;
    constexpr int kMaxStepTrials = 20;

    double alpha = 1.0;
    double entry_norm = 0.0;
    for (int sub = 1; sub <= max_sub_iter; ++sub) {
        const Eigen::MatrixXd grad = gram * x - cross;
        double proj_sq = 0.0;
        for (Eigen::Index j = 0; j < grad.cols(); ++j)
            for (Eigen::Index i = 0; i < grad.rows(); ++i)
                if (grad(i, j) < 0.0 || x(i, j) > 0.0)
                    proj_sq += grad(i, j) * grad(i, j);
        const double proj_norm = std::sqrt(proj_sq);
        if (sub == 1) entry_norm = proj_norm;
        if (proj_norm <= rel_tol * entry_norm) break;

        Eigen::MatrixXd x_prev = x;
        bool decrease_alpha = false;
        for (int trial = 1; trial <= kMaxStepTrials; ++trial) {
            Eigen::MatrixXd x_new = (x - alpha * grad).cwiseMax(0.0);
            const Eigen::MatrixXd d = x_new - x;
            const double grad_d = grad.cwiseProduct(d).sum();
            const double d_qd = (gram * d).cwiseProduct(d).sum();
            const bool sufficient = (1.0 - kSigma) * grad_d + 0.5 * d_qd <= 0.0;
            if (trial == 1) decrease_alpha = !sufficient;
            if (decrease_alpha) {
                if (sufficient) {
                    x = std::move(x_new);
                    break;
                }
                alpha *= kBeta;
            } else {
                const bool stalled = (x_new.array() == x_prev.array()).all();
                if (!sufficient || stalled) {
                    x = std::move(x_prev);
                    break;
                }
                x_prev = std::move(x_new);
                if (trial == kMaxStepTrials) {
                    // Trial budget exhausted while still improving: keep the
                    // last accepted candidate rather than discarding the step
                    // (a near-singular gram can satisfy the decrease
                    // condition at every growth trial).
                    x = std::move(x_prev);
                    break;
                }
                alpha /= kBeta;
            }
        }
    }
}

// ||A - WH||_F via the expansion ||A||^2 - 2<W^T A, H> + <W^T W, H H^T>,
// which never materializes the dense product. cross_wta must be W^T A for
// the current W.
double reconstruction_error(double norm_a_sq, const Eigen::MatrixXd& cross_wta,
                            const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
    const Eigen::MatrixXd wtw = w.transpose() * w;
    const Eigen::MatrixXd hht = h * h.transpose();
    const double err_sq =
        norm_a_sq - 2.0 * cross_wta.cwiseProduct(h).sum() + wtw.cwiseProduct(hht).sum();
    return std::sqrt(std::max(err_sq, 0.0));
}

void write_dense_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

} // namespace

std::string to_string(InitStrategy init) {
    return init == InitStrategy::RandomUniform ? "random" : "nndsvd";
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> random_init(Eigen::Index m,
                                                        Eigen::Index n, int k,
                                                        std::uint64_t seed) {
    if (m < 1 || n < 1 || k < 1)
        throw std::invalid_argument("random_init: dimensions must be positive");
    Rng rng(seed);
    Eigen::MatrixXd w(m, k);
    for (int j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < m; ++i) w(i, j) = rng.next_open01();
    Eigen::MatrixXd h(k, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (int i = 0; i < k; ++i) h(i, j) = rng.next_open01();
    return {std::move(w), std::move(h)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> nndsvd_init(const DocTermMatrix& matrix,
                                                        int k) {
    const Eigen::Index m = matrix.num_terms();
    const Eigen::Index n = matrix.num_docs();
    if (k < 1 || k > std::min(m, n))
        throw std::invalid_argument("nndsvd_init: k out of range");

    // A term with no occurrences cannot happen after document-frequency
    // filtering on the full corpus; seeing one here means the caller fed an
    // unfiltered or sampled matrix into the reference path.
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    const auto& a = matrix.entries();
    for (int col = 0; col < a.outerSize(); ++col)
        for (DocTermMatrix::Sparse::InnerIterator it(a, col); it; ++it)
            seen[static_cast<std::size_t>(it.row())] = true;
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw data_error("nndsvd_init: matrix has an all-zero term row; the "
                         "initialization requires every term to occur");

    const SvdResult svd = svd_top_k(matrix.entries(), k);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, k);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, n);
    for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd u = svd.left.col(j);
        const Eigen::VectorXd v = svd.right.col(j);
        const Eigen::VectorXd up = u.cwiseMax(0.0);
        const Eigen::VectorXd un = (-u).cwiseMax(0.0);
        const Eigen::VectorXd vp = v.cwiseMax(0.0);
        const Eigen::VectorXd vn = (-v).cwiseMax(0.0);
        const double mass_pos = up.norm() * vp.norm();
        const double mass_neg = un.norm() * vn.norm();
        // Dominant-side selection; exact ties keep the positive side.
        const bool positive = mass_pos >= mass_neg;
        const double mass = positive ? mass_pos : mass_neg;
        if (mass <= 0.0) continue; // degenerate pair: leave the topic all-zero
        const Eigen::VectorXd& uu = positive ? up : un;
        const Eigen::VectorXd& vv = positive ? vp : vn;
        const double scale = std::sqrt(svd.values(j) * mass);
        w.col(j) = scale * (uu / uu.norm());
        h.row(j) = scale * (vv / vv.norm()).transpose();
    }
    return {std::move(w), std::move(h)};
}

Factorization nmf_from_init(const DocTermMatrix::Sparse& matrix, Eigen::MatrixXd w0,
                            Eigen::MatrixXd h0, int max_iter, double tol) {
    if (max_iter < 1) throw std::invalid_argument("nmf: max_iter must be >= 1");
    if (w0.cols() != h0.rows())
        throw std::invalid_argument("nmf: starting factors have mismatched rank");
    if (w0.rows() != matrix.rows() || h0.cols() != matrix.cols())
        throw std::invalid_argument("nmf: starting factors do not fit the matrix");
    if ((w0.array() < 0.0).any() || (h0.array() < 0.0).any())
        throw std::invalid_argument("nmf: starting factors must be non-negative");

    Factorization f;
    f.W = std::move(w0);
    f.H = std::move(h0);
    const double norm_a_sq = matrix.squaredNorm();

    Eigen::MatrixXd cross_wta = f.W.transpose() * matrix; // k x n
    f.error_trace.push_back(reconstruction_error(norm_a_sq, cross_wta, f.W, f.H));

    // Each half-solve shrinks its own projected gradient by this factor (or
    // runs out of budget). Relative to the entry point rather than the
    // initial factors, so late iterations still move when there is slack.
    constexpr double kSubproblemTol = 1e-3;
    constexpr int kSubproblemBudget = 20;

    for (int it = 1; it <= max_iter; ++it) {
        // W half-problem, posed on W^T so both halves share one solver.
        Eigen::MatrixXd hht = f.H * f.H.transpose();
        Eigen::MatrixXd cross_hat = (matrix * f.H.transpose()).transpose(); // k x m
        Eigen::MatrixXd wt = f.W.transpose();
        solve_nnls_subproblem(hht, cross_hat, wt, kSubproblemTol,
                              kSubproblemBudget);
        f.W = wt.transpose();

        const Eigen::MatrixXd wtw = f.W.transpose() * f.W;
        cross_wta = f.W.transpose() * matrix;
        solve_nnls_subproblem(wtw, cross_wta, f.H, kSubproblemTol,
                              kSubproblemBudget);

        const double err = reconstruction_error(norm_a_sq, cross_wta, f.W, f.H);
        const double prev = f.error_trace.back();
        f.error_trace.push_back(err);
        f.iterations = it;
        const double rel = prev > 0.0 ? (prev - err) / prev : 0.0;
        if (rel < tol) {
            f.converged = true;
            break;
        }
    }
    return f;
}

Factorization nmf(const DocTermMatrix& matrix, int k, InitStrategy init,
                  int max_iter, double tol, std::uint64_t seed) {
    const Eigen::Index m = matrix.num_terms();
    const Eigen::Index n = matrix.num_docs();
    if (k < 1 || k > std::min(m, n))
        throw std::invalid_argument("nmf: k out of range for matrix dimensions");

    if (init == InitStrategy::Nndsvd) {
        auto [w0, h0] = nndsvd_init(matrix, k); // rejects all-zero term rows
        return nmf_from_init(matrix.entries(), std::move(w0), std::move(h0),
                             max_iter, tol);
    }
    auto [w0, h0] = random_init(m, n, k, seed);
    return nmf_from_init(matrix.entries(), std::move(w0), std::move(h0), max_iter,
                         tol);
}

RankingSet extract_ranking_set(const Factorization& f, int t) {
    if (t < 1) throw std::invalid_argument("extract_ranking_set: t must be >= 1");
    RankingSet set;
    set.depth = t;
    set.topics.reserve(static_cast<std::size_t>(f.W.cols()));
    std::vector<int> order;
    for (Eigen::Index j = 0; j < f.W.cols(); ++j) {
        order.clear();
        for (Eigen::Index i = 0; i < f.W.rows(); ++i)
            if (f.W(i, j) > 0.0) order.push_back(static_cast<int>(i));
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double wa = f.W(a, j);
            const double wb = f.W(b, j);
            if (wa != wb) return wa > wb;
            return a < b;
        });
        if (order.size() > static_cast<std::size_t>(t))
            order.resize(static_cast<std::size_t>(t));
        set.topics.push_back(order);
    }
    return set;
}

void save_factorization(const std::filesystem::path& dir, const Factorization& f,
                        InitStrategy init, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    write_dense_csv(dir / "W.csv", f.W);
    write_dense_csv(dir / "H.csv", f.H);

    nlohmann::ordered_json meta;
    meta["k"] = f.k();
    meta["seed"] = seed;
    meta["init"] = to_string(init);
    meta["iterations"] = f.iterations;
    meta["final_error"] = f.final_error();
    meta["converged"] = f.converged;
    std::ofstream out(dir / "meta.json");
    if (!out) throw data_error("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
}

} // namespace topicstab
