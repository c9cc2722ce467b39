#include "topicstab/agreement.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "topicstab/hungarian.hpp"
#include "topicstab/ranking.hpp"

namespace topicstab {
namespace {

// Highest achievable sum of matched similarities using only the given rows
// and columns (index lists of equal length).
double best_completion(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
    if (rows.empty()) return 0.0;
    const int r = static_cast<int>(rows.size());
    Eigen::MatrixXd cost(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) cost(a, b) = 1.0 - m(rows[a], cols[b]);
    const std::vector<int> assignment = min_cost_assignment(cost);
    double total = 0.0;
    for (int a = 0; a < r; ++a) total += m(rows[a], cols[assignment[a]]);
    return total;
}

} // namespace

Eigen::MatrixXd similarity_matrix(const RankingSet& sx, const RankingSet& sy) {
    if (sx.k() != sy.k())
        throw std::invalid_argument(
            "similarity_matrix: ranking sets have different topic counts");
    if (sx.depth != sy.depth)
        throw std::invalid_argument(
            "similarity_matrix: ranking sets have different depths");
    const int k = sx.k();
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            m(i, j) = average_jaccard(sx.topics[static_cast<std::size_t>(i)],
                                      sy.topics[static_cast<std::size_t>(j)],
                                      sx.depth);
    return m;
}

std::vector<int> best_match(const Eigen::MatrixXd& similarity) {
    if (similarity.rows() != similarity.cols())
        throw std::invalid_argument("best_match: matrix must be square");
    if (!similarity.allFinite())
        throw std::invalid_argument("best_match: entries must be finite");
    const int k = static_cast<int>(similarity.rows());
    if (k == 0) return {};

    // One full assignment pins down the optimal value; the permutation is
    // then rebuilt row by row, fixing the smallest column that still admits
    // an optimal completion. This yields the lexicographically smallest
    // optimum regardless of which one the solver happened to find.
    const Eigen::MatrixXd cost =
        Eigen::MatrixXd::Constant(k, k, 1.0) - similarity;
    const std::vector<int> initial = min_cost_assignment(cost);
    double optimum = 0.0;
    for (int i = 0; i < k; ++i) optimum += similarity(i, initial[i]);
    constexpr double kTieTol = 1e-9;

    std::vector<int> permutation(k, -1);
    std::vector<char> column_used(k, 0);
    double prefix = 0.0;
    for (int i = 0; i < k; ++i) {
        std::vector<int> rest_rows;
        for (int r = i + 1; r < k; ++r) rest_rows.push_back(r);
        bool fixed = false;
        for (int j = 0; j < k && !fixed; ++j) {
            if (column_used[j]) continue;
            std::vector<int> rest_cols;
            for (int c = 0; c < k; ++c)
                if (!column_used[c] && c != j) rest_cols.push_back(c);
            const double completion =
                best_completion(similarity, rest_rows, rest_cols);
            if (prefix + similarity(i, j) + completion >= optimum - kTieTol) {
                permutation[i] = j;
                column_used[j] = 1;
                prefix += similarity(i, j);
                fixed = true;
            }
        }
        if (!fixed) permutation[i] = initial[i]; // unreachable for finite input
    }
    return permutation;
}

AgreementResult agree(const RankingSet& sx, const RankingSet& sy) {
    AgreementResult result;
    result.similarity = similarity_matrix(sx, sy);
    result.permutation = best_match(result.similarity);
    const int k = sx.k();
    double total = 0.0;
    for (int i = 0; i < k; ++i) total += result.similarity(i, result.permutation[i]);
    result.score = k > 0 ? total / static_cast<double>(k) : 0.0;
    return result;
}

std::string to_json_string(const AgreementResult& result) {
    nlohmann::ordered_json j;
    auto& matrix = j["similarity"] = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < result.similarity.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < result.similarity.cols(); ++c)
            row.push_back(result.similarity(r, c));
        matrix.push_back(std::move(row));
    }
    auto& pairs = j["matching"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.permutation.size(); ++i)
        pairs.push_back({static_cast<int>(i) + 1, result.permutation[i] + 1});
    j["score"] = result.score;
    return j.dump(2);
}

} // namespace topicstab
