#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topicstab/factorization.hpp"

namespace topicstab {

/// Outcome of matching two k-way topic models: the full pairwise similarity
/// matrix, the optimal topic pairing, and the mean matched similarity.
struct AgreementResult {
    Eigen::MatrixXd similarity;   // k x k average-Jaccard scores
    std::vector<int> permutation; // topic i of the first model pairs with this
    double score = 0.0;           // mean of the matched entries, in [0,1]
};

/// Pairwise average-Jaccard scores between the topics of two ranking sets.
/// Both sets must have the same number of topics and the same depth.
Eigen::MatrixXd similarity_matrix(const RankingSet& sx, const RankingSet& sy);

/// Bijection maximizing the sum of matched entries. Among equally good
/// matchings, returns the lexicographically smallest permutation.
std::vector<int> best_match(const Eigen::MatrixXd& similarity);

/// Agreement score between two topic models (similarity_matrix + best_match).
/// 1.0 exactly when the optimally matched term lists are pairwise identical;
/// invariant under topic reordering within either model.
AgreementResult agree(const RankingSet& sx, const RankingSet& sy);

/// JSON rendering: similarity matrix, matching as 1-based [i, j] pairs, and
/// the score.
std::string to_json_string(const AgreementResult& result);

} // namespace topicstab
