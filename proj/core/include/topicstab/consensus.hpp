#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "topicstab/corpus.hpp"

namespace topicstab {

struct StabilityConfig; // stability.hpp

enum class Linkage { Average, Single, Complete };

/// Binary co-membership over the documents of one run, backed by the
/// per-document cluster labels rather than an explicit n x n block of ones.
class ConnectivityMatrix {
  public:
    explicit ConnectivityMatrix(std::vector<int> labels);

    Eigen::Index size() const { return static_cast<Eigen::Index>(labels_.size()); }
    int entry(Eigen::Index i, Eigen::Index j) const {
        return labels_[static_cast<std::size_t>(i)] ==
                       labels_[static_cast<std::size_t>(j)]
                   ? 1
                   : 0;
    }
    const std::vector<int>& labels() const { return labels_; }

  private:
    std::vector<int> labels_;
};

/// Fraction of runs in which each document pair landed in the same discrete
/// cluster, among the runs where both documents were sampled at all. Pairs
/// never observed together default to 0 and are tallied in
/// never_co_sampled_pairs (strict upper triangle only).
struct ConsensusMatrix {
    Eigen::MatrixXd values; // n x n, symmetric, entries in [0,1]
    std::size_t never_co_sampled_pairs = 0;
};

/// One run's agglomerative merge history. Leaves are clusters 0..n-1;
/// merge i creates cluster n+i from clusters a and b at the given height.
struct Dendrogram {
    struct Merge {
        int a = 0;
        int b = 0;
        double height = 0.0;
        int size = 0; // leaves under the merged cluster
    };
    int leaves = 0;
    std::vector<Merge> merges;
};

/// Discrete clustering readout of a membership matrix: document j belongs
/// to the topic with the largest H[:,j] entry, ties to the lowest topic
/// index. A document with an all-zero column has no assignable cluster and
/// is an error.
ConnectivityMatrix connectivity(const Eigen::MatrixXd& h);

/// Pools per-run connectivity over a fixed universe of `total_docs`
/// documents. Each run pairs the global indices of its sampled documents
/// (ascending, aligned with the connectivity's label order) with the
/// connectivity itself.
ConsensusMatrix accumulate_consensus(
    const std::vector<std::pair<std::vector<Eigen::Index>, ConnectivityMatrix>>& runs,
    Eigen::Index total_docs);

/// Agglomerative clustering of a full symmetric distance matrix by the
/// nearest-neighbor-chain method. Ties pick the lowest cluster index, so
/// the result is deterministic.
Dendrogram agglomerate(const Eigen::MatrixXd& distances, Linkage linkage);

/// Pearson correlation between the strict-upper-triangle distances and the
/// merge heights at which each pair is first united. 1.0 exactly when the
/// distances are ultrametric.
double cophenetic_correlation(const Eigen::MatrixXd& distances,
                              const Dendrogram& dendrogram);

/// The Brunet-style model-selection score of a consensus matrix: cluster
/// D = 1 - C hierarchically and correlate D with the dendrogram's
/// cophenetic distances. Requires n >= 3; a constant D has no defined
/// correlation and is an error.
double cophenetic_score(const ConsensusMatrix& consensus,
                        Linkage linkage = Linkage::Average);

/// Consensus score for one k over the shared sample list, re-deriving the
/// same per-(k, sample) seeds as the stability scan so both methods consume
/// bitwise-identical factorizations.
double consensus_for_k(const DocTermMatrix& matrix,
                       const std::vector<DocTermMatrix>& samples, int k,
                       const StabilityConfig& config);

/// Min-max rescale onto [0,1] with a fixed floor: s -> (s - floor) /
/// (max - floor), clamped. Plot presentation only; peak locations are read
/// from the raw scores. All scores at or below the floor map to 0.
std::vector<double> rescale_consensus(const std::vector<double>& scores,
                                      double floor_value);

} // namespace topicstab
