#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topicstab/consensus.hpp"
#include "topicstab/corpus.hpp"
#include "topicstab/factorization.hpp"

namespace topicstab {

/// Knobs of the stability scan. The flat/low thresholds feed the
/// "no clustering tendency" flag; they are heuristics, surfaced here so the
/// report can echo them. `workers` caps concurrency and never affects
/// results (0 means use the hardware parallelism).
struct StabilityConfig {
    int k_min = 2;
    int k_max = 12;
    int tau = 100;
    double beta = 0.8;
    int top_terms = 20;
    int max_iter = 50;
    double tol = 1e-5;
    std::uint64_t seed = 1;
    int workers = 0;
    double flat_range_threshold = 0.1;
    double low_stability_threshold = 0.5;
};

/// One k of the scan: the mean agreement, the per-sample scores behind it,
/// and the reference model's topics spelled out as terms (with their basis
/// weights, for topic listings). Consensus fields are filled only when the
/// baseline runs.
struct StabilityRecord {
    int k = 0;
    double stability = 0.0;
    std::vector<double> sample_scores;
    std::vector<std::vector<std::string>> reference_terms;
    std::vector<std::vector<double>> reference_weights;
    std::optional<double> consensus;
    std::optional<double> consensus_rescaled;
    std::size_t never_co_sampled_pairs = 0;
};

struct StabilityReport {
    StabilityConfig config;
    Eigen::Index num_terms = 0;
    Eigen::Index num_docs = 0;
    std::string corpus_hash;
    std::vector<StabilityRecord> records; // k ascending
    bool no_clustering_tendency = false;
};

/// Extras on top of the plain scan: the consensus baseline and additional
/// ranking depths scored from the same factorizations (the depth-sweep).
struct ProtocolOptions {
    bool baseline = false;
    Linkage linkage = Linkage::Average;
    double rescale_floor = 0.8; // min-max floor for the plotted consensus column
    std::vector<int> extra_depths;
    /// Observes each k's consensus matrix as it is computed (only with
    /// baseline). May be called from worker threads, one call per k; sinks
    /// writing per-k files need no locking.
    std::function<void(int k, const ConsensusMatrix&)> consensus_sink;
};

struct ProtocolResult {
    StabilityReport report;
    /// depth -> stability curve over k ascending; always contains
    /// config.top_terms, plus every requested extra depth.
    std::map<int, std::vector<double>> curves_by_depth;
};

/// The tau document subsamples used for every k of a scan. Sampling happens
/// once, outside the k loop; per-sample seeds derive from (seed, index), so
/// the list is reproducible across processes.
std::vector<DocTermMatrix> generate_samples(const DocTermMatrix& matrix, int tau,
                                            double beta, std::uint64_t seed);

/// Deterministic reference topics for one k: NMF with NNDSVD initialization
/// on the full matrix, reduced to its depth-t ranking set.
RankingSet reference_model(const DocTermMatrix& matrix, int k, int t,
                           int max_iter, double tol = 1e-5);

/// Mean agreement between the reference model and one randomly initialized
/// model per sample (tau comparisons, not all pairs). Returns the mean and
/// the per-sample scores. Sample run i for rank k uses the seed derived
/// from (config.seed, k, i).
std::pair<double, std::vector<double>> stability_for_k(
    const DocTermMatrix& matrix, const std::vector<DocTermMatrix>& samples, int k,
    const StabilityConfig& config);

/// The full scan over [k_min, k_max]. Factorizations run concurrently up to
/// config.workers; the report is identical to a sequential run.
StabilityReport run_protocol(const DocTermMatrix& matrix,
                             const StabilityConfig& config);

/// run_protocol plus the consensus baseline and/or extra ranking depths,
/// all computed from one shared set of factorizations.
ProtocolResult run_protocol_extended(const DocTermMatrix& matrix,
                                     const StabilityConfig& config,
                                     const ProtocolOptions& options);

/// Strict local maxima of stability over k, endpoints included when they
/// beat their single neighbor, ordered by descending stability (ties by
/// ascending k). A constant stretch produces no peak; a single-record
/// report returns its only k.
std::vector<int> find_peaks(const StabilityReport& report);

} // namespace topicstab
