#include "topicstab/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "topicstab/agreement.hpp"
#include "topicstab/errors.hpp"
#include "topicstab/rng.hpp"

namespace topicstab {
namespace {

// Runs fn(0..count-1) across up to `workers` threads (0 = hardware count).
// Work is handed out through an atomic cursor; results must go into
// caller-provided slots keyed by index, which keeps the outcome independent
// of scheduling. On failure the pending work is cancelled and the
// lowest-index captured exception is rethrown.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t threads = workers > 0
                              ? static_cast<std::size_t>(workers)
                              : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);

    std::vector<std::exception_ptr> errors(count);
    std::atomic<bool> failed{false};
    if (threads <= 1) {
        for (std::size_t i = 0; i < count && !failed; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        auto body = [&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                    failed = true;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (failed)
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
}

// First min(t, length) items of every topic list; the sort order is shared
// across depths, so a shallower set is a per-topic prefix of a deeper one.
RankingSet truncate_ranking(const RankingSet& set, int t) {
    RankingSet out;
    out.depth = t;
    out.topics.reserve(set.topics.size());
    for (const auto& topic : set.topics) {
        const std::size_t len = std::min(topic.size(), static_cast<std::size_t>(t));
        out.topics.emplace_back(topic.begin(), topic.begin() + len);
    }
    return out;
}

// Rethrows the in-flight exception with run coordinates prepended,
// preserving the error category (and with it the process exit code).
[[noreturn]] void rethrow_with_context(const std::string& where) {
    try {
        throw;
    } catch (const data_error& e) {
        throw data_error(where + ": " + e.what());
    } catch (const numerical_error& e) {
        throw numerical_error(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(where + ": " + e.what());
    }
}

void validate_config(const DocTermMatrix& matrix, const StabilityConfig& config) {
    if (config.k_min < 2)
        throw std::invalid_argument("stability: k_min must be at least 2");
    if (config.k_max < config.k_min)
        throw std::invalid_argument("stability: k_max must be >= k_min");
    if (config.tau < 1) throw std::invalid_argument("stability: tau must be >= 1");
    if (!(config.beta > 0.0) || config.beta > 1.0)
        throw std::invalid_argument("stability: beta must lie in (0, 1]");
    if (config.top_terms < 1)
        throw std::invalid_argument("stability: top_terms must be >= 1");
    if (config.max_iter < 1)
        throw std::invalid_argument("stability: max_iter must be >= 1");
    if (!(config.tol >= 0.0))
        throw std::invalid_argument("stability: tol must be non-negative");
    const auto sample_docs = static_cast<Eigen::Index>(
        std::floor(config.beta * static_cast<double>(matrix.num_docs())));
    const Eigen::Index limit = std::min(matrix.num_terms(), sample_docs);
    if (config.k_max > limit)
        throw std::invalid_argument(
            "stability: k_max exceeds the rank supported by the sampled matrices");
}

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

} // namespace

std::vector<DocTermMatrix> generate_samples(const DocTermMatrix& matrix, int tau,
                                            double beta, std::uint64_t seed) {
    if (tau < 1) throw std::invalid_argument("generate_samples: tau must be >= 1");
    std::vector<DocTermMatrix> samples;
    samples.reserve(static_cast<std::size_t>(tau));
    for (int i = 0; i < tau; ++i)
        samples.push_back(sample_columns(
            matrix, beta,
            derive_seed(seed, seed_domain::sampling, static_cast<std::uint64_t>(i))));
    return samples;
}

RankingSet reference_model(const DocTermMatrix& matrix, int k, int t, int max_iter,
                           double tol) {
    if (k < 2) throw std::invalid_argument("reference_model: k must be at least 2");
    const Factorization f = nmf(matrix, k, InitStrategy::Nndsvd, max_iter, tol);
    return extract_ranking_set(f, t);
}

std::pair<double, std::vector<double>> stability_for_k(
    const DocTermMatrix& matrix, const std::vector<DocTermMatrix>& samples, int k,
    const StabilityConfig& config) {
    if (samples.empty())
        throw std::invalid_argument("stability_for_k: no samples");
    const RankingSet reference =
        reference_model(matrix, k, config.top_terms, config.max_iter, config.tol);

    std::vector<double> scores;
    scores.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::uint64_t run_seed = derive_seed(
            config.seed, seed_domain::factorization, static_cast<std::uint64_t>(k), i);
        const Factorization f = nmf(samples[i], k, InitStrategy::RandomUniform,
                                    config.max_iter, config.tol, run_seed);
        scores.push_back(
            agree(reference, extract_ranking_set(f, config.top_terms)).score);
    }
    return {mean_of(scores), std::move(scores)};
}

StabilityReport run_protocol(const DocTermMatrix& matrix,
                             const StabilityConfig& config) {
    return run_protocol_extended(matrix, config, {}).report;
}

ProtocolResult run_protocol_extended(const DocTermMatrix& matrix,
                                     const StabilityConfig& config,
                                     const ProtocolOptions& options) {
    validate_config(matrix, config);
    for (const int d : options.extra_depths)
        if (d < 1)
            throw std::invalid_argument("stability: ranking depths must be >= 1");

    std::set<int> depth_set(options.extra_depths.begin(), options.extra_depths.end());
    depth_set.insert(config.top_terms);
    const std::vector<int> depths(depth_set.begin(), depth_set.end());
    const int max_depth = depths.back();
    const auto tau = static_cast<std::size_t>(config.tau);
    const std::size_t num_k =
        static_cast<std::size_t>(config.k_max - config.k_min + 1);

    // Fig-2 structure: sampling happens once, outside the k loop.
    std::vector<std::vector<Eigen::Index>> sample_indices(tau);
    std::vector<DocTermMatrix> samples;
    samples.reserve(tau);
    for (std::size_t i = 0; i < tau; ++i) {
        sample_indices[i] = sample_column_indices(
            matrix.num_docs(), config.beta,
            derive_seed(config.seed, seed_domain::sampling, i));
        samples.push_back(take_columns(matrix, sample_indices[i]));
    }

    // Reference models per k, on the full matrix.
    std::vector<Factorization> references(num_k);
    parallel_for(num_k, config.workers, [&](std::size_t ki) {
        const int k = config.k_min + static_cast<int>(ki);
        try {
            references[ki] = nmf(matrix, k, InitStrategy::Nndsvd, config.max_iter,
                                 config.tol);
        } catch (...) {
            rethrow_with_context("reference model k=" + std::to_string(k));
        }
    });
    std::vector<RankingSet> reference_full(num_k);
    for (std::size_t ki = 0; ki < num_k; ++ki)
        reference_full[ki] = extract_ranking_set(references[ki], max_depth);
    // depth -> per-k reference ranking sets
    std::vector<std::vector<RankingSet>> reference_at(depths.size());
    for (std::size_t di = 0; di < depths.size(); ++di) {
        reference_at[di].reserve(num_k);
        for (std::size_t ki = 0; ki < num_k; ++ki)
            reference_at[di].push_back(truncate_ranking(reference_full[ki], depths[di]));
    }

    // One task per (k, sample): factorize once, score every depth, and keep
    // the discrete clustering when the baseline needs it.
    struct SampleOutcome {
        std::vector<double> score_by_depth;
        std::vector<int> labels;
    };
    std::vector<SampleOutcome> outcomes(num_k * tau);
    parallel_for(num_k * tau, config.workers, [&](std::size_t task) {
        const std::size_t ki = task / tau;
        const std::size_t i = task % tau;
        const int k = config.k_min + static_cast<int>(ki);
        try {
            const std::uint64_t run_seed =
                derive_seed(config.seed, seed_domain::factorization,
                            static_cast<std::uint64_t>(k), i);
            const Factorization f =
                nmf(samples[i], k, InitStrategy::RandomUniform, config.max_iter,
                    config.tol, run_seed);
            const RankingSet full = extract_ranking_set(f, max_depth);
            auto& out = outcomes[task];
            out.score_by_depth.reserve(depths.size());
            for (std::size_t di = 0; di < depths.size(); ++di)
                out.score_by_depth.push_back(
                    agree(reference_at[di][ki], truncate_ranking(full, depths[di]))
                        .score);
            if (options.baseline) out.labels = connectivity(f.H).labels();
        } catch (...) {
            rethrow_with_context("k=" + std::to_string(k) +
                                 " sample=" + std::to_string(i));
        }
    });

    // Consensus baseline per k, over the identical factorization outcomes.
    std::vector<double> consensus_raw(num_k, 0.0);
    std::vector<std::size_t> never_co_sampled(num_k, 0);
    if (options.baseline) {
        parallel_for(num_k, config.workers, [&](std::size_t ki) {
            const int k = config.k_min + static_cast<int>(ki);
            try {
                std::vector<std::pair<std::vector<Eigen::Index>, ConnectivityMatrix>>
                    runs;
                runs.reserve(tau);
                for (std::size_t i = 0; i < tau; ++i)
                    runs.emplace_back(sample_indices[i],
                                      ConnectivityMatrix(outcomes[ki * tau + i].labels));
                const ConsensusMatrix cm =
                    accumulate_consensus(runs, matrix.num_docs());
                never_co_sampled[ki] = cm.never_co_sampled_pairs;
                consensus_raw[ki] = cophenetic_score(cm, options.linkage);
                if (options.consensus_sink) options.consensus_sink(k, cm);
            } catch (...) {
                rethrow_with_context("consensus k=" + std::to_string(k));
            }
        });
    }

    // Deterministic single-threaded assembly.
    ProtocolResult result;
    StabilityReport& report = result.report;
    report.config = config;
    report.num_terms = matrix.num_terms();
    report.num_docs = matrix.num_docs();
    report.corpus_hash = matrix.content_hash();

    const std::size_t primary_depth_index = static_cast<std::size_t>(
        std::find(depths.begin(), depths.end(), config.top_terms) - depths.begin());
    const auto& vocab = matrix.vocabulary();
    std::vector<double> rescaled;
    if (options.baseline)
        rescaled = rescale_consensus(consensus_raw, options.rescale_floor);

    report.records.reserve(num_k);
    for (std::size_t ki = 0; ki < num_k; ++ki) {
        StabilityRecord record;
        record.k = config.k_min + static_cast<int>(ki);
        record.sample_scores.reserve(tau);
        for (std::size_t i = 0; i < tau; ++i)
            record.sample_scores.push_back(
                outcomes[ki * tau + i].score_by_depth[primary_depth_index]);
        record.stability = mean_of(record.sample_scores);

        const RankingSet& ref = reference_at[primary_depth_index][ki];
        record.reference_terms.reserve(ref.topics.size());
        record.reference_weights.reserve(ref.topics.size());
        for (std::size_t topic = 0; topic < ref.topics.size(); ++topic) {
            std::vector<std::string> terms;
            std::vector<double> weights;
            terms.reserve(ref.topics[topic].size());
            weights.reserve(ref.topics[topic].size());
            for (const int term : ref.topics[topic]) {
                terms.push_back(vocab.terms()[static_cast<std::size_t>(term)]);
                weights.push_back(
                    references[ki].W(term, static_cast<Eigen::Index>(topic)));
            }
            record.reference_terms.push_back(std::move(terms));
            record.reference_weights.push_back(std::move(weights));
        }
        if (options.baseline) {
            record.consensus = consensus_raw[ki];
            record.consensus_rescaled = rescaled[ki];
            record.never_co_sampled_pairs = never_co_sampled[ki];
        }
        report.records.push_back(std::move(record));
    }

    double max_stability = -std::numeric_limits<double>::infinity();
    double min_stability = std::numeric_limits<double>::infinity();
    for (const auto& record : report.records) {
        max_stability = std::max(max_stability, record.stability);
        min_stability = std::min(min_stability, record.stability);
    }
    report.no_clustering_tendency =
        (max_stability - min_stability) < config.flat_range_threshold &&
        max_stability < config.low_stability_threshold;

    for (std::size_t di = 0; di < depths.size(); ++di) {
        std::vector<double> curve;
        curve.reserve(num_k);
        for (std::size_t ki = 0; ki < num_k; ++ki) {
            std::vector<double> scores;
            scores.reserve(tau);
            for (std::size_t i = 0; i < tau; ++i)
                scores.push_back(outcomes[ki * tau + i].score_by_depth[di]);
            curve.push_back(mean_of(scores));
        }
        result.curves_by_depth.emplace(depths[di], std::move(curve));
    }
    return result;
}

std::vector<int> find_peaks(const StabilityReport& report) {
    const auto& records = report.records;
    if (records.empty())
        throw std::invalid_argument("find_peaks: report has no records");
    if (records.size() == 1) return {records.front().k};

    std::vector<std::pair<double, int>> peaks; // (-stability would lose ties on k)
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double s = records[i].stability;
        const bool above_left = i == 0 || s > records[i - 1].stability;
        const bool above_right =
            i + 1 == records.size() || s > records[i + 1].stability;
        if (above_left && above_right) peaks.emplace_back(s, records[i].k);
    }
    std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int> out;
    out.reserve(peaks.size());
    for (const auto& [s, k] : peaks) out.push_back(k);
    return out;
}

} // namespace topicstab
