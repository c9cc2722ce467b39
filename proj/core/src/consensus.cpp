#include "topicstab/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "topicstab/errors.hpp"
#include "topicstab/factorization.hpp"
#include "topicstab/rng.hpp"
#include "topicstab/stability.hpp"

namespace topicstab {
namespace {

// Flat index into an upper-triangle-with-diagonal array for i <= j: row i
// starts after the i longer rows above it.
inline std::size_t tri_index(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
    const auto ui = static_cast<std::size_t>(i);
    const auto un = static_cast<std::size_t>(n);
    return ui * un - ui * (ui + 1) / 2 + static_cast<std::size_t>(j);
}

} // namespace

ConnectivityMatrix::ConnectivityMatrix(std::vector<int> labels)
    : labels_(std::move(labels)) {
    if (labels_.empty())
        throw std::invalid_argument("connectivity matrix needs at least one document");
}

ConnectivityMatrix connectivity(const Eigen::MatrixXd& h) {
    if (h.rows() < 1 || h.cols() < 1)
        throw std::invalid_argument("connectivity: membership matrix is empty");
    if ((h.array() < 0.0).any())
        throw std::invalid_argument("connectivity: memberships must be non-negative");
    std::vector<int> labels(static_cast<std::size_t>(h.cols()));
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < h.rows(); ++i)
            if (h(i, j) > h(best, j)) best = i;
        if (h(best, j) <= 0.0)
            throw data_error("connectivity: document column " + std::to_string(j) +
                             " is all-zero; no assignable cluster");
        labels[static_cast<std::size_t>(j)] = static_cast<int>(best);
    }
    return ConnectivityMatrix(std::move(labels));
}

ConsensusMatrix accumulate_consensus(
    const std::vector<std::pair<std::vector<Eigen::Index>, ConnectivityMatrix>>& runs,
    Eigen::Index total_docs) {
    if (runs.empty())
        throw std::invalid_argument("accumulate_consensus: need at least one run");
    if (total_docs < 1)
        throw std::invalid_argument("accumulate_consensus: empty document universe");

    const std::size_t slots =
        static_cast<std::size_t>(total_docs) * (static_cast<std::size_t>(total_docs) + 1) / 2;
    std::vector<std::uint32_t> together(slots, 0);
    std::vector<std::uint32_t> observed(slots, 0);

    for (const auto& [indices, conn] : runs) {
        if (static_cast<Eigen::Index>(indices.size()) != conn.size())
            throw std::invalid_argument(
                "accumulate_consensus: index list does not match connectivity size");
        const auto& labels = conn.labels();
        for (std::size_t a = 0; a < indices.size(); ++a) {
            const Eigen::Index ga = indices[a];
            if (ga < 0 || ga >= total_docs)
                throw std::invalid_argument(
                    "accumulate_consensus: document index out of range");
            const std::size_t diag = tri_index(total_docs, ga, ga);
            ++observed[diag];
            ++together[diag];
            for (std::size_t b = a + 1; b < indices.size(); ++b) {
                const Eigen::Index gb = indices[b];
                const std::size_t idx = ga <= gb ? tri_index(total_docs, ga, gb)
                                                 : tri_index(total_docs, gb, ga);
                ++observed[idx];
                if (labels[a] == labels[b]) ++together[idx];
            }
        }
    }

    ConsensusMatrix result;
    result.values.resize(total_docs, total_docs);
    for (Eigen::Index i = 0; i < total_docs; ++i) {
        for (Eigen::Index j = i; j < total_docs; ++j) {
            const std::size_t idx = tri_index(total_docs, i, j);
            double v = 0.0;
            if (observed[idx] > 0)
                v = static_cast<double>(together[idx]) /
                    static_cast<double>(observed[idx]);
            else if (i < j)
                ++result.never_co_sampled_pairs;
            result.values(i, j) = v;
            result.values(j, i) = v;
        }
    }
    return result;
}

Dendrogram agglomerate(const Eigen::MatrixXd& distances, Linkage linkage) {
    const Eigen::Index n = distances.rows();
    if (distances.cols() != n)
        throw std::invalid_argument("agglomerate: distance matrix must be square");
    if (n < 1) throw std::invalid_argument("agglomerate: empty distance matrix");
    if (!distances.allFinite())
        throw std::invalid_argument("agglomerate: distances must be finite");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(distances(i, j) - distances(j, i)) > 1e-12)
                throw std::invalid_argument("agglomerate: distance matrix not symmetric");

    Dendrogram dend;
    dend.leaves = static_cast<int>(n);
    if (n == 1) return dend;
    dend.merges.reserve(static_cast<std::size_t>(n - 1));

    // Slot s hosts one active cluster; a merged cluster lives on in the lower
    // of its two slots, so a slot index always equals the smallest document
    // index inside the cluster — the tie-break below therefore prefers the
    // cluster containing the lowest-numbered document.
    Eigen::MatrixXd d = distances;
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    std::vector<int> size(static_cast<std::size_t>(n), 1);
    std::vector<int> cluster_id(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) cluster_id[static_cast<std::size_t>(i)] = static_cast<int>(i);

    std::vector<Eigen::Index> chain;
    chain.reserve(static_cast<std::size_t>(n));
    int merges_done = 0;
    while (merges_done < n - 1) {
        if (chain.empty()) {
            for (Eigen::Index s = 0; s < n; ++s)
                if (active[static_cast<std::size_t>(s)]) {
                    chain.push_back(s);
                    break;
                }
        }
        const Eigen::Index a = chain.back();
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index nearest = -1;
        for (Eigen::Index c = 0; c < n; ++c) {
            if (c == a || !active[static_cast<std::size_t>(c)]) continue;
            if (d(a, c) < best) {
                best = d(a, c);
                nearest = c;
            }
        }
        // Preferring the previous chain element on exact ties turns equal
        // mutual distances into a reciprocal pair instead of an endless walk.
        if (chain.size() >= 2) {
            const Eigen::Index prev = chain[chain.size() - 2];
            if (d(a, prev) == best) nearest = prev;
        }
        if (chain.size() >= 2 && nearest == chain[chain.size() - 2]) {
            chain.pop_back();
            chain.pop_back();
            const Eigen::Index lo = std::min(a, nearest);
            const Eigen::Index hi = std::max(a, nearest);
            const int ia = cluster_id[static_cast<std::size_t>(lo)];
            const int ib = cluster_id[static_cast<std::size_t>(hi)];
            Dendrogram::Merge merge;
            merge.a = std::min(ia, ib);
            merge.b = std::max(ia, ib);
            merge.height = best;
            merge.size = size[static_cast<std::size_t>(lo)] +
                         size[static_cast<std::size_t>(hi)];
            const double sa = size[static_cast<std::size_t>(lo)];
            const double sb = size[static_cast<std::size_t>(hi)];
            for (Eigen::Index c = 0; c < n; ++c) {
                if (!active[static_cast<std::size_t>(c)] || c == lo || c == hi) continue;
                double updated = 0.0;
                switch (linkage) {
                case Linkage::Average:
                    updated = (sa * d(lo, c) + sb * d(hi, c)) / (sa + sb);
                    break;
                case Linkage::Single:
                    updated = std::min(d(lo, c), d(hi, c));
                    break;
                case Linkage::Complete:
                    updated = std::max(d(lo, c), d(hi, c));
                    break;
                }
                d(lo, c) = updated;
                d(c, lo) = updated;
            }
            active[static_cast<std::size_t>(hi)] = 0;
            size[static_cast<std::size_t>(lo)] = merge.size;
            cluster_id[static_cast<std::size_t>(lo)] =
                static_cast<int>(n) + merges_done;
            dend.merges.push_back(merge);
            ++merges_done;
        } else {
            chain.push_back(nearest);
        }
    }
    return dend;
}

double cophenetic_correlation(const Eigen::MatrixXd& distances,
                              const Dendrogram& dendrogram) {
    const Eigen::Index n = distances.rows();
    if (dendrogram.leaves != n)
        throw std::invalid_argument(
            "cophenetic_correlation: dendrogram does not match the matrix");
    if (n < 3)
        throw std::invalid_argument("cophenetic_correlation: need at least 3 items");
    if (dendrogram.merges.size() != static_cast<std::size_t>(n - 1))
        throw std::invalid_argument("cophenetic_correlation: incomplete dendrogram");

    // Every pair is united by exactly one merge, so all five correlation
    // sums accumulate in a single sweep over merge blocks.
    std::unordered_map<int, std::vector<int>> members;
    members.reserve(static_cast<std::size_t>(2 * n));
    for (Eigen::Index i = 0; i < n; ++i)
        members.emplace(static_cast<int>(i), std::vector<int>{static_cast<int>(i)});

    long double sum_d = 0.0L, sum_d2 = 0.0L, sum_c = 0.0L, sum_c2 = 0.0L,
                sum_dc = 0.0L;
    for (std::size_t m = 0; m < dendrogram.merges.size(); ++m) {
        const auto& merge = dendrogram.merges[m];
        auto it_a = members.find(merge.a);
        auto it_b = members.find(merge.b);
        if (it_a == members.end() || it_b == members.end())
            throw std::invalid_argument(
                "cophenetic_correlation: merge references an unknown cluster");
        const std::vector<int>& ma = it_a->second;
        const std::vector<int>& mb = it_b->second;
        const long double h = merge.height;
        const long double pairs =
            static_cast<long double>(ma.size()) * static_cast<long double>(mb.size());
        sum_c += h * pairs;
        sum_c2 += h * h * pairs;
        for (const int x : ma) {
            for (const int y : mb) {
                const long double dist = distances(x, y);
                sum_d += dist;
                sum_d2 += dist * dist;
                sum_dc += h * dist;
            }
        }
        std::vector<int> merged = std::move(it_a->second);
        merged.insert(merged.end(), mb.begin(), mb.end());
        members.erase(it_a);
        members.erase(it_b);
        members.emplace(static_cast<int>(n) + static_cast<int>(m), std::move(merged));
    }

    const long double count = static_cast<long double>(n) *
                              static_cast<long double>(n - 1) / 2.0L;
    const long double var_d = count * sum_d2 - sum_d * sum_d;
    const long double var_c = count * sum_c2 - sum_c * sum_c;
    if (var_d <= 0.0L)
        throw numerical_error(
            "cophenetic correlation undefined: distances are constant");
    if (var_c <= 0.0L)
        throw numerical_error(
            "cophenetic correlation undefined: merge heights are constant");
    const long double r =
        (count * sum_dc - sum_d * sum_c) / (std::sqrt(var_d) * std::sqrt(var_c));
    return static_cast<double>(r);
}

double cophenetic_score(const ConsensusMatrix& consensus, Linkage linkage) {
    const Eigen::Index n = consensus.values.rows();
    if (n < 3)
        throw std::invalid_argument("cophenetic_score: need at least 3 documents");
    const Eigen::MatrixXd dist =
        Eigen::MatrixXd::Constant(n, n, 1.0) - consensus.values;
    const Dendrogram dend = agglomerate(dist, linkage);
    return cophenetic_correlation(dist, dend);
}

double consensus_for_k(const DocTermMatrix& matrix,
                       const std::vector<DocTermMatrix>& samples, int k,
                       const StabilityConfig& config) {
    if (samples.empty())
        throw std::invalid_argument("consensus_for_k: no samples");

    std::unordered_map<std::string, Eigen::Index> doc_index;
    doc_index.reserve(matrix.doc_ids().size());
    for (std::size_t i = 0; i < matrix.doc_ids().size(); ++i)
        doc_index.emplace(matrix.doc_ids()[i], static_cast<Eigen::Index>(i));

    std::vector<std::pair<std::vector<Eigen::Index>, ConnectivityMatrix>> runs;
    runs.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::uint64_t run_seed =
            derive_seed(config.seed, seed_domain::factorization,
                        static_cast<std::uint64_t>(k), i);
        const Factorization f = nmf(samples[i], k, InitStrategy::RandomUniform,
                                    config.max_iter, config.tol, run_seed);
        std::vector<Eigen::Index> indices;
        indices.reserve(samples[i].doc_ids().size());
        for (const auto& id : samples[i].doc_ids()) {
            const auto it = doc_index.find(id);
            if (it == doc_index.end())
                throw std::invalid_argument(
                    "consensus_for_k: sample document missing from the corpus");
            indices.push_back(it->second);
        }
        runs.emplace_back(std::move(indices), connectivity(f.H));
    }
    const ConsensusMatrix consensus =
        accumulate_consensus(runs, matrix.num_docs());
    return cophenetic_score(consensus, Linkage::Average);
}

std::vector<double> rescale_consensus(const std::vector<double>& scores,
                                      double floor_value) {
    if (!(floor_value < 1.0))
        throw std::invalid_argument("rescale_consensus: floor must be below 1");
    if (scores.empty()) return {};
    const double max_observed = *std::max_element(scores.begin(), scores.end());
    const double span = max_observed - floor_value;
    std::vector<double> out;
    out.reserve(scores.size());
    for (const double s : scores) {
        if (span <= 0.0) {
            out.push_back(0.0);
            continue;
        }
        out.push_back(std::clamp((s - floor_value) / span, 0.0, 1.0));
    }
    return out;
}

} // namespace topicstab
