// Acceptance gate: one line per shipped claim, pass/fail/skip, nonzero exit
// on any failure. Criteria touching the published news corpora accept a
// corpus directory through TOPICSTAB_BBC_DIR / TOPICSTAB_GUARDIAN_DIR and
// otherwise run on a planted-topic stand-in of the same shape, which checks
// the same structural claim (the scan recovers the true topic count).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "support/builders.hpp"
#include "support/oracles.hpp"
#include "topicstab/agreement.hpp"
#include "topicstab/consensus.hpp"
#include "topicstab/factorization.hpp"
#include "topicstab/matrix_io.hpp"
#include "topicstab/ranking.hpp"
#include "topicstab/report.hpp"
#include "topicstab/rng.hpp"
#include "topicstab/stability.hpp"

namespace {

using topicstab::DocTermMatrix;
using topicstab::StabilityConfig;

int g_failures = 0;

void report(int id, const std::string& verdict, const std::string& detail) {
    std::cout << "[" << verdict << "] criterion " << id << ": " << detail << "\n";
    if (verdict == "FAIL") ++g_failures;
}

void run(int id, const std::string& what,
         const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(id, ok ? "PASS" : "FAIL",
               what + (detail.empty() ? "" : " - " + detail));
    } catch (const std::exception& e) {
        report(id, "FAIL", what + " - exception: " + e.what());
    }
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

// ---- criterion 1: golden scores of the worked five-term pair ----

std::pair<bool, std::string> table_goldens() {
    const std::vector<int> r1 = {0, 1, 2, 3, 4}; // album music best award win
    const std::vector<int> r2 = {5, 2, 4, 6, 3}; // sport best win medal award
    const std::vector<long> depth_expected = {0, 0, 200, 143, 429};
    const std::vector<long> running_expected = {0, 0, 67, 86, 154};
    for (int d = 1; d <= 5; ++d) {
        const long got =
            std::lround(topicstab::jaccard_at_depth(r1, r2, d) * 1000.0);
        if (got != depth_expected[static_cast<std::size_t>(d - 1)])
            return {false, "depth " + std::to_string(d) + " jaccard off: " +
                               std::to_string(got) + "/1000"};
        const long avg =
            std::lround(topicstab::average_jaccard(r1, r2, d) * 1000.0);
        if (avg != running_expected[static_cast<std::size_t>(d - 1)])
            return {false, "running average at t=" + std::to_string(d) +
                               " off: " + std::to_string(avg) + "/1000"};
    }
    return {true, "per-depth and running scores match at 3 decimals"};
}

// ---- criterion 2: assignment optimality against exhaustive search ----

std::pair<bool, std::string> assignment_oracle() {
    topicstab::Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd m(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) m(i, j) = rng.next_open01();
        const double oracle = testsupport::exhaustive_best_match(m).first;
        const std::vector<int> got = topicstab::best_match(m);
        double total = 0.0;
        for (int i = 0; i < 6; ++i) total += m(i, got[static_cast<std::size_t>(i)]);
        if (std::abs(total - oracle) > 1e-9)
            return {false, "trial " + std::to_string(trial) + ": " + fmt(total) +
                               " vs exhaustive " + fmt(oracle)};
    }
    return {true, "100/100 matchings equal the 720-permutation maximum"};
}

// ---- criteria 3/4/6 share one scan of the reference corpus ----

struct ScanOutcome {
    topicstab::ProtocolResult result;
    bool stand_in = false;
};

DocTermMatrix load_corpus_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::path mtx = dir;
    if (fs::is_directory(dir)) {
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".mtx") {
                mtx = entry.path();
                break;
            }
    }
    DocTermMatrix loaded = topicstab::load_corpus(topicstab::sibling_corpus_paths(mtx));
    if (loaded.is_normalized()) return loaded;
    return topicstab::apply_tfidf(loaded);
}

ScanOutcome scan_reference_corpus() {
    ScanOutcome outcome;
    std::optional<DocTermMatrix> matrix;
    if (const char* dir = std::getenv("TOPICSTAB_BBC_DIR")) {
        matrix = load_corpus_dir(dir);
    } else {
        outcome.stand_in = true;
        matrix = testsupport::planted_corpus({.topics = 5,
                                              .docs_per_topic = {90, 95, 100, 105, 110},
                                              .terms_per_topic = 110,
                                              .doc_len_min = 60,
                                              .doc_len_max = 120,
                                              .seed = 42});
    }
    StabilityConfig config;
    config.k_min = 2;
    config.k_max = 12;
    config.tau = 20;
    config.beta = 0.8;
    config.top_terms = 20;
    config.max_iter = 50;
    config.seed = 1;

    topicstab::ProtocolOptions options;
    options.baseline = true;
    options.extra_depths = {10, 20, 50, 100};
    outcome.result = topicstab::run_protocol_extended(*matrix, config, options);
    return outcome;
}

std::string corpus_note(const ScanOutcome& scan) {
    return scan.stand_in
               ? " [planted 5-topic stand-in; set TOPICSTAB_BBC_DIR to use the "
                 "published corpus]"
               : " [published corpus]";
}

std::pair<bool, std::string> stability_argmax(const ScanOutcome& scan) {
    const auto& records = scan.result.report.records;
    const auto best = std::max_element(
        records.begin(), records.end(),
        [](const auto& a, const auto& b) { return a.stability < b.stability; });
    const int argmax = best->k;
    std::string curve;
    for (const auto& r : records)
        curve += " " + std::to_string(r.k) + ":" + fmt(r.stability);
    return {argmax == 5,
            "argmax_k stability = " + std::to_string(argmax) + " (want 5);" + curve +
                corpus_note(scan)};
}

std::pair<bool, std::string> consensus_local_max(const ScanOutcome& scan) {
    const auto& records = scan.result.report.records;
    double at4 = 0, at5 = 0, at6 = 0;
    for (const auto& r : records) {
        if (!r.consensus) return {false, "consensus column missing"};
        if (r.k == 4) at4 = *r.consensus;
        if (r.k == 5) at5 = *r.consensus;
        if (r.k == 6) at6 = *r.consensus;
    }
    const bool strict = at5 > at4 && at5 > at6;
    return {strict, "consensus " + fmt(at4) + " @4, " + fmt(at5) + " @5, " +
                        fmt(at6) + " @6" + corpus_note(scan)};
}

std::pair<bool, std::string> depth_insensitivity(const ScanOutcome& scan) {
    const std::vector<int> depths = {10, 20, 50, 100};
    double worst = 1.0;
    std::string detail;
    for (std::size_t a = 0; a < depths.size(); ++a)
        for (std::size_t b = a + 1; b < depths.size(); ++b) {
            const double r = testsupport::pearson(
                scan.result.curves_by_depth.at(depths[a]),
                scan.result.curves_by_depth.at(depths[b]));
            if (r < worst) {
                worst = r;
                detail = "t" + std::to_string(depths[a]) + " vs t" +
                         std::to_string(depths[b]);
            }
        }
    return {worst > 0.9, "lowest pairwise curve correlation " + fmt(worst) +
                             (detail.empty() ? "" : " (" + detail + ")") +
                             ", threshold 0.9" + corpus_note(scan)};
}

// ---- criterion 5: negative control fires the no-structure flag ----

std::pair<bool, std::string> negative_control() {
    testsupport::TempDir dir;
    const std::string command = std::string(TOPICSTAB_CLI_PATH) +
                                " synthetic --docs 500 --terms 1500 --seed 1 "
                                "--output " +
                                (dir / "syn").string() + " > " +
                                (dir / "log.txt").string() + " 2>&1";
    const int status = std::system(command.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        return {false, "synthetic generation failed"};

    const DocTermMatrix corpus = topicstab::load_corpus(
        topicstab::sibling_corpus_paths(dir / "syn" / "corpus.mtx"));
    StabilityConfig config;
    config.k_min = 2;
    config.k_max = 12;
    config.tau = 20;
    config.top_terms = 20;
    config.seed = 1;
    const auto report = topicstab::run_protocol(corpus, config);

    double max_s = 0.0, min_s = 1.0;
    for (const auto& r : report.records) {
        max_s = std::max(max_s, r.stability);
        min_s = std::min(min_s, r.stability);
    }
    return {report.no_clustering_tendency,
            "flag " + std::string(report.no_clustering_tendency ? "set" : "NOT set") +
                "; stability range [" + fmt(min_s) + ", " + fmt(max_s) +
                "] (need range < 0.1 and max < 0.5)"};
}

// ---- criterion 7: property suites ----

std::pair<bool, std::string> property_suites() {
    // Ranked-list agreement: symmetry, bounds, identity on 1000 pairs.
    topicstab::Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const int t = 1 + static_cast<int>(rng.next_below(12));
        const auto r1 =
            testsupport::random_list(rng, 20, static_cast<int>(rng.next_below(13)));
        const auto r2 =
            testsupport::random_list(rng, 20, static_cast<int>(rng.next_below(13)));
        const double ab = topicstab::average_jaccard(r1, r2, t);
        const double ba = topicstab::average_jaccard(r2, r1, t);
        if (ab != ba) return {false, "average-jaccard asymmetry"};
        if (ab < 0.0 || ab > 1.0) return {false, "average-jaccard out of bounds"};
        if (!r1.empty() && topicstab::average_jaccard(r1, r1, t) != 1.0)
            return {false, "identity pair below 1"};
    }

    // Topic-model agreement: permutation invariance on 200 ranking-set pairs.
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(5));
        const int t = 2 + static_cast<int>(rng.next_below(5));
        const auto sx = testsupport::random_ranking_set(rng, k, 25, t);
        auto sy = testsupport::random_ranking_set(rng, k, 25, t);
        const double base = topicstab::agree(sx, sy).score;
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(
                                   rng.next_below(static_cast<std::uint64_t>(k - i)));
            std::swap(sy.topics[static_cast<std::size_t>(i)],
                      sy.topics[static_cast<std::size_t>(j)]);
        }
        if (std::abs(topicstab::agree(sx, sy).score - base) > 1e-12)
            return {false, "agreement changed under topic permutation"};
    }

    // Factorization descent: monotone error traces on 50 random matrices.
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index m = 12 + static_cast<Eigen::Index>(rng.next_below(12));
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.next_below(10));
        std::vector<double> values(static_cast<std::size_t>(m * n), 0.0);
        for (auto& v : values)
            if (rng.next_open01() < 0.5) v = rng.next_open01();
        const DocTermMatrix matrix = testsupport::make_matrix(m, n, values);
        const auto f = topicstab::nmf(matrix, 3,
                                      topicstab::InitStrategy::RandomUniform, 25,
                                      0.0, rng.next());
        for (std::size_t i = 1; i < f.error_trace.size(); ++i)
            if (f.error_trace[i] > f.error_trace[i - 1] + 1e-6)
                return {false, "error trace rose at iteration " + std::to_string(i)};
    }

    // Deterministic init: three bitwise-identical runs.
    {
        const auto corpus = testsupport::planted_corpus({.topics = 2,
                                                         .docs_per_topic = {15, 15},
                                                         .terms_per_topic = 20,
                                                         .seed = 6});
        const auto a = topicstab::nndsvd_init(corpus, 4);
        const auto b = topicstab::nndsvd_init(corpus, 4);
        const auto c = topicstab::nndsvd_init(corpus, 4);
        if (!(a.first.array() == b.first.array()).all() ||
            !(a.first.array() == c.first.array()).all() ||
            !(a.second.array() == b.second.array()).all() ||
            !(a.second.array() == c.second.array()).all())
            return {false, "deterministic init differed across runs"};
    }

    // End-to-end determinism: two byte-identical reports.
    {
        const auto corpus = testsupport::planted_corpus({.topics = 3,
                                                         .docs_per_topic = {12, 12, 12},
                                                         .terms_per_topic = 15,
                                                         .doc_len_min = 25,
                                                         .doc_len_max = 45,
                                                         .seed = 31});
        StabilityConfig config;
        config.k_min = 2;
        config.k_max = 4;
        config.tau = 3;
        config.top_terms = 5;
        config.seed = 23;
        const std::string first = topicstab::report_to_json(
            topicstab::run_protocol(corpus, config));
        const std::string second = topicstab::report_to_json(
            topicstab::run_protocol(corpus, config));
        if (first != second) return {false, "reports differ across reruns"};
    }

    // Consensus matrices: symmetry and bounds on random label runs.
    {
        std::vector<std::pair<std::vector<Eigen::Index>, topicstab::ConnectivityMatrix>>
            runs;
        const Eigen::Index n = 25;
        for (int run = 0; run < 10; ++run) {
            std::vector<Eigen::Index> sampled;
            std::vector<int> labels;
            for (Eigen::Index d = 0; d < n; ++d)
                if (rng.next_open01() < 0.8) {
                    sampled.push_back(d);
                    labels.push_back(static_cast<int>(rng.next_below(4)));
                }
            runs.emplace_back(std::move(sampled),
                              topicstab::ConnectivityMatrix(labels));
        }
        const auto cm = topicstab::accumulate_consensus(runs, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (cm.values(i, j) != cm.values(j, i))
                    return {false, "consensus asymmetry"};
                if (cm.values(i, j) < 0.0 || cm.values(i, j) > 1.0)
                    return {false, "consensus entry out of bounds"};
            }
    }

    // Cophenetic correlation is exactly 1 on block-diagonal consensus.
    for (const std::vector<int>& blocks :
         {std::vector<int>{3, 4}, std::vector<int>{5, 2, 6}}) {
        const int n = std::accumulate(blocks.begin(), blocks.end(), 0);
        Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, n);
        int at = 0;
        for (const int b : blocks) {
            values.block(at, at, b, b).setOnes();
            at += b;
        }
        topicstab::ConsensusMatrix cm;
        cm.values = values;
        const double score = topicstab::cophenetic_score(cm);
        if (std::abs(score - 1.0) > 1e-12)
            return {false, "block-diagonal cophenetic score " + fmt(score)};
    }

    return {true,
            "1000 similarity pairs, 200 matchings, 50 factorizations, "
            "3 deterministic inits, 2 identical reports, consensus checks"};
}

// ---- criterion 8: optional second-corpus multi-peak check ----

void guardian_check() {
    const char* dir = std::getenv("TOPICSTAB_GUARDIAN_DIR");
    if (dir == nullptr) {
        report(8, "SKIP",
               "multi-peak check needs an external corpus; set "
               "TOPICSTAB_GUARDIAN_DIR to run it");
        return;
    }
    run(8, "peaks at k=3 and k=6 on the second corpus", [&] {
        const DocTermMatrix matrix = load_corpus_dir(dir);
        StabilityConfig config;
        config.k_min = 2;
        config.k_max = 12;
        config.tau = 20;
        config.top_terms = 20;
        config.seed = 1;
        const auto report_data = topicstab::run_protocol(matrix, config);
        const auto peaks = topicstab::find_peaks(report_data);
        const bool has3 = std::find(peaks.begin(), peaks.end(), 3) != peaks.end();
        const bool has6 = std::find(peaks.begin(), peaks.end(), 6) != peaks.end();
        std::string listing;
        for (const int k : peaks) listing += " " + std::to_string(k);
        return std::make_pair(has3 && has6, "peaks:" + listing);
    });
}

} // namespace

int main() {
    std::cout << "acceptance gate\n";

    run(1, "worked-example scores match the published table", table_goldens);
    run(2, "matching equals exhaustive search on 100 random 6x6 inputs",
        assignment_oracle);

    ScanOutcome scan;
    bool scan_ok = false;
    std::string scan_error;
    try {
        scan = scan_reference_corpus();
        scan_ok = true;
    } catch (const std::exception& e) {
        scan_error = e.what();
    }

    if (scan_ok)
        run(3, "stability argmax sits at the true topic count",
            [&] { return stability_argmax(scan); });
    else
        report(3, "FAIL", "reference scan failed: " + scan_error);

    if (scan_ok)
        run(4, "consensus baseline peaks at the same count",
            [&] { return consensus_local_max(scan); });
    else
        report(4, "FAIL", "reference scan failed");

    run(5, "random corpus raises the no-clustering-tendency flag",
        negative_control);

    if (scan_ok)
        run(6, "stability curves agree across ranking depths 10/20/50/100",
            [&] { return depth_insensitivity(scan); });
    else
        report(6, "FAIL", "reference scan failed");

    run(7, "property suites", property_suites);
    guardian_check();

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria satisfied\n";
    return 0;
}
