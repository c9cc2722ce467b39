// topicstab: topic-count selection for NMF topic models.
//
// preprocess  raw text -> TF-IDF document-term matrix on disk
// analyze     stability scan over a k range (+ optional consensus baseline)
// synthetic   random corpus with no topical structure (negative control)
// tsweep      stability curves across several ranking depths t
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topicstab/consensus.hpp"
#include "topicstab/corpus.hpp"
#include "topicstab/errors.hpp"
#include "topicstab/factorization.hpp"
#include "topicstab/hashing.hpp"
#include "topicstab/matrix_io.hpp"
#include "topicstab/report.hpp"
#include "topicstab/rng.hpp"
#include "topicstab/stability.hpp"
#include "topicstab/version.hpp"

namespace fs = std::filesystem;
using namespace topicstab;

namespace {

class PhaseTimer {
  public:
    explicit PhaseTimer(RunManifest& manifest) : manifest_(manifest) {}

    template <typename Fn>
    auto time(const std::string& phase, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(phase, start);
        } else {
            auto result = fn();
            record(phase, start);
            return result;
        }
    }

  private:
    void record(const std::string& phase,
                std::chrono::steady_clock::time_point start) {
        const std::chrono::duration<double> elapsed =
            std::chrono::steady_clock::now() - start;
        manifest_.timings.emplace_back(phase, elapsed.count());
    }

    RunManifest& manifest_;
};

std::string hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read " + path.string());
    Fnv1a hash;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        hash.update(buf, static_cast<std::size_t>(in.gcount()));
    return hash.hex();
}

// Directories hash as the ordered sequence of (filename, content hash).
std::string hash_path(const fs::path& path) {
    if (!fs::is_directory(path)) return hash_file(path);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    Fnv1a hash;
    for (const auto& file : files) {
        hash.update(file.filename().string());
        hash.update(std::string_view("\0", 1));
        hash.update(hash_file(file));
        hash.update(std::string_view("\0", 1));
    }
    return hash.hex();
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path.string());
    out << content;
    if (!out) throw data_error("failed writing " + path.string());
}

void write_manifest(const fs::path& dir, const RunManifest& manifest) {
    write_text(dir / "manifest.json", manifest_to_json(manifest));
}

std::string format_weight(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

// Loads a preprocessed corpus and brings it to the weighted representation:
// raw counts are TF-IDF weighted and length-normalized on the fly, an
// already normalized matrix passes through untouched.
DocTermMatrix load_weighted(const fs::path& mtx_path) {
    const DocTermMatrix loaded = load_corpus(sibling_corpus_paths(mtx_path));
    if (loaded.is_normalized()) return loaded;
    return apply_tfidf(loaded);
}

void add_corpus_inputs(RunManifest& manifest, const fs::path& mtx_path) {
    const CorpusPaths paths = sibling_corpus_paths(mtx_path);
    manifest.inputs.emplace_back(paths.mtx.string(), hash_file(paths.mtx));
    manifest.inputs.emplace_back(paths.terms.string(), hash_file(paths.terms));
    manifest.inputs.emplace_back(paths.docs.string(), hash_file(paths.docs));
}

std::string topics_listing(const StabilityRecord& record) {
    std::string out;
    for (std::size_t topic = 0; topic < record.reference_terms.size(); ++topic) {
        if (topic) out += '\n';
        out += "topic " + std::to_string(topic + 1) + "\n";
        const auto& terms = record.reference_terms[topic];
        const auto& weights = record.reference_weights[topic];
        for (std::size_t r = 0; r < terms.size(); ++r) {
            out += "  " + std::to_string(r + 1) + " " + terms[r] + " " +
                   format_weight(weights[r]) + "\n";
        }
    }
    return out;
}

std::string consensus_matrix_csv(const ConsensusMatrix& consensus) {
    std::string out;
    char buf[64];
    for (Eigen::Index i = 0; i < consensus.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < consensus.values.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.6f", consensus.values(i, j));
            if (j) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x == y) return 1.0; // covers degenerate constant-but-equal curves
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double var_x = n * sxx - sx * sx;
    const double var_y = n * syy - sy * sy;
    if (var_x <= 0.0 || var_y <= 0.0) return 0.0; // no linear signal to measure
    return (n * sxy - sx * sy) / (std::sqrt(var_x) * std::sqrt(var_y));
}

struct AnalyzeFlags {
    std::string matrix_path;
    std::string output_dir;
    StabilityConfig config;
    bool baseline = false;
    bool dump_consensus = false;
};

void add_protocol_flags(CLI::App& cmd, AnalyzeFlags& flags) {
    cmd.add_option("--matrix", flags.matrix_path, "Preprocessed corpus .mtx file")
        ->required();
    cmd.add_option("--output", flags.output_dir, "Output directory")->required();
    cmd.add_option("--kmin", flags.config.k_min, "Smallest k to scan")->capture_default_str();
    cmd.add_option("--kmax", flags.config.k_max, "Largest k to scan")->capture_default_str();
    cmd.add_option("--tau", flags.config.tau, "Number of document subsamples")->capture_default_str();
    cmd.add_option("--beta", flags.config.beta, "Sampling ratio in (0,1]")->capture_default_str();
    cmd.add_option("--max-iter", flags.config.max_iter,
                   "Outer iteration cap per factorization")->capture_default_str();
    cmd.add_option("--tol", flags.config.tol,
                   "Relative error-improvement stopping threshold")->capture_default_str();
    cmd.add_option("--seed", flags.config.seed, "Master random seed")->capture_default_str();
    cmd.add_option("--workers", flags.config.workers,
                   "Concurrency cap (0 = hardware); never changes results")->capture_default_str();
}

void echo_protocol_settings(RunManifest& manifest, const AnalyzeFlags& flags) {
    const auto& c = flags.config;
    manifest.settings.emplace_back("kmin", std::to_string(c.k_min));
    manifest.settings.emplace_back("kmax", std::to_string(c.k_max));
    manifest.settings.emplace_back("tau", std::to_string(c.tau));
    manifest.settings.emplace_back("beta", std::to_string(c.beta));
    manifest.settings.emplace_back("top_terms", std::to_string(c.top_terms));
    manifest.settings.emplace_back("max_iter", std::to_string(c.max_iter));
    manifest.settings.emplace_back("tol", std::to_string(c.tol));
    manifest.settings.emplace_back("seed", std::to_string(c.seed));
    manifest.settings.emplace_back("workers", std::to_string(c.workers));
}

int run_preprocess(const std::string& input_path, const std::string& stopword_path,
                   int min_df, const std::string& output_dir) {
    RunManifest manifest;
    manifest.command = "preprocess";
    manifest.version = kVersion;
    manifest.settings.emplace_back("input", input_path);
    manifest.settings.emplace_back("stopwords",
                                   stopword_path.empty() ? "(none)" : stopword_path);
    manifest.settings.emplace_back("min_df", std::to_string(min_df));
    PhaseTimer timer(manifest);

    manifest.inputs.emplace_back(input_path, hash_path(input_path));
    if (!stopword_path.empty())
        manifest.inputs.emplace_back(stopword_path, hash_file(stopword_path));

    const RawCorpus corpus = timer.time("load", [&] {
        return fs::is_directory(input_path) ? load_raw_directory(input_path)
                                            : load_raw_lines(input_path);
    });
    std::unordered_set<std::string> stopwords;
    if (!stopword_path.empty()) stopwords = load_stopwords(stopword_path);

    const DocTermMatrix counts =
        timer.time("build", [&] { return build_matrix(corpus, stopwords, min_df); });
    const DocTermMatrix weighted =
        timer.time("weight", [&] { return apply_tfidf(counts); });

    const fs::path out_dir(output_dir);
    fs::create_directories(out_dir);
    timer.time("write", [&] {
        write_corpus(weighted, sibling_corpus_paths(out_dir / "corpus.mtx"));
    });
    write_manifest(out_dir, manifest);
    std::cout << "preprocess: " << weighted.num_terms() << " terms x "
              << weighted.num_docs() << " documents -> " << out_dir.string() << "\n";
    return 0;
}

int run_analyze(const AnalyzeFlags& flags) {
    RunManifest manifest;
    manifest.command = "analyze";
    manifest.version = kVersion;
    echo_protocol_settings(manifest, flags);
    manifest.settings.emplace_back("baseline", flags.baseline ? "true" : "false");
    PhaseTimer timer(manifest);

    add_corpus_inputs(manifest, flags.matrix_path);
    const DocTermMatrix matrix =
        timer.time("load", [&] { return load_weighted(flags.matrix_path); });

    const fs::path out_dir(flags.output_dir);
    fs::create_directories(out_dir);

    ProtocolOptions options;
    options.baseline = flags.baseline;
    if (flags.dump_consensus) {
        options.consensus_sink = [&out_dir](int k, const ConsensusMatrix& cm) {
            write_text(out_dir / ("consensus_k" + std::to_string(k) + ".csv"),
                       consensus_matrix_csv(cm));
        };
    }
    const ProtocolResult result = timer.time(
        "protocol", [&] { return run_protocol_extended(matrix, flags.config, options); });

    timer.time("write", [&] {
        write_text(out_dir / "stability.csv", report_to_csv(result.report));
        write_text(out_dir / "report.json", report_to_json(result.report));
        for (const auto& record : result.report.records)
            write_text(out_dir / ("topics_k" + std::to_string(record.k) + ".txt"),
                       topics_listing(record));
    });
    write_manifest(out_dir, manifest);

    const std::vector<int> peaks = find_peaks(result.report);
    std::cout << "analyze: k in [" << flags.config.k_min << "," << flags.config.k_max
              << "], tau=" << flags.config.tau << "\n";
    if (result.report.no_clustering_tendency)
        std::cout << "warning: flat, low stability curve - no clustering tendency\n";
    if (peaks.empty()) {
        std::cout << "no stability peaks found\n";
    } else {
        std::cout << "stability peaks (best first):";
        for (const int k : peaks) std::cout << ' ' << k;
        std::cout << "\n";
    }
    for (const auto& record : result.report.records)
        if (record.never_co_sampled_pairs > 0)
            std::cout << "warning: k=" << record.k << ": "
                      << record.never_co_sampled_pairs
                      << " document pairs never co-sampled; consensus entries "
                         "default to 0\n";
    return 0;
}

int run_synthetic(Eigen::Index docs, Eigen::Index terms, std::uint64_t seed,
                  const std::string& output_dir) {
    RunManifest manifest;
    manifest.command = "synthetic";
    manifest.version = kVersion;
    manifest.settings.emplace_back("docs", std::to_string(docs));
    manifest.settings.emplace_back("terms", std::to_string(terms));
    manifest.settings.emplace_back("seed", std::to_string(seed));
    PhaseTimer timer(manifest);

    // Unstructured corpus: every document draws its length uniformly from
    // [50,150] and its term occurrences uniformly over the vocabulary.
    const DocTermMatrix counts = timer.time("generate", [&] {
        Rng rng(derive_seed(seed, seed_domain::synthetic, 0));
        const int id_width =
            static_cast<int>(std::to_string(std::max<Eigen::Index>(terms, docs)).size());
        auto padded = [id_width](char prefix, Eigen::Index value) {
            std::string digits = std::to_string(value);
            return prefix +
                   std::string(static_cast<std::size_t>(id_width) - digits.size(), '0') +
                   digits;
        };

        std::vector<std::map<Eigen::Index, double>> doc_counts(
            static_cast<std::size_t>(docs));
        std::vector<char> term_used(static_cast<std::size_t>(terms), 0);
        for (Eigen::Index d = 0; d < docs; ++d) {
            const std::uint64_t length = 50 + rng.next_below(101);
            for (std::uint64_t t = 0; t < length; ++t) {
                const auto term = static_cast<Eigen::Index>(
                    rng.next_below(static_cast<std::uint64_t>(terms)));
                doc_counts[static_cast<std::size_t>(d)][term] += 1.0;
                term_used[static_cast<std::size_t>(term)] = 1;
            }
        }

        // Only drawn terms enter the vocabulary, so m <= terms. Generated
        // names sort numerically because of the fixed zero padding.
        std::vector<std::string> vocab_terms;
        std::vector<Eigen::Index> term_row(static_cast<std::size_t>(terms), -1);
        for (Eigen::Index t = 0; t < terms; ++t) {
            if (!term_used[static_cast<std::size_t>(t)]) continue;
            term_row[static_cast<std::size_t>(t)] =
                static_cast<Eigen::Index>(vocab_terms.size());
            vocab_terms.push_back(padded('w', t));
        }

        std::vector<std::string> doc_ids;
        doc_ids.reserve(static_cast<std::size_t>(docs));
        std::vector<Eigen::Triplet<double>> triplets;
        for (Eigen::Index d = 0; d < docs; ++d) {
            doc_ids.push_back(padded('d', d));
            for (const auto& [term, count] : doc_counts[static_cast<std::size_t>(d)])
                triplets.emplace_back(
                    static_cast<int>(term_row[static_cast<std::size_t>(term)]),
                    static_cast<int>(d), count);
        }
        DocTermMatrix::Sparse entries(static_cast<Eigen::Index>(vocab_terms.size()),
                                      docs);
        entries.setFromTriplets(triplets.begin(), triplets.end());
        return DocTermMatrix(Vocabulary(std::move(vocab_terms)), std::move(doc_ids),
                             std::move(entries), /*normalized=*/false);
    });

    const DocTermMatrix weighted =
        timer.time("weight", [&] { return apply_tfidf(counts); });
    const fs::path out_dir(output_dir);
    fs::create_directories(out_dir);
    timer.time("write", [&] {
        write_corpus(weighted, sibling_corpus_paths(out_dir / "corpus.mtx"));
    });
    write_manifest(out_dir, manifest);
    std::cout << "synthetic: " << weighted.num_terms() << " terms x "
              << weighted.num_docs() << " documents -> " << out_dir.string() << "\n";
    return 0;
}

int run_tsweep(const AnalyzeFlags& flags, const std::vector<int>& t_values) {
    if (t_values.size() < 2)
        throw std::invalid_argument("tsweep: need at least two --t-values");
    for (const int t : t_values)
        if (t < 1) throw std::invalid_argument("tsweep: t values must be >= 1");

    RunManifest manifest;
    manifest.command = "tsweep";
    manifest.version = kVersion;
    echo_protocol_settings(manifest, flags);
    std::string t_list;
    for (const int t : t_values) {
        if (!t_list.empty()) t_list += ',';
        t_list += std::to_string(t);
    }
    manifest.settings.emplace_back("t_values", t_list);
    PhaseTimer timer(manifest);

    add_corpus_inputs(manifest, flags.matrix_path);
    const DocTermMatrix matrix =
        timer.time("load", [&] { return load_weighted(flags.matrix_path); });

    // All depths are scored from one shared set of factorizations; the
    // primary depth is just the first requested t.
    StabilityConfig config = flags.config;
    config.top_terms = t_values.front();
    ProtocolOptions options;
    options.extra_depths = t_values;
    const ProtocolResult result = timer.time(
        "protocol", [&] { return run_protocol_extended(matrix, config, options); });

    const fs::path out_dir(flags.output_dir);
    fs::create_directories(out_dir);
    timer.time("write", [&] {
        std::string curves = "k";
        for (const int t : t_values) curves += ",t" + std::to_string(t);
        curves += '\n';
        const std::size_t num_k =
            static_cast<std::size_t>(config.k_max - config.k_min + 1);
        for (std::size_t ki = 0; ki < num_k; ++ki) {
            curves += std::to_string(config.k_min + static_cast<int>(ki));
            for (const int t : t_values)
                curves += "," + format_weight(result.curves_by_depth.at(t)[ki]);
            curves += '\n';
        }
        write_text(out_dir / "tsweep_curves.csv", curves);

        std::string corr = "t";
        for (const int t : t_values) corr += "," + std::to_string(t);
        corr += '\n';
        for (const int ta : t_values) {
            corr += std::to_string(ta);
            for (const int tb : t_values)
                corr += "," + format_weight(pearson(result.curves_by_depth.at(ta),
                                                    result.curves_by_depth.at(tb)));
            corr += '\n';
        }
        write_text(out_dir / "tsweep_correlations.csv", corr);
    });
    write_manifest(out_dir, manifest);
    std::cout << "tsweep: wrote curves for t in {" << t_list << "} -> "
              << out_dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topic-count selection for NMF topic models"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // preprocess
    std::string pre_input, pre_stopwords, pre_output;
    int pre_min_df = 20;
    CLI::App* pre = app.add_subcommand(
        "preprocess", "Tokenize raw text into a TF-IDF document-term matrix");
    pre->add_option("--input", pre_input,
                    "Directory of .txt files, or a file with one document per line")
        ->required();
    pre->add_option("--stopwords", pre_stopwords, "Stop-word list, one per line");
    pre->add_option("--min-df", pre_min_df,
                    "Drop terms occurring in fewer documents than this")->capture_default_str();
    pre->add_option("--output", pre_output, "Output directory")->required();

    // analyze
    AnalyzeFlags an;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "Scan k for stable topic counts (optionally with the "
                   "consensus baseline)");
    add_protocol_flags(*analyze, an);
    analyze->add_option("--top-terms", an.config.top_terms,
                        "Ranking depth t per topic")->capture_default_str();
    analyze->add_flag("--baseline", an.baseline,
                      "Also compute the consensus-matrix cophenetic baseline");
    analyze
        ->add_flag("--dump-consensus", an.dump_consensus,
                   "Write the n x n consensus matrix per k (large)")
        ->needs("--baseline");

    // synthetic
    Eigen::Index syn_docs = 500, syn_terms = 1500;
    std::uint64_t syn_seed = 1;
    std::string syn_output;
    CLI::App* synthetic = app.add_subcommand(
        "synthetic", "Generate an unstructured random corpus (negative control)");
    synthetic->add_option("--docs", syn_docs, "Number of documents")->capture_default_str()
        ->check(CLI::PositiveNumber);
    synthetic->add_option("--terms", syn_terms, "Vocabulary size to draw from")->capture_default_str()
        ->check(CLI::PositiveNumber);
    synthetic->add_option("--seed", syn_seed, "Random seed")->capture_default_str();
    synthetic->add_option("--output", syn_output, "Output directory")->required();

    // tsweep
    AnalyzeFlags ts;
    std::vector<int> ts_values;
    CLI::App* tsweep = app.add_subcommand(
        "tsweep", "Compare stability curves across ranking depths t");
    add_protocol_flags(*tsweep, ts);
    tsweep
        ->add_option("--t-values", ts_values,
                     "Comma-separated ranking depths (at least two)")
        ->required()
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (pre->parsed())
            return run_preprocess(pre_input, pre_stopwords, pre_min_df, pre_output);
        if (analyze->parsed()) return run_analyze(an);
        if (synthetic->parsed())
            return run_synthetic(syn_docs, syn_terms, syn_seed, syn_output);
        if (tsweep->parsed()) return run_tsweep(ts, ts_values);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
