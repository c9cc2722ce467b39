#include "topicstab/report.hpp"

#include <cstdio>

#include <json.hpp>

namespace topicstab {
namespace {

std::string format_fixed(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

} // namespace

std::string report_to_json(const StabilityReport& report) {
    nlohmann::ordered_json j;
    auto& config = j["config"];
    config["k_min"] = report.config.k_min;
    config["k_max"] = report.config.k_max;
    config["tau"] = report.config.tau;
    config["beta"] = report.config.beta;
    config["top_terms"] = report.config.top_terms;
    config["max_iter"] = report.config.max_iter;
    config["tol"] = report.config.tol;
    config["seed"] = report.config.seed;
    config["flat_range_threshold"] = report.config.flat_range_threshold;
    config["low_stability_threshold"] = report.config.low_stability_threshold;

    auto& corpus = j["corpus"];
    corpus["terms"] = report.num_terms;
    corpus["documents"] = report.num_docs;
    corpus["hash"] = report.corpus_hash;

    auto& records = j["records"] = nlohmann::json::array();
    for (const auto& record : report.records) {
        nlohmann::ordered_json r;
        r["k"] = record.k;
        r["stability"] = record.stability;
        r["sample_scores"] = record.sample_scores;
        r["reference_topics"] = record.reference_terms;
        if (record.consensus) {
            r["consensus"] = *record.consensus;
            r["consensus_rescaled"] = *record.consensus_rescaled;
            r["never_co_sampled_pairs"] = record.never_co_sampled_pairs;
        }
        records.push_back(std::move(r));
    }

    j["peaks"] = find_peaks(report);
    j["no_clustering_tendency"] = report.no_clustering_tendency;
    return j.dump(2) + "\n";
}

std::string report_to_csv(const StabilityReport& report) {
    const bool baseline =
        !report.records.empty() && report.records.front().consensus.has_value();
    std::string out = baseline ? "k,stability,consensus,consensus_rescaled\n"
                               : "k,stability,consensus\n";
    for (const auto& record : report.records) {
        out += std::to_string(record.k);
        out += ',';
        out += format_fixed(record.stability);
        out += ',';
        if (record.consensus) {
            out += format_fixed(*record.consensus);
            out += ',';
            out += format_fixed(*record.consensus_rescaled);
        }
        out += '\n';
    }
    return out;
}

std::string manifest_to_json(const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["command"] = manifest.command;
    j["version"] = manifest.version;
    auto& inputs = j["inputs"] = nlohmann::json::array();
    for (const auto& [path, hash] : manifest.inputs) {
        nlohmann::ordered_json entry;
        entry["path"] = path;
        entry["hash"] = hash;
        inputs.push_back(std::move(entry));
    }
    auto& settings = j["settings"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : manifest.settings) settings[key] = value;
    auto& timings = j["timings_seconds"] = nlohmann::ordered_json::object();
    for (const auto& [phase, seconds] : manifest.timings) timings[phase] = seconds;
    return j.dump(2) + "\n";
}

} // namespace topicstab
