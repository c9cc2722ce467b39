#pragma once

#include <string>
#include <utility>
#include <vector>

#include "topicstab/stability.hpp"

namespace topicstab {

/// Full-precision JSON rendering of a stability report: config echo, corpus
/// fingerprint, per-k records, peaks, and the clustering-tendency flag. Key
/// order is fixed, so equal reports serialize to equal bytes. The worker
/// count is deliberately omitted — it never influences results.
std::string report_to_json(const StabilityReport& report);

/// stability.csv content, 6 decimals: header `k,stability,consensus`, the
/// consensus column empty unless the baseline ran, plus a
/// consensus_rescaled column when it did.
std::string report_to_csv(const StabilityReport& report);

/// Provenance sidecar written next to every command's outputs. The timings
/// make this the one output exempt from byte-identity across repeat runs.
struct RunManifest {
    std::string command;
    std::string version;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, content hash
    std::vector<std::pair<std::string, std::string>> settings; // flag, value
    std::vector<std::pair<std::string, double>> timings;       // phase, seconds
};

std::string manifest_to_json(const RunManifest& manifest);

} // namespace topicstab
