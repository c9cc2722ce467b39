#pragma once

#include "topicstab/corpus.hpp"

#include <filesystem>

namespace topicstab {

/// File triple describing one preprocessed corpus: coordinate-format .mtx
/// (1-based, term rows x document columns), .terms (one term per line, line
/// order = row order) and .docs (one document-id per line).
struct CorpusPaths {
    std::filesystem::path mtx;
    std::filesystem::path terms;
    std::filesystem::path docs;
};

/// Derives corpus.terms / corpus.docs next to the given corpus.mtx.
CorpusPaths sibling_corpus_paths(const std::filesystem::path& mtx);

void write_matrix_market(const DocTermMatrix& matrix, const std::filesystem::path& path);
void write_terms(const Vocabulary& vocabulary, const std::filesystem::path& path);
void write_doc_ids(const std::vector<std::string>& doc_ids,
                   const std::filesystem::path& path);

/// Writes the .mtx/.terms/.docs triple.
void write_corpus(const DocTermMatrix& matrix, const CorpusPaths& paths);

/// Loads the triple. The normalized flag is detected from the data: a matrix
/// whose non-empty columns all have unit L2 norm (within 1e-6) is treated as
/// already normalized, anything else as raw counts.
DocTermMatrix load_corpus(const CorpusPaths& paths);

} // namespace topicstab
