#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace topicstab {

struct Document {
    std::string id;
    std::string text;
};

/// Ordered list of raw documents. Ids must be unique and non-empty; document
/// order is meaningful (column index downstream).
struct RawCorpus {
    std::vector<Document> documents;
};

/// Ordered term list with its inverse index. Terms are unique, lowercase,
/// non-empty.
class Vocabulary {
  public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> terms);

    std::size_t size() const { return terms_.size(); }
    const std::vector<std::string>& terms() const { return terms_; }
    const std::string& term(std::size_t i) const { return terms_[i]; }
    /// Returns the term's position, or -1 when absent.
    int index_of(std::string_view term) const;

  private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, int> index_;
};

/// Sparse non-negative terms x documents matrix. Stored weights are strictly
/// positive; zeros are structural. Immutable after construction.
class DocTermMatrix {
  public:
    using Sparse = Eigen::SparseMatrix<double>;

    DocTermMatrix(Vocabulary vocabulary, std::vector<std::string> doc_ids,
                  Sparse entries, bool normalized);
    DocTermMatrix(std::shared_ptr<const Vocabulary> vocabulary,
                  std::vector<std::string> doc_ids, Sparse entries, bool normalized);

    Eigen::Index num_terms() const { return entries_.rows(); }
    Eigen::Index num_docs() const { return entries_.cols(); }
    const Sparse& entries() const { return entries_; }
    const Vocabulary& vocabulary() const { return *vocabulary_; }
    std::shared_ptr<const Vocabulary> vocabulary_ptr() const { return vocabulary_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }

    /// True once TF-IDF weighting and L2 document normalization have run.
    bool is_normalized() const { return normalized_; }

    /// L2 norm of every document column.
    std::vector<double> column_norms() const;

    /// FNV-1a fingerprint of dimensions, vocabulary, doc ids and entries.
    std::string content_hash() const;

  private:
    std::shared_ptr<const Vocabulary> vocabulary_;
    std::vector<std::string> doc_ids_;
    Sparse entries_;
    bool normalized_ = false;
};

/// Lowercased alphabetic tokens; anything non-alphabetic separates; tokens
/// shorter than 2 characters are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Raw term counts over the filtered vocabulary: stop words and terms with
/// document frequency < min_df removed, vocabulary sorted lexicographically.
/// Throws data_error when the vocabulary comes out empty.
DocTermMatrix build_matrix(const RawCorpus& corpus,
                           const std::unordered_set<std::string>& stopwords,
                           int min_df);

/// (1 + ln tf) * ln(n / df) weighting followed by unit L2 scaling of each
/// non-empty document column. Terms present in every document get weight 0
/// and are dropped. Throws data_error when the matrix is already normalized.
DocTermMatrix apply_tfidf(const DocTermMatrix& matrix);

/// The deterministic without-replacement column selection behind
/// sample_columns, exposed for reuse; indices come back sorted ascending.
std::vector<Eigen::Index> sample_column_indices(Eigen::Index n, double ratio,
                                                std::uint64_t seed);

/// The submatrix holding exactly the given document columns, in the given
/// order. The full vocabulary is retained.
DocTermMatrix take_columns(const DocTermMatrix& matrix,
                           const std::vector<Eigen::Index>& indices);

/// Column subsample of floor(ratio * n) documents, without replacement,
/// deterministic given seed. The full vocabulary is retained and document
/// order is preserved relative to the original.
DocTermMatrix sample_columns(const DocTermMatrix& matrix, double ratio,
                             std::uint64_t seed);

/// One UTF-8 .txt file per document, filename = document-id, lexicographic
/// order.
RawCorpus load_raw_directory(const std::filesystem::path& dir);

/// One document per line, 1-based line number = document-id.
RawCorpus load_raw_lines(const std::filesystem::path& file);

/// Plain text stop-word list, one word per line (lowercased on load).
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& file);

} // namespace topicstab
