#include "topicstab/corpus.hpp"

#include "topicstab/errors.hpp"
#include "topicstab/hashing.hpp"
#include "topicstab/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace topicstab {

namespace {

bool is_lower_nonempty(const std::string& s) {
    if (s.empty()) return false;
    return std::none_of(s.begin(), s.end(),
                        [](unsigned char c) { return std::isupper(c); });
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

} // namespace

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!is_lower_nonempty(terms_[i]))
            throw data_error("vocabulary term must be lowercase and non-empty: '" +
                             terms_[i] + "'");
        auto [it, inserted] = index_.emplace(terms_[i], static_cast<int>(i));
        if (!inserted) throw data_error("duplicate vocabulary term: '" + terms_[i] + "'");
    }
}

int Vocabulary::index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    return it == index_.end() ? -1 : it->second;
}

DocTermMatrix::DocTermMatrix(Vocabulary vocabulary, std::vector<std::string> doc_ids,
                             Sparse entries, bool normalized)
    : DocTermMatrix(std::make_shared<const Vocabulary>(std::move(vocabulary)),
                    std::move(doc_ids), std::move(entries), normalized) {}

DocTermMatrix::DocTermMatrix(std::shared_ptr<const Vocabulary> vocabulary,
                             std::vector<std::string> doc_ids, Sparse entries,
                             bool normalized)
    : vocabulary_(std::move(vocabulary)),
      doc_ids_(std::move(doc_ids)),
      entries_(std::move(entries)),
      normalized_(normalized) {
    if (static_cast<std::size_t>(entries_.rows()) != vocabulary_->size())
        throw data_error("row count does not match vocabulary size");
    if (static_cast<std::size_t>(entries_.cols()) != doc_ids_.size())
        throw data_error("column count does not match document-id count");
    for (int j = 0; j < entries_.outerSize(); ++j)
        for (Sparse::InnerIterator it(entries_, j); it; ++it)
            if (!(it.value() > 0.0) || !std::isfinite(it.value()))
                throw data_error("matrix entries must be finite and strictly positive");
    entries_.prune(0.0);
    entries_.makeCompressed();
}

std::vector<double> DocTermMatrix::column_norms() const {
    std::vector<double> norms(static_cast<std::size_t>(entries_.cols()), 0.0);
    for (int j = 0; j < entries_.outerSize(); ++j) {
        double sq = 0.0;
        for (Sparse::InnerIterator it(entries_, j); it; ++it) sq += it.value() * it.value();
        norms[static_cast<std::size_t>(j)] = std::sqrt(sq);
    }
    return norms;
}

std::string DocTermMatrix::content_hash() const {
    Fnv1a h;
    h.update_value(static_cast<std::uint64_t>(entries_.rows()));
    h.update_value(static_cast<std::uint64_t>(entries_.cols()));
    h.update_value(static_cast<std::uint8_t>(normalized_));
    for (const auto& t : vocabulary_->terms()) {
        h.update(t);
        h.update("\0", 1);
    }
    for (const auto& d : doc_ids_) {
        h.update(d);
        h.update("\0", 1);
    }
    for (int j = 0; j < entries_.outerSize(); ++j)
        for (Sparse::InnerIterator it(entries_, j); it; ++it) {
            h.update_value(static_cast<std::int32_t>(it.row()));
            h.update_value(static_cast<std::int32_t>(it.col()));
            h.update_value(it.value());
        }
    return h.hex();
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalpha(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            if (current.size() >= 2) tokens.push_back(current);
            current.clear();
        }
    }
    if (current.size() >= 2) tokens.push_back(std::move(current));
    return tokens;
}

DocTermMatrix build_matrix(const RawCorpus& corpus,
                           const std::unordered_set<std::string>& stopwords,
                           int min_df) {
    if (min_df < 1) throw std::invalid_argument("min_df must be >= 1");

    std::unordered_set<std::string> seen_ids;
    seen_ids.reserve(corpus.documents.size());
    for (const auto& doc : corpus.documents) {
        if (doc.id.empty()) throw data_error("document id must be non-empty");
        if (!seen_ids.insert(doc.id).second)
            throw data_error("duplicate document id: '" + doc.id + "'");
    }

    const auto n = corpus.documents.size();
    std::vector<std::unordered_map<std::string, int>> doc_counts(n);
    std::unordered_map<std::string, int> document_frequency;
    for (std::size_t j = 0; j < n; ++j) {
        auto& counts = doc_counts[j];
        for (auto& tok : tokenize(corpus.documents[j].text)) ++counts[tok];
        for (const auto& [term, count] : counts) ++document_frequency[term];
    }

    std::vector<std::string> kept;
    for (const auto& [term, df] : document_frequency)
        if (df >= min_df && !stopwords.contains(term)) kept.push_back(term);
    std::sort(kept.begin(), kept.end());
    if (kept.empty()) throw data_error("vocabulary is empty after filtering");

    Vocabulary vocabulary(std::move(kept));

    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t j = 0; j < n; ++j)
        for (const auto& [term, count] : doc_counts[j]) {
            const int row = vocabulary.index_of(term);
            if (row >= 0)
                triplets.emplace_back(row, static_cast<int>(j),
                                      static_cast<double>(count));
        }

    DocTermMatrix::Sparse entries(static_cast<Eigen::Index>(vocabulary.size()),
                                  static_cast<Eigen::Index>(n));
    entries.setFromTriplets(triplets.begin(), triplets.end());

    std::vector<std::string> doc_ids;
    doc_ids.reserve(n);
    for (const auto& doc : corpus.documents) doc_ids.push_back(doc.id);

    return DocTermMatrix(std::move(vocabulary), std::move(doc_ids),
                         std::move(entries), /*normalized=*/false);
}

DocTermMatrix apply_tfidf(const DocTermMatrix& matrix) {
    if (matrix.is_normalized())
        throw data_error("matrix is already TF-IDF normalized");

    const auto& counts = matrix.entries();
    const auto n = static_cast<double>(matrix.num_docs());

    std::vector<int> df(static_cast<std::size_t>(matrix.num_terms()), 0);
    for (int j = 0; j < counts.outerSize(); ++j)
        for (DocTermMatrix::Sparse::InnerIterator it(counts, j); it; ++it) {
            if (it.value() < 1.0)
                throw data_error("apply_tfidf expects raw counts (entry < 1 found)");
            ++df[static_cast<std::size_t>(it.row())];
        }

    DocTermMatrix::Sparse weighted(matrix.num_terms(), matrix.num_docs());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(counts.nonZeros()));
    for (int j = 0; j < counts.outerSize(); ++j)
        for (DocTermMatrix::Sparse::InnerIterator it(counts, j); it; ++it) {
            const int d = df[static_cast<std::size_t>(it.row())];
            if (static_cast<double>(d) == n) continue; // idf = 0, dropped
            const double w = (1.0 + std::log(it.value())) * std::log(n / d);
            triplets.emplace_back(it.row(), it.col(), w);
        }
    weighted.setFromTriplets(triplets.begin(), triplets.end());

    for (int j = 0; j < weighted.outerSize(); ++j) {
        double sq = 0.0;
        for (DocTermMatrix::Sparse::InnerIterator it(weighted, j); it; ++it)
            sq += it.value() * it.value();
        if (sq <= 0.0) continue; // empty column permitted
        const double inv = 1.0 / std::sqrt(sq);
        for (DocTermMatrix::Sparse::InnerIterator it(weighted, j); it; ++it)
            it.valueRef() *= inv;
    }

    return DocTermMatrix(matrix.vocabulary_ptr(), matrix.doc_ids(),
                         std::move(weighted), /*normalized=*/true);
}

std::vector<Eigen::Index> sample_column_indices(Eigen::Index n, double ratio,
                                                std::uint64_t seed) {
    if (!(ratio > 0.0) || ratio > 1.0)
        throw std::invalid_argument("sampling ratio must lie in (0, 1]");
    const auto take = static_cast<Eigen::Index>(std::floor(ratio * static_cast<double>(n)));
    if (take < 1) throw std::invalid_argument("sample would contain no documents");

    std::vector<Eigen::Index> indices(static_cast<std::size_t>(n));
    std::iota(indices.begin(), indices.end(), Eigen::Index{0});
    Rng rng(seed);
    for (Eigen::Index i = 0; i < take; ++i) {
        const auto j = i + static_cast<Eigen::Index>(
                               rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
    }
    indices.resize(static_cast<std::size_t>(take));
    std::sort(indices.begin(), indices.end());
    return indices;
}

DocTermMatrix take_columns(const DocTermMatrix& matrix,
                           const std::vector<Eigen::Index>& indices) {
    const auto& source = matrix.entries();

    DocTermMatrix::Sparse subset(matrix.num_terms(),
                                 static_cast<Eigen::Index>(indices.size()));
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<std::string> doc_ids;
    doc_ids.reserve(indices.size());
    for (std::size_t out = 0; out < indices.size(); ++out) {
        const auto j = indices[out];
        if (j < 0 || j >= matrix.num_docs())
            throw std::invalid_argument("take_columns: document index out of range");
        doc_ids.push_back(matrix.doc_ids()[static_cast<std::size_t>(j)]);
        for (DocTermMatrix::Sparse::InnerIterator it(source, static_cast<int>(j)); it; ++it)
            triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(out),
                                  it.value());
    }
    subset.setFromTriplets(triplets.begin(), triplets.end());

    return DocTermMatrix(matrix.vocabulary_ptr(), std::move(doc_ids),
                         std::move(subset), matrix.is_normalized());
}

DocTermMatrix sample_columns(const DocTermMatrix& matrix, double ratio,
                             std::uint64_t seed) {
    return take_columns(matrix,
                        sample_column_indices(matrix.num_docs(), ratio, seed));
}

RawCorpus load_raw_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw data_error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw data_error("no .txt documents in " + dir.string());

    RawCorpus corpus;
    corpus.documents.reserve(files.size());
    for (const auto& path : files)
        corpus.documents.push_back({path.stem().string(), read_file(path)});
    return corpus;
}

RawCorpus load_raw_lines(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw data_error("cannot read file: " + file.string());
    RawCorpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        corpus.documents.push_back({std::to_string(line_no), line});
    }
    if (corpus.documents.empty()) throw data_error("empty corpus file: " + file.string());
    return corpus;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw data_error("cannot read stop-word list: " + file.string());
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        std::string lower;
        lower.reserve(line.size());
        for (char ch : line)
            lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        while (!lower.empty() && (lower.back() == ' ' || lower.back() == '\t'))
            lower.pop_back();
        std::size_t start = 0;
        while (start < lower.size() && (lower[start] == ' ' || lower[start] == '\t')) ++start;
        lower.erase(0, start);
        if (!lower.empty()) words.insert(std::move(lower));
    }
    return words;
}

} // namespace topicstab
