#include "topicstab/matrix_io.hpp"

#include "topicstab/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace topicstab {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path.string());
    return out;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

} // namespace

CorpusPaths sibling_corpus_paths(const std::filesystem::path& mtx) {
    CorpusPaths paths;
    paths.mtx = mtx;
    paths.terms = mtx;
    paths.terms.replace_extension(".terms");
    paths.docs = mtx;
    paths.docs.replace_extension(".docs");
    return paths;
}

void write_matrix_market(const DocTermMatrix& matrix, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.num_terms() << ' ' << matrix.num_docs() << ' '
        << matrix.entries().nonZeros() << '\n';
    const auto& entries = matrix.entries();
    for (int j = 0; j < entries.outerSize(); ++j)
        for (DocTermMatrix::Sparse::InnerIterator it(entries, j); it; ++it)
            out << (it.row() + 1) << ' ' << (it.col() + 1) << ' '
                << format_value(it.value()) << '\n';
    if (!out) throw data_error("write failed: " + path.string());
}

void write_terms(const Vocabulary& vocabulary, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& term : vocabulary.terms()) out << term << '\n';
    if (!out) throw data_error("write failed: " + path.string());
}

void write_doc_ids(const std::vector<std::string>& doc_ids,
                   const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& id : doc_ids) out << id << '\n';
    if (!out) throw data_error("write failed: " + path.string());
}

void write_corpus(const DocTermMatrix& matrix, const CorpusPaths& paths) {
    write_matrix_market(matrix, paths.mtx);
    write_terms(matrix.vocabulary(), paths.terms);
    write_doc_ids(matrix.doc_ids(), paths.docs);
}

DocTermMatrix load_corpus(const CorpusPaths& paths) {
    std::ifstream in(paths.mtx, std::ios::binary);
    if (!in) throw data_error("cannot read file: " + paths.mtx.string());

    std::string header;
    if (!std::getline(in, header)) throw data_error("empty .mtx file: " + paths.mtx.string());
    if (!header.empty() && header.back() == '\r') header.pop_back();
    {
        std::istringstream hs(header);
        std::string banner, object, format, field, symmetry;
        hs >> banner >> object >> format >> field >> symmetry;
        std::transform(field.begin(), field.end(), field.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        std::transform(symmetry.begin(), symmetry.end(), symmetry.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" ||
            (field != "real" && field != "integer") || symmetry != "general")
            throw data_error("unsupported MatrixMarket header: " + header);
    }

    std::string line;
    Eigen::Index rows = 0, cols = 0;
    std::int64_t nnz = 0;
    for (;;) {
        if (!std::getline(in, line)) throw data_error("missing size line in " + paths.mtx.string());
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        if (!(ls >> rows >> cols >> nnz))
            throw data_error("malformed size line in " + paths.mtx.string());
        break;
    }
    if (rows < 1 || cols < 1 || nnz < 0)
        throw data_error("invalid matrix dimensions in " + paths.mtx.string());

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    std::int64_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::int64_t r = 0, c = 0;
        double v = 0.0;
        if (!(ls >> r >> c >> v))
            throw data_error("malformed entry in " + paths.mtx.string() + ": " + line);
        if (r < 1 || r > rows || c < 1 || c > cols)
            throw data_error("entry index out of range in " + paths.mtx.string());
        if (v < 0.0 || !std::isfinite(v))
            throw data_error("negative or non-finite entry in " + paths.mtx.string());
        ++seen;
        if (v > 0.0)
            triplets.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), v);
    }
    if (seen != nnz)
        throw data_error("entry count mismatch in " + paths.mtx.string() + ": header says " +
                         std::to_string(nnz) + ", found " + std::to_string(seen));

    auto term_lines = read_lines(paths.terms);
    while (!term_lines.empty() && term_lines.back().empty()) term_lines.pop_back();
    if (static_cast<Eigen::Index>(term_lines.size()) != rows)
        throw data_error(".terms line count does not match matrix rows");
    auto doc_lines = read_lines(paths.docs);
    while (!doc_lines.empty() && doc_lines.back().empty()) doc_lines.pop_back();
    if (static_cast<Eigen::Index>(doc_lines.size()) != cols)
        throw data_error(".docs line count does not match matrix columns");

    DocTermMatrix::Sparse entries(rows, cols);
    entries.setFromTriplets(triplets.begin(), triplets.end());

    DocTermMatrix loaded(Vocabulary(std::move(term_lines)), std::move(doc_lines),
                         std::move(entries), /*normalized=*/false);
    bool unit_columns = true;
    for (double norm : loaded.column_norms())
        if (norm > 0.0 && std::abs(norm - 1.0) > 1e-6) {
            unit_columns = false;
            break;
        }
    if (!unit_columns) return loaded;
    return DocTermMatrix(loaded.vocabulary_ptr(), loaded.doc_ids(), loaded.entries(),
                         /*normalized=*/true);
}

} // namespace topicstab
