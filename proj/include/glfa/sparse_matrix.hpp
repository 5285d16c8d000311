#ifndef GLFA_SPARSE_MATRIX_HPP
#define GLFA_SPARSE_MATRIX_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace glfa {

struct Entry {
    std::int32_t row;
    std::int32_t col;
    double value;

    friend bool operator==(const Entry&, const Entry&) = default;
};

struct ValueRange {
    double r_min;
    double r_max;
};

// Throws std::invalid_argument unless r_min < r_max and both are finite.
void check_range(const ValueRange& range);

/// Immutable sparse ratings matrix: the observed entries plus dimension
/// metadata. Both row-wise and column-wise indices are built once at
/// construction so degree-bounded lookups stay cheap; the object is safe to
/// share across threads afterwards.
class SparseMatrix {
  public:
    SparseMatrix(std::int32_t n_rows, std::int32_t n_cols, std::vector<Entry> entries);

    std::int32_t n_rows() const { return n_rows_; }
    std::int32_t n_cols() const { return n_cols_; }
    std::size_t nnz() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    std::span<const Entry> entries() const { return entries_; }
    const Entry& entry(std::uint32_t id) const { return entries_[id]; }

    // Entry ids of one row, sorted by column (resp. one column, sorted by row).
    std::span<const std::uint32_t> row_entry_ids(std::int32_t row) const;
    std::span<const std::uint32_t> col_entry_ids(std::int32_t col) const;

    bool has(std::int32_t row, std::int32_t col) const;

    double density() const;
    double mean_value() const;

    // Structural equality: same dimensions and same set of observed entries.
    friend bool operator==(const SparseMatrix& a, const SparseMatrix& b);

  private:
    std::int32_t n_rows_;
    std::int32_t n_cols_;
    std::vector<Entry> entries_;
    std::vector<std::uint32_t> row_ptr_, row_ids_;
    std::vector<std::uint32_t> col_ptr_, col_ids_;
};

enum class RatingFormat { MovieLens, Tsv, Csv };

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// External-token to dense-id mapping produced while parsing a ratings file.
/// Token k (in first-seen order) maps to id k-1; kept so predictions can be
/// reported against the original ids.
struct IdMap {
    std::vector<std::string> row_tokens;
    std::vector<std::string> col_tokens;
};

struct LoadedRatings {
    SparseMatrix matrix;
    IdMap ids;
};

LoadedRatings load_ratings(const std::filesystem::path& path, RatingFormat format,
                           bool has_header = false);

// Seeded uniform partition of the observed entries. The train side receives
// round(train_fraction * nnz) entries; dimensions are preserved on both sides.
std::pair<SparseMatrix, SparseMatrix> split(const SparseMatrix& matrix,
                                            double train_fraction, std::uint64_t seed);

// Observed min/max. Throws on an empty matrix and on a degenerate range
// (all values equal).
ValueRange value_range(const SparseMatrix& matrix);

void save_matrix(const SparseMatrix& matrix, const std::filesystem::path& path);
SparseMatrix load_matrix(const std::filesystem::path& path);

void save_id_map(const IdMap& ids, const std::filesystem::path& path);
IdMap load_id_map(const std::filesystem::path& path);

}  // namespace glfa

#endif
