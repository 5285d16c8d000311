#include "glfa/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "glfa/rng.hpp"
#include "glfa/text.hpp"

namespace glfa {

void check_range(const ValueRange& range) {
    if (!std::isfinite(range.r_min) || !std::isfinite(range.r_max))
        throw std::invalid_argument("value range must be finite");
    if (!(range.r_min < range.r_max))
        throw std::invalid_argument("degenerate range: r_min must be strictly below r_max");
}

SparseMatrix::SparseMatrix(std::int32_t n_rows, std::int32_t n_cols, std::vector<Entry> entries)
    : n_rows_(n_rows), n_cols_(n_cols), entries_(std::move(entries)) {
    if (n_rows_ < 0 || n_cols_ < 0)
        throw std::invalid_argument("matrix dimensions must be non-negative");
    for (const Entry& e : entries_) {
        if (e.row < 0 || e.row >= n_rows_ || e.col < 0 || e.col >= n_cols_)
            throw std::invalid_argument("entry (" + std::to_string(e.row) + "," +
                                        std::to_string(e.col) + ") outside matrix dimensions");
        if (!std::isfinite(e.value))
            throw std::invalid_argument("entry (" + std::to_string(e.row) + "," +
                                        std::to_string(e.col) + ") has a non-finite value");
    }

    const auto n = static_cast<std::uint32_t>(entries_.size());
    row_ptr_.assign(static_cast<std::size_t>(n_rows_) + 1, 0);
    col_ptr_.assign(static_cast<std::size_t>(n_cols_) + 1, 0);
    for (const Entry& e : entries_) {
        ++row_ptr_[static_cast<std::size_t>(e.row) + 1];
        ++col_ptr_[static_cast<std::size_t>(e.col) + 1];
    }
    std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
    std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());

    row_ids_.resize(n);
    col_ids_.resize(n);
    std::vector<std::uint32_t> rfill(row_ptr_.begin(), row_ptr_.end() - 1);
    std::vector<std::uint32_t> cfill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::uint32_t id = 0; id < n; ++id) {
        row_ids_[rfill[entries_[id].row]++] = id;
        col_ids_[cfill[entries_[id].col]++] = id;
    }
    for (std::int32_t r = 0; r < n_rows_; ++r) {
        auto ids = std::span(row_ids_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
        std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
            return entries_[a].col < entries_[b].col;
        });
        for (std::size_t k = 1; k < ids.size(); ++k)
            if (entries_[ids[k]].col == entries_[ids[k - 1]].col)
                throw std::invalid_argument("duplicate entry at (" + std::to_string(r) + "," +
                                            std::to_string(entries_[ids[k]].col) + ")");
    }
    for (std::int32_t c = 0; c < n_cols_; ++c) {
        auto ids = std::span(col_ids_).subspan(col_ptr_[c], col_ptr_[c + 1] - col_ptr_[c]);
        std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
            return entries_[a].row < entries_[b].row;
        });
    }
}

std::span<const std::uint32_t> SparseMatrix::row_entry_ids(std::int32_t row) const {
    if (row < 0 || row >= n_rows_) throw std::out_of_range("row id out of range");
    return std::span(row_ids_).subspan(row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]);
}

std::span<const std::uint32_t> SparseMatrix::col_entry_ids(std::int32_t col) const {
    if (col < 0 || col >= n_cols_) throw std::out_of_range("col id out of range");
    return std::span(col_ids_).subspan(col_ptr_[col], col_ptr_[col + 1] - col_ptr_[col]);
}

bool SparseMatrix::has(std::int32_t row, std::int32_t col) const {
    auto ids = row_entry_ids(row);
    auto it = std::lower_bound(ids.begin(), ids.end(), col, [&](std::uint32_t id, std::int32_t c) {
        return entries_[id].col < c;
    });
    return it != ids.end() && entries_[*it].col == col;
}

double SparseMatrix::density() const {
    const double cells = static_cast<double>(n_rows_) * static_cast<double>(n_cols_);
    return cells == 0 ? 0.0 : static_cast<double>(nnz()) / cells;
}

double SparseMatrix::mean_value() const {
    if (entries_.empty()) throw std::invalid_argument("mean of an empty matrix");
    double sum = 0;
    for (const Entry& e : entries_) sum += e.value;
    return sum / static_cast<double>(entries_.size());
}

bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.n_rows_ != b.n_rows_ || a.n_cols_ != b.n_cols_ || a.nnz() != b.nnz()) return false;
    auto key = [](const Entry& e) { return std::pair(e.row, e.col); };
    std::vector<Entry> ea(a.entries_), eb(b.entries_);
    auto cmp = [&](const Entry& x, const Entry& y) { return key(x) < key(y); };
    std::sort(ea.begin(), ea.end(), cmp);
    std::sort(eb.begin(), eb.end(), cmp);
    return ea == eb;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    return out;
}

}  // namespace

LoadedRatings load_ratings(const std::filesystem::path& path, RatingFormat format,
                           bool has_header) {
    std::ifstream in = open_input(path);
    const std::string_view delim = format == RatingFormat::MovieLens ? "::"
                                 : format == RatingFormat::Tsv       ? "\t"
                                                                     : ",";

    std::vector<Entry> entries;
    IdMap ids;
    std::unordered_map<std::string, std::int32_t> row_id, col_id;
    std::unordered_set<std::uint64_t> seen_pairs;

    std::string line;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        auto fields = split_fields(sv, delim);
        if (fields.size() < 3)
            throw ParseError("line " + std::to_string(line_no) + ": expected at least 3 fields, got " +
                             std::to_string(fields.size()), line_no);
        const std::string_view user_tok = trim(fields[0]);
        const std::string_view item_tok = trim(fields[1]);
        if (user_tok.empty() || item_tok.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty user or item token", line_no);
        const auto rating = parse_double(trim(fields[2]));
        if (!rating || !std::isfinite(*rating))
            throw ParseError("line " + std::to_string(line_no) + ": non-numeric rating '" +
                             std::string(trim(fields[2])) + "'", line_no);

        auto intern = [](auto& map, std::vector<std::string>& tokens, std::string_view tok) {
            auto [it, inserted] = map.emplace(std::string(tok), static_cast<std::int32_t>(tokens.size()));
            if (inserted) tokens.emplace_back(tok);
            return it->second;
        };
        const std::int32_t u = intern(row_id, ids.row_tokens, user_tok);
        const std::int32_t i = intern(col_id, ids.col_tokens, item_tok);

        const std::uint64_t pair_key =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
            static_cast<std::uint32_t>(i);
        if (!seen_pairs.insert(pair_key).second)
            throw ParseError("line " + std::to_string(line_no) + ": duplicate pair (" +
                             std::string(user_tok) + ", " + std::string(item_tok) + ")", line_no);
        entries.push_back({u, i, *rating});
    }

    SparseMatrix matrix(static_cast<std::int32_t>(ids.row_tokens.size()),
                        static_cast<std::int32_t>(ids.col_tokens.size()), std::move(entries));
    return {std::move(matrix), std::move(ids)};
}

std::pair<SparseMatrix, SparseMatrix> split(const SparseMatrix& matrix, double train_fraction,
                                            std::uint64_t seed) {
    if (matrix.nnz() < 2) throw std::invalid_argument("split needs at least 2 observed entries");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0,1)");

    const std::size_t n = matrix.nnz();
    const auto k = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(n)));

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 eng(seed);
    fisher_yates(order, eng);

    std::vector<std::uint32_t> picked(order.begin(), order.begin() + k);
    std::sort(picked.begin(), picked.end());

    std::vector<Entry> train_entries, test_entries;
    train_entries.reserve(k);
    test_entries.reserve(n - k);
    std::size_t next = 0;
    for (std::uint32_t id = 0; id < n; ++id) {
        if (next < picked.size() && picked[next] == id) {
            train_entries.push_back(matrix.entry(id));
            ++next;
        } else {
            test_entries.push_back(matrix.entry(id));
        }
    }
    return {SparseMatrix(matrix.n_rows(), matrix.n_cols(), std::move(train_entries)),
            SparseMatrix(matrix.n_rows(), matrix.n_cols(), std::move(test_entries))};
}

ValueRange value_range(const SparseMatrix& matrix) {
    if (matrix.empty()) throw std::invalid_argument("value_range of an empty matrix");
    double lo = matrix.entry(0).value, hi = lo;
    for (const Entry& e : matrix.entries()) {
        lo = std::min(lo, e.value);
        hi = std::max(hi, e.value);
    }
    ValueRange range{lo, hi};
    check_range(range);
    return range;
}

void save_matrix(const SparseMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "# rows=" << matrix.n_rows() << " cols=" << matrix.n_cols()
        << " nnz=" << matrix.nnz() << "\n";
    for (const Entry& e : matrix.entries())
        out << e.row << '\t' << e.col << '\t' << format_double(e.value) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SparseMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t line_no = 0;

    std::int64_t n_rows = -1, n_cols = -1, nnz = -1;
    bool header_seen = false;
    std::vector<Entry> entries;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (!header_seen) {
            auto fields = split_ws(sv);
            if (fields.size() != 4 || fields[0] != "#")
                throw ParseError("line " + std::to_string(line_no) +
                                 ": expected header '# rows=<n> cols=<m> nnz=<k>'", line_no);
            for (std::size_t k = 1; k < 4; ++k) {
                auto eq = fields[k].find('=');
                if (eq == std::string_view::npos)
                    throw ParseError("line " + std::to_string(line_no) + ": malformed header field",
                                     line_no);
                const std::string_view key = fields[k].substr(0, eq);
                const auto val = parse_int(fields[k].substr(eq + 1));
                if (!val || *val < 0)
                    throw ParseError("line " + std::to_string(line_no) + ": malformed header value",
                                     line_no);
                if (key == "rows") n_rows = *val;
                else if (key == "cols") n_cols = *val;
                else if (key == "nnz") nnz = *val;
            }
            if (n_rows < 0 || n_cols < 0 || nnz < 0)
                throw ParseError("line " + std::to_string(line_no) + ": incomplete header", line_no);
            header_seen = true;
            entries.reserve(static_cast<std::size_t>(nnz));
            continue;
        }
        if (sv.front() == '#') continue;
        auto fields = split_ws(sv);
        if (fields.size() != 3)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'row<TAB>col<TAB>value'",
                             line_no);
        const auto r = parse_int(fields[0]);
        const auto c = parse_int(fields[1]);
        const auto v = parse_double(fields[2]);
        if (!r || !c || !v)
            throw ParseError("line " + std::to_string(line_no) + ": malformed entry", line_no);
        entries.push_back({static_cast<std::int32_t>(*r), static_cast<std::int32_t>(*c), *v});
    }
    if (!header_seen) throw std::runtime_error("empty or headerless matrix file: " + path.string());
    if (static_cast<std::int64_t>(entries.size()) != nnz)
        throw std::runtime_error("matrix file " + path.string() + " declares nnz=" +
                                 std::to_string(nnz) + " but contains " +
                                 std::to_string(entries.size()) + " entries");
    return SparseMatrix(static_cast<std::int32_t>(n_rows), static_cast<std::int32_t>(n_cols),
                        std::move(entries));
}

void save_id_map(const IdMap& ids, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "# rows=" << ids.row_tokens.size() << " cols=" << ids.col_tokens.size() << "\n";
    for (std::size_t k = 0; k < ids.row_tokens.size(); ++k)
        out << "row\t" << k << '\t' << ids.row_tokens[k] << '\n';
    for (std::size_t k = 0; k < ids.col_tokens.size(); ++k)
        out << "col\t" << k << '\t' << ids.col_tokens[k] << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

IdMap load_id_map(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    IdMap ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto fields = split_fields(sv, "\t");
        if (fields.size() != 3)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'kind<TAB>id<TAB>token'",
                             line_no);
        auto& tokens = fields[0] == "row" ? ids.row_tokens : ids.col_tokens;
        if (fields[0] != "row" && fields[0] != "col")
            throw ParseError("line " + std::to_string(line_no) + ": unknown kind '" +
                             std::string(fields[0]) + "'", line_no);
        const auto id = parse_int(fields[1]);
        if (!id || *id != static_cast<std::int64_t>(tokens.size()))
            throw ParseError("line " + std::to_string(line_no) + ": ids must be dense and in order",
                             line_no);
        tokens.emplace_back(fields[2]);
    }
    return ids;
}

}  // namespace glfa
