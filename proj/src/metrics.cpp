#include "glfa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace glfa {

SeenMask seen_mask(const SparseMatrix& train) {
    SeenMask mask;
    mask.row_seen.assign(train.n_rows(), 0);
    mask.col_seen.assign(train.n_cols(), 0);
    for (const Entry& e : train.entries()) {
        mask.row_seen[e.row] = 1;
        mask.col_seen[e.col] = 1;
    }
    return mask;
}

namespace {

bool all_zero(std::span<const double> row) {
    for (double v : row)
        if (v != 0.0) return false;
    return true;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

Scorecard score(const FactorModel& model, const SparseMatrix& test, double fallback,
                const SeenMask* seen) {
    if (test.empty()) throw std::invalid_argument("cannot score an empty test set");
    if (test.n_rows() > model.n_rows() || test.n_cols() > model.n_cols())
        throw std::invalid_argument("test matrix dimensions exceed the model's");
    if (seen && (seen->row_seen.size() < static_cast<std::size_t>(test.n_rows()) ||
                 seen->col_seen.size() < static_cast<std::size_t>(test.n_cols())))
        throw std::invalid_argument("seen mask smaller than the test dimensions");

    Scorecard card;
    double sq = 0, abs_sum = 0;
    for (const Entry& e : test.entries()) {
        bool cold;
        if (seen) {
            cold = !seen->row_seen[e.row] || !seen->col_seen[e.col];
        } else {
            cold = all_zero(model.x_row(e.row)) || all_zero(model.y_row(e.col));
        }
        const double pred = cold ? fallback : model.predict(e.row, e.col);
        const double err = e.value - pred;
        sq += err * err;
        abs_sum += std::abs(err);
        if (cold) ++card.n_cold;
    }
    card.n_scored = test.nnz();
    card.rmse = std::sqrt(sq / static_cast<double>(card.n_scored));
    card.mae = abs_sum / static_cast<double>(card.n_scored);
    return card;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    Tail tail) {
    if (a.size() != b.size()) throw std::invalid_argument("paired vectors differ in length");
    if (a.size() < 5) throw std::invalid_argument("need at least 5 pairs");

    std::vector<double> diffs;
    diffs.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw std::runtime_error("signed-rank test undefined: all differences are zero");

    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });

    // Average ranks over ties; with ties every rank is a multiple of 1/2.
    std::vector<double> rank(n, 0);
    std::vector<std::size_t> tie_sizes;
    for (std::size_t k = 0; k < n;) {
        std::size_t j = k;
        while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[k]])) ++j;
        const double avg = 0.5 * static_cast<double>(k + j) + 1.0;
        for (std::size_t t = k; t <= j; ++t) rank[order[t]] = avg;
        if (j > k) tie_sizes.push_back(j - k + 1);
        k = j + 1;
    }

    WilcoxonResult res;
    res.n_used = n;
    for (std::size_t k = 0; k < n; ++k) {
        if (diffs[k] > 0)
            res.r_plus += rank[k];
        else
            res.r_minus += rank[k];
    }

    if (n <= 25) {
        // Exact null distribution of the positive-rank sum via subset-sum
        // counting over doubled (integral) ranks.
        const std::int64_t total = static_cast<std::int64_t>(n) * (n + 1);  // sum of doubled ranks
        std::vector<unsigned long long> count(total + 1, 0);
        count[0] = 1;
        for (std::size_t k = 0; k < n; ++k) {
            const auto s = static_cast<std::int64_t>(std::llround(2 * rank[k]));
            for (std::int64_t w = total; w >= s; --w) count[w] += count[w - s];
        }
        const auto observed = static_cast<std::int64_t>(std::llround(2 * res.r_plus));
        unsigned long long ge = 0, le = 0;
        for (std::int64_t w = 0; w <= total; ++w) {
            if (w >= observed) ge += count[w];
            if (w <= observed) le += count[w];
        }
        const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
        const double p_ge = static_cast<double>(ge) / denom;
        const double p_le = static_cast<double>(le) / denom;
        res.p_value = tail == Tail::OneSided ? p_ge : std::min(1.0, 2.0 * std::min(p_ge, p_le));
        res.exact = true;
    } else {
        const double dn = static_cast<double>(n);
        const double mean = dn * (dn + 1) / 4.0;
        double var = dn * (dn + 1) * (2 * dn + 1) / 24.0;
        for (std::size_t t : tie_sizes) {
            const double dt = static_cast<double>(t);
            var -= dt * (dt * dt - 1) / 48.0;
        }
        const double z = (res.r_plus - mean) / std::sqrt(var);
        res.p_value = tail == Tail::OneSided ? normal_upper_tail(z)
                                             : 2.0 * normal_upper_tail(std::abs(z));
        res.p_value = std::min(1.0, res.p_value);
        res.exact = false;
    }
    return res;
}

}  // namespace glfa
