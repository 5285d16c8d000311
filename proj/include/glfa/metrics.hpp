#ifndef GLFA_METRICS_HPP
#define GLFA_METRICS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "glfa/factor_model.hpp"
#include "glfa/sparse_matrix.hpp"

namespace glfa {

struct Scorecard {
    double rmse = 0;
    double mae = 0;
    std::size_t n_scored = 0;
    std::size_t n_cold = 0;  // test entries predicted with the fallback value
};

/// Which row/column ids carry at least one observed training entry. Entities
/// absent from training have nothing to learn from, so scoring falls back to
/// a caller-supplied constant for them.
struct SeenMask {
    std::vector<char> row_seen;
    std::vector<char> col_seen;
};

SeenMask seen_mask(const SparseMatrix& train);

// RMSE and MAE over every test entry, using raw (unclamped) predictions.
// Cold entries — flagged unseen by the mask, or with an all-zero factor row
// when no mask is given — contribute the fallback prediction instead.
Scorecard score(const FactorModel& model, const SparseMatrix& test, double fallback,
                const SeenMask* seen = nullptr);

enum class Tail {
    TwoSided,
    OneSided,  // alternative: b improves on a (large positive-rank sum)
};

struct WilcoxonResult {
    double r_plus = 0;
    double r_minus = 0;
    double p_value = 1;
    std::size_t n_used = 0;  // pairs retained after dropping zero differences
    bool exact = false;
};

// Paired signed-ranks comparison of two metric vectors. Differences a-b are
// ranked by magnitude (average ranks on ties, zero differences dropped);
// positive ranks accumulate into r_plus. The p-value comes from the exact
// sign-flip distribution for n <= 25 and a tie-corrected normal
// approximation above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    Tail tail = Tail::TwoSided);

}  // namespace glfa

#endif
