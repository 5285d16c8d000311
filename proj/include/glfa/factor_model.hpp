#ifndef GLFA_FACTOR_MODEL_HPP
#define GLFA_FACTOR_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "glfa/sparse_matrix.hpp"

namespace glfa {

struct SgdHyper {
    double eta;     // learning rate, > 0
    double lambda;  // Tikhonov regularization, >= 0
    double alpha;   // weight of the pseudo-label loss term, >= 0
};

void check_hyper(const SgdHyper& hyper);

enum class EntryKind { Observed, Pseudo };

/// A clamped self-prediction for an unobserved pair, used as extra training
/// signal in later rounds.
struct PseudoEntry {
    std::int32_t u;
    std::int32_t i;
    double value;
};

class DivergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rank-f embedding pair: one length-f row per user in X and per item in Y.
/// The prediction for (u, i) is the plain dot product of the two rows; the
/// attached value range is only consulted when predictions are clamped.
class FactorModel {
  public:
    FactorModel(std::int32_t n_rows, std::int32_t n_cols, std::int32_t f, ValueRange range);

    std::int32_t n_rows() const { return n_rows_; }
    std::int32_t n_cols() const { return n_cols_; }
    std::int32_t f() const { return f_; }
    const ValueRange& range() const { return range_; }

    std::span<double> x_row(std::int32_t u);
    std::span<const double> x_row(std::int32_t u) const;
    std::span<double> y_row(std::int32_t i);
    std::span<const double> y_row(std::int32_t i) const;

    std::span<const double> x() const { return x_; }
    std::span<const double> y() const { return y_; }

    double predict(std::int32_t u, std::int32_t i) const;

    friend bool operator==(const FactorModel&, const FactorModel&);

  private:
    std::int32_t n_rows_, n_cols_, f_;
    ValueRange range_;
    std::vector<double> x_, y_;
};

// Fresh model with all factors drawn uniformly from (0, sqrt(mean_rating/f)),
// which keeps early predictions positive with expectation mean_rating/4.
FactorModel init_model(std::int32_t n_rows, std::int32_t n_cols, std::int32_t f,
                       std::uint64_t seed, double mean_rating, ValueRange range);

// Sigmoid-based reset of predictions falling outside [r_min, r_max]; inside
// the range the value passes through untouched.
double clamp_activation(double r_hat, const ValueRange& range);

// Regularized squared error: the observed data-fit term, the alpha-weighted
// pseudo-label term, and the Frobenius penalty over the full factor matrices.
double objective(const FactorModel& model, std::span<const Entry> observed,
                 std::span<const PseudoEntry> pseudo, const SgdHyper& hyper);

// Single stochastic update on one entry. The residual is computed once from
// the pre-update rows and both rows move simultaneously; for Pseudo entries
// the residual is scaled by alpha while regularization stays unscaled.
void sgd_step(FactorModel& model, std::int32_t u, std::int32_t i, double value, EntryKind kind,
              const SgdHyper& hyper);

// One pass over all observed and pseudo entries in a seeded random order.
// Returns the objective value after the pass.
double train_epoch(FactorModel& model, std::span<const Entry> observed,
                   std::span<const PseudoEntry> pseudo, const SgdHyper& hyper,
                   std::mt19937_64& shuffle_rng);

void save_model(const FactorModel& model, const std::filesystem::path& path);
FactorModel load_model(const std::filesystem::path& path);

}  // namespace glfa

#endif
