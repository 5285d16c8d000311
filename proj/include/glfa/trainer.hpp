#ifndef GLFA_TRAINER_HPP
#define GLFA_TRAINER_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "glfa/factor_model.hpp"
#include "glfa/interaction_graph.hpp"
#include "glfa/sparse_matrix.hpp"

namespace glfa {

struct TrainConfig {
    std::int32_t f = 20;
    double eta = 0.01;
    double lambda = 0.05;
    double alpha = 0.1;
    std::int32_t n_rounds = 3;
    std::int32_t max_epochs_per_round = 200;
    double tol = 1e-5;          // early-stop threshold on validation-RMSE improvement
    double val_fraction = 0.05; // share of train held out for early stopping; 0 disables it
    std::uint64_t seed = 0;
    std::int32_t max_order = 2;
    bool warm_start = true;
    std::optional<ValueRange> range_override;
};

void check_config(const TrainConfig& config);

/// Accumulated pool of clamped self-predictions, tagged with the round that
/// produced each one. Pairs come out of the high-confidence set, so the pool
/// stays disjoint from the observed entries and free of duplicates.
class PseudoLabelPool {
  public:
    std::span<const PseudoEntry> entries() const { return entries_; }
    std::span<const std::int32_t> rounds() const { return rounds_; }
    std::size_t size() const { return entries_.size(); }

    void add(const PseudoEntry& entry, std::int32_t round) {
        entries_.push_back(entry);
        rounds_.push_back(round);
    }

  private:
    std::vector<PseudoEntry> entries_;
    std::vector<std::int32_t> rounds_;
};

// Draw round n's slice from the remaining high-confidence pairs: an
// equal-share subset of size ceil(|remaining| / (n_rounds - n + 1)), removed
// from `remaining` without replacement. The final round selects nothing
// (training ends before another round could consume it). Both the returned
// slice and the remainder stay sorted by (u, i).
std::vector<HoiRecord> select_sn(std::vector<HoiRecord>& remaining, std::int32_t round_n,
                                 std::int32_t n_rounds, std::mt19937_64& rng);

struct RoundReport {
    std::int32_t round = 0;
    std::int32_t epochs = 0;
    double final_objective = 0;
    std::vector<double> objectives;  // one value per epoch
    std::vector<double> val_rmse;    // one value per epoch; empty when no validation slice
    std::size_t sn_size = 0;         // slice selected at the end of this round
    std::size_t lambda_size = 0;     // pool size after folding the slice in
};

struct TrainReport {
    std::vector<RoundReport> rounds;
    std::size_t hoi_high = 0;
    std::size_t hoi_low = 0;
    std::size_t n_sgd_entries = 0;
    std::size_t n_val_entries = 0;
    double mean_rating = 0;
    ValueRange range{0, 1};
};

struct TrainResult {
    FactorModel model;
    TrainReport report;
    PseudoLabelPool pool;  // final accumulated pseudo-label set
};

// The recurrent loop: mine the high-confidence set once, then per round
// train on observed + pseudo entries, slice the remaining set, predict and
// clamp the slice, and fold it into the pool for the next round.
TrainResult train_glfa(const SparseMatrix& train, const TrainConfig& config);

// Single-round baseline; no graph work is executed.
TrainResult train_blf(const SparseMatrix& train, TrainConfig config);

void save_report(const TrainReport& report, const std::filesystem::path& path);

}  // namespace glfa

#endif
