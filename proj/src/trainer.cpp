#include "glfa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "glfa/rng.hpp"
#include "glfa/text.hpp"

namespace glfa {

void check_config(const TrainConfig& config) {
    if (config.f < 1) throw std::invalid_argument("f must be at least 1");
    check_hyper({config.eta, config.lambda, config.alpha});
    if (config.n_rounds < 1) throw std::invalid_argument("n_rounds must be at least 1");
    if (config.max_epochs_per_round < 1)
        throw std::invalid_argument("max_epochs_per_round must be at least 1");
    if (!(config.tol >= 0) || !std::isfinite(config.tol))
        throw std::invalid_argument("tol must be non-negative and finite");
    if (!(config.val_fraction >= 0 && config.val_fraction < 0.5))
        throw std::invalid_argument("val_fraction must lie in [0, 0.5)");
    if (config.max_order < 2) throw std::invalid_argument("max_order must be at least 2");
    if (config.range_override) check_range(*config.range_override);
}

std::vector<HoiRecord> select_sn(std::vector<HoiRecord>& remaining, std::int32_t round_n,
                                 std::int32_t n_rounds, std::mt19937_64& rng) {
    if (round_n < 1 || round_n > n_rounds)
        throw std::invalid_argument("round index outside [1, n_rounds]");
    if (round_n == n_rounds || remaining.empty()) return {};

    const std::size_t rem = remaining.size();
    const std::size_t shares = static_cast<std::size_t>(n_rounds - round_n) + 1;
    const std::size_t k = (rem + shares - 1) / shares;

    std::vector<std::uint32_t> idx(rem);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t r = j + static_cast<std::size_t>(uniform_below(rng, rem - j));
        std::swap(idx[j], idx[r]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    std::vector<HoiRecord> picked;
    picked.reserve(k);
    for (std::uint32_t id : idx) picked.push_back(remaining[id]);

    std::vector<HoiRecord> rest;
    rest.reserve(rem - k);
    std::size_t next = 0;
    for (std::uint32_t id = 0; id < rem; ++id) {
        if (next < idx.size() && idx[next] == id) {
            ++next;
        } else {
            rest.push_back(remaining[id]);
        }
    }
    remaining.swap(rest);
    return picked;
}

namespace {

double raw_rmse(const FactorModel& model, std::span<const Entry> entries) {
    double sq = 0;
    for (const Entry& e : entries) {
        const double err = e.value - model.predict(e.row, e.col);
        sq += err * err;
    }
    return std::sqrt(sq / static_cast<double>(entries.size()));
}

}  // namespace

TrainResult train_glfa(const SparseMatrix& train, const TrainConfig& config) {
    check_config(config);
    if (train.empty()) throw std::invalid_argument("training matrix is empty");

    const double mean_rating = train.mean_value();
    const ValueRange range =
        config.range_override ? *config.range_override : value_range(train);
    const SgdHyper hyper{config.eta, config.lambda, config.alpha};

    // Hold out a validation slice for early stopping; it is excluded from the
    // SGD visits but still part of the observed set for graph mining.
    std::vector<Entry> sgd_entries, val_entries;
    const auto n_val =
        static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(train.nnz())));
    if (n_val > 0) {
        std::vector<std::uint32_t> order(train.nnz());
        std::iota(order.begin(), order.end(), 0);
        auto eng = make_engine(config.seed, "val");
        fisher_yates(order, eng);
        std::vector<std::uint32_t> picked(order.begin(), order.begin() + n_val);
        std::sort(picked.begin(), picked.end());
        std::size_t next = 0;
        for (std::uint32_t id = 0; id < train.nnz(); ++id) {
            if (next < picked.size() && picked[next] == id) {
                val_entries.push_back(train.entry(id));
                ++next;
            } else {
                sgd_entries.push_back(train.entry(id));
            }
        }
    } else {
        sgd_entries.assign(train.entries().begin(), train.entries().end());
    }
    if (sgd_entries.empty()) throw std::invalid_argument("validation slice consumed every entry");

    TrainReport report;
    report.n_sgd_entries = sgd_entries.size();
    report.n_val_entries = val_entries.size();
    report.mean_rating = mean_rating;
    report.range = range;

    std::vector<HoiRecord> s_remaining;
    if (config.n_rounds >= 2) {
        const InteractionGraph graph = build_graph(train);
        HoiStats stats;
        HoiSet s = high_confidence_set(graph, config.max_order, &stats);
        s_remaining.assign(s.records().begin(), s.records().end());
        report.hoi_high = stats.n_high;
        report.hoi_low = stats.n_low;
    }

    auto shuffle_eng = make_engine(config.seed, "shuffle");
    auto select_eng = make_engine(config.seed, "select");
    PseudoLabelPool pool;
    std::optional<FactorModel> model;

    for (std::int32_t n = 1; n <= config.n_rounds; ++n) {
        if (n == 1 || !config.warm_start) {
            model = init_model(train.n_rows(), train.n_cols(), config.f,
                               derive_seed(config.seed, "init." + std::to_string(n)), mean_rating,
                               range);
        }

        RoundReport round;
        round.round = n;
        double prev_val = std::numeric_limits<double>::infinity();
        double best_val = std::numeric_limits<double>::infinity();
        std::optional<FactorModel> best_model;
        if (!val_entries.empty()) {
            // Guarded refinement: a round that never improves validation hands
            // back the model it received instead of a past-optimum state.
            best_val = raw_rmse(*model, val_entries);
            best_model = *model;
        }
        for (std::int32_t epoch = 1; epoch <= config.max_epochs_per_round; ++epoch) {
            round.final_objective =
                train_epoch(*model, sgd_entries, pool.entries(), hyper, shuffle_eng);
            round.objectives.push_back(round.final_objective);
            round.epochs = epoch;
            if (!val_entries.empty()) {
                const double vr = raw_rmse(*model, val_entries);
                round.val_rmse.push_back(vr);
                if (vr < best_val) {
                    best_val = vr;
                    best_model = *model;
                }
                if (prev_val - vr < config.tol) break;
                prev_val = vr;
            }
        }
        if (best_model) model = std::move(best_model);

        const std::vector<HoiRecord> slice =
            select_sn(s_remaining, n, config.n_rounds, select_eng);
        for (const HoiRecord& rec : slice) {
            const double clamped = clamp_activation(model->predict(rec.u, rec.i), range);
            pool.add({rec.u, rec.i, clamped}, n);
        }
        round.sn_size = slice.size();
        round.lambda_size = pool.size();
        report.rounds.push_back(std::move(round));
    }

    return {std::move(*model), std::move(report), std::move(pool)};
}

TrainResult train_blf(const SparseMatrix& train, TrainConfig config) {
    config.n_rounds = 1;
    return train_glfa(train, config);
}

void save_report(const TrainReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    out << "# hoi_high=" << report.hoi_high << " hoi_low=" << report.hoi_low
        << " sgd_entries=" << report.n_sgd_entries << " val_entries=" << report.n_val_entries
        << " mean=" << format_double(report.mean_rating)
        << " r_min=" << format_double(report.range.r_min)
        << " r_max=" << format_double(report.range.r_max) << "\n";
    out << "# round\tepochs\tobjective\tval_rmse\ts_n\tlambda\n";
    for (const RoundReport& r : report.rounds) {
        out << r.round << '\t' << r.epochs << '\t' << format_double(r.final_objective) << '\t'
            << (r.val_rmse.empty() ? std::string("-") : format_double(r.val_rmse.back())) << '\t'
            << r.sn_size << '\t' << r.lambda_size << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace glfa
