#include "glfa/factor_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "glfa/rng.hpp"
#include "glfa/text.hpp"

namespace glfa {

void check_hyper(const SgdHyper& hyper) {
    if (!std::isfinite(hyper.eta) || hyper.eta <= 0)
        throw std::invalid_argument("eta must be positive and finite");
    if (!std::isfinite(hyper.lambda) || hyper.lambda < 0)
        throw std::invalid_argument("lambda must be non-negative and finite");
    if (!std::isfinite(hyper.alpha) || hyper.alpha < 0)
        throw std::invalid_argument("alpha must be non-negative and finite");
}

FactorModel::FactorModel(std::int32_t n_rows, std::int32_t n_cols, std::int32_t f, ValueRange range)
    : n_rows_(n_rows), n_cols_(n_cols), f_(f), range_(range) {
    if (n_rows_ <= 0 || n_cols_ <= 0) throw std::invalid_argument("model dimensions must be positive");
    if (f_ < 1) throw std::invalid_argument("embedding dimension must be at least 1");
    const std::int32_t dim_min = std::min(n_rows_, n_cols_);
    if (f_ > dim_min / 2)
        throw std::invalid_argument("embedding dimension " + std::to_string(f_) +
                                    " too large for a " + std::to_string(n_rows_) + "x" +
                                    std::to_string(n_cols_) + " matrix (limit " +
                                    std::to_string(dim_min / 2) + ")");
    if (f_ > dim_min / 10) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::cerr << "glfa: warning: embedding dimension " << f_
                      << " is large relative to min(" << n_rows_ << "," << n_cols_ << ")\n";
    }
    check_range(range_);
    x_.assign(static_cast<std::size_t>(n_rows_) * f_, 0.0);
    y_.assign(static_cast<std::size_t>(n_cols_) * f_, 0.0);
}

std::span<double> FactorModel::x_row(std::int32_t u) {
    if (u < 0 || u >= n_rows_) throw std::out_of_range("row id out of range");
    return std::span(x_).subspan(static_cast<std::size_t>(u) * f_, f_);
}

std::span<const double> FactorModel::x_row(std::int32_t u) const {
    if (u < 0 || u >= n_rows_) throw std::out_of_range("row id out of range");
    return std::span(x_).subspan(static_cast<std::size_t>(u) * f_, f_);
}

std::span<double> FactorModel::y_row(std::int32_t i) {
    if (i < 0 || i >= n_cols_) throw std::out_of_range("col id out of range");
    return std::span(y_).subspan(static_cast<std::size_t>(i) * f_, f_);
}

std::span<const double> FactorModel::y_row(std::int32_t i) const {
    if (i < 0 || i >= n_cols_) throw std::out_of_range("col id out of range");
    return std::span(y_).subspan(static_cast<std::size_t>(i) * f_, f_);
}

double FactorModel::predict(std::int32_t u, std::int32_t i) const {
    auto xr = x_row(u);
    auto yr = y_row(i);
    double dot = 0;
    for (std::int32_t t = 0; t < f_; ++t) dot += xr[t] * yr[t];
    return dot;
}

bool operator==(const FactorModel& a, const FactorModel& b) {
    return a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ && a.f_ == b.f_ &&
           a.range_.r_min == b.range_.r_min && a.range_.r_max == b.range_.r_max &&
           a.x_ == b.x_ && a.y_ == b.y_;
}

FactorModel init_model(std::int32_t n_rows, std::int32_t n_cols, std::int32_t f,
                       std::uint64_t seed, double mean_rating, ValueRange range) {
    if (!(mean_rating > 0) || !std::isfinite(mean_rating))
        throw std::invalid_argument("init_model needs a positive finite mean rating");
    FactorModel model(n_rows, n_cols, f, range);
    const double scale = std::sqrt(mean_rating / static_cast<double>(f));
    std::mt19937_64 eng(seed);
    for (std::int32_t u = 0; u < n_rows; ++u)
        for (double& v : model.x_row(u)) v = scale * uniform_open01(eng);
    for (std::int32_t i = 0; i < n_cols; ++i)
        for (double& v : model.y_row(i)) v = scale * uniform_open01(eng);
    return model;
}

double clamp_activation(double r_hat, const ValueRange& range) {
    if (!std::isfinite(r_hat)) throw std::invalid_argument("clamp_activation on a non-finite value");
    if (r_hat < range.r_min) return range.r_min + 1.0 / (1.0 + std::exp(-r_hat));
    if (r_hat > range.r_max) return range.r_max / (1.0 + std::exp(-r_hat));
    return r_hat;
}

double objective(const FactorModel& model, std::span<const Entry> observed,
                 std::span<const PseudoEntry> pseudo, const SgdHyper& hyper) {
    double data_fit = 0;
    for (const Entry& e : observed) {
        const double err = e.value - model.predict(e.row, e.col);
        data_fit += err * err;
    }
    double pseudo_fit = 0;
    for (const PseudoEntry& e : pseudo) {
        const double err = e.value - model.predict(e.u, e.i);
        pseudo_fit += err * err;
    }
    double frob = 0;
    for (double v : model.x()) frob += v * v;
    for (double v : model.y()) frob += v * v;
    return 0.5 * data_fit + 0.5 * hyper.alpha * pseudo_fit + 0.5 * hyper.lambda * frob;
}

void sgd_step(FactorModel& model, std::int32_t u, std::int32_t i, double value, EntryKind kind,
              const SgdHyper& hyper) {
    if (!std::isfinite(value)) throw std::invalid_argument("sgd_step on a non-finite target value");
    auto xr = model.x_row(u);
    auto yr = model.y_row(i);
    const std::int32_t f = model.f();

    double dot = 0;
    for (std::int32_t t = 0; t < f; ++t) dot += xr[t] * yr[t];
    double residual = value - dot;
    if (kind == EntryKind::Pseudo) residual *= hyper.alpha;

    const double eta = hyper.eta;
    const double shrink = eta * hyper.lambda;
    bool finite = true;
    for (std::int32_t t = 0; t < f; ++t) {
        const double x_old = xr[t];
        const double y_old = yr[t];
        xr[t] = x_old + eta * y_old * residual - shrink * x_old;
        yr[t] = y_old + eta * x_old * residual - shrink * y_old;
        finite = finite && std::isfinite(xr[t]) && std::isfinite(yr[t]);
    }
    if (!finite)
        throw DivergenceError("training diverged at entry (" + std::to_string(u) + "," +
                              std::to_string(i) + ") with eta=" + format_double(eta));
}

double train_epoch(FactorModel& model, std::span<const Entry> observed,
                   std::span<const PseudoEntry> pseudo, const SgdHyper& hyper,
                   std::mt19937_64& shuffle_rng) {
    if (observed.empty()) throw std::invalid_argument("train_epoch needs observed entries");
    std::vector<std::uint32_t> order(observed.size() + pseudo.size());
    std::iota(order.begin(), order.end(), 0);
    fisher_yates(order, shuffle_rng);
    const auto n_obs = static_cast<std::uint32_t>(observed.size());
    for (std::uint32_t id : order) {
        if (id < n_obs) {
            const Entry& e = observed[id];
            sgd_step(model, e.row, e.col, e.value, EntryKind::Observed, hyper);
        } else {
            const PseudoEntry& e = pseudo[id - n_obs];
            sgd_step(model, e.u, e.i, e.value, EntryKind::Pseudo, hyper);
        }
    }
    return objective(model, observed, pseudo, hyper);
}

void save_model(const FactorModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    out << "# " << model.n_rows() << ' ' << model.n_cols() << ' ' << model.f() << ' '
        << format_double(model.range().r_min) << ' ' << format_double(model.range().r_max) << '\n';
    auto write_rows = [&](std::span<const double> flat, std::int32_t n_rows) {
        for (std::int32_t r = 0; r < n_rows; ++r) {
            for (std::int32_t t = 0; t < model.f(); ++t) {
                if (t) out << ' ';
                out << format_double(flat[static_cast<std::size_t>(r) * model.f() + t]);
            }
            out << '\n';
        }
    };
    write_rows(model.x(), model.n_rows());
    write_rows(model.y(), model.n_cols());
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

FactorModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty model file: " + path.string());
    auto fields = split_ws(line);
    if (fields.size() != 6 || fields[0] != "#")
        throw std::runtime_error("malformed model header in " + path.string());
    const auto n_rows = parse_int(fields[1]);
    const auto n_cols = parse_int(fields[2]);
    const auto f = parse_int(fields[3]);
    const auto r_min = parse_double(fields[4]);
    const auto r_max = parse_double(fields[5]);
    if (!n_rows || !n_cols || !f || !r_min || !r_max)
        throw std::runtime_error("malformed model header in " + path.string());

    FactorModel model(static_cast<std::int32_t>(*n_rows), static_cast<std::int32_t>(*n_cols),
                      static_cast<std::int32_t>(*f), ValueRange{*r_min, *r_max});
    auto read_rows = [&](auto get_row, std::int32_t count) {
        for (std::int32_t r = 0; r < count; ++r) {
            if (!std::getline(in, line))
                throw std::runtime_error("truncated model file: " + path.string());
            auto vals = split_ws(line);
            if (static_cast<std::int32_t>(vals.size()) != model.f())
                throw std::runtime_error("bad factor row in " + path.string());
            auto row = get_row(r);
            for (std::int32_t t = 0; t < model.f(); ++t) {
                const auto v = parse_double(vals[t]);
                if (!v) throw std::runtime_error("bad factor value in " + path.string());
                row[t] = *v;
            }
        }
    };
    read_rows([&](std::int32_t r) { return model.x_row(r); }, model.n_rows());
    read_rows([&](std::int32_t r) { return model.y_row(r); }, model.n_cols());
    return model;
}

}  // namespace glfa
