#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "glfa/factor_model.hpp"
#include "glfa/interaction_graph.hpp"
#include "glfa/metrics.hpp"
#include "glfa/rng.hpp"
#include "glfa/sparse_matrix.hpp"
#include "glfa/trainer.hpp"

namespace py = pybind11;
using namespace glfa;

namespace {

RatingFormat format_from_string(const std::string& name) {
    if (name == "movielens") return RatingFormat::MovieLens;
    if (name == "tsv") return RatingFormat::Tsv;
    if (name == "csv") return RatingFormat::Csv;
    throw std::invalid_argument("unknown format '" + name + "' (movielens, tsv, csv)");
}

}  // namespace

PYBIND11_MODULE(_glfa, m) {
    m.doc() = "Graph-incorporated latent factor analysis for sparse matrices";

    py::register_exception<ParseError>(m, "GlfaParseError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    py::class_<Entry>(m, "Entry")
        .def(py::init<std::int32_t, std::int32_t, double>(), py::arg("row"), py::arg("col"),
             py::arg("value"))
        .def_readonly("row", &Entry::row)
        .def_readonly("col", &Entry::col)
        .def_readonly("value", &Entry::value)
        .def("__repr__", [](const Entry& e) {
            return "Entry(" + std::to_string(e.row) + ", " + std::to_string(e.col) + ", " +
                   std::to_string(e.value) + ")";
        });

    py::class_<ValueRange>(m, "ValueRange")
        .def(py::init<double, double>(), py::arg("r_min"), py::arg("r_max"))
        .def_readonly("r_min", &ValueRange::r_min)
        .def_readonly("r_max", &ValueRange::r_max);

    py::class_<SparseMatrix>(m, "SparseMatrix")
        .def(py::init<std::int32_t, std::int32_t, std::vector<Entry>>(), py::arg("n_rows"),
             py::arg("n_cols"), py::arg("entries"))
        .def_property_readonly("n_rows", &SparseMatrix::n_rows)
        .def_property_readonly("n_cols", &SparseMatrix::n_cols)
        .def_property_readonly("nnz", &SparseMatrix::nnz)
        .def("density", &SparseMatrix::density)
        .def("mean_value", &SparseMatrix::mean_value)
        .def("has", &SparseMatrix::has, py::arg("row"), py::arg("col"))
        .def("entries", [](const SparseMatrix& mat) {
            return std::vector<Entry>(mat.entries().begin(), mat.entries().end());
        })
        .def("__eq__", [](const SparseMatrix& a, const SparseMatrix& b) { return a == b; });

    py::class_<IdMap>(m, "IdMap")
        .def_readonly("row_tokens", &IdMap::row_tokens)
        .def_readonly("col_tokens", &IdMap::col_tokens);

    m.def(
        "load_ratings",
        [](const std::filesystem::path& path, const std::string& format, bool has_header) {
            LoadedRatings loaded = load_ratings(path, format_from_string(format), has_header);
            return py::make_tuple(std::move(loaded.matrix), std::move(loaded.ids));
        },
        py::arg("path"), py::arg("format") = "tsv", py::arg("has_header") = false);
    m.def("split", &split, py::arg("matrix"), py::arg("train_fraction"), py::arg("seed"));
    m.def("value_range", &value_range, py::arg("matrix"));
    m.def("save_matrix", &save_matrix, py::arg("matrix"), py::arg("path"));
    m.def("load_matrix", &load_matrix, py::arg("path"));

    py::enum_<Confidence>(m, "Confidence")
        .value("High", Confidence::High)
        .value("Low", Confidence::Low);

    py::class_<HoiRecord>(m, "HoiRecord")
        .def_readonly("u", &HoiRecord::u)
        .def_readonly("i", &HoiRecord::i)
        .def_readonly("order", &HoiRecord::order)
        .def_readonly("confidence", &HoiRecord::confidence);

    py::class_<HoiStats>(m, "HoiStats")
        .def_readonly("high_per_order", &HoiStats::high_per_order)
        .def_readonly("low_per_order", &HoiStats::low_per_order)
        .def_readonly("n_high", &HoiStats::n_high)
        .def_readonly("n_low", &HoiStats::n_low)
        .def_readonly("n_unreachable", &HoiStats::n_unreachable)
        .def_readonly("n_beyond_cap", &HoiStats::n_beyond_cap);

    py::class_<InteractionGraph>(m, "InteractionGraph")
        .def_property_readonly("n_users", &InteractionGraph::n_users)
        .def_property_readonly("n_items", &InteractionGraph::n_items)
        .def_property_readonly("n_edges", &InteractionGraph::n_edges)
        .def("has_edge", &InteractionGraph::has_edge, py::arg("u"), py::arg("i"))
        .def("user_arcs",
             [](const InteractionGraph& g, std::int32_t u) {
                 std::vector<std::pair<std::int32_t, double>> out;
                 for (const WeightedArc& a : g.user_arcs(u)) out.emplace_back(a.to, a.weight);
                 return out;
             })
        .def("item_arcs", [](const InteractionGraph& g, std::int32_t i) {
            std::vector<std::pair<std::int32_t, double>> out;
            for (const WeightedArc& a : g.item_arcs(i)) out.emplace_back(a.to, a.weight);
            return out;
        });

    m.def("build_graph", &build_graph, py::arg("train"));
    m.def("hoi_order", &hoi_order, py::arg("graph"), py::arg("u"), py::arg("i"));
    m.def("classify_confidence", &classify_confidence, py::arg("graph"), py::arg("u"), py::arg("i"),
          py::arg("order"));
    m.def(
        "high_confidence_set",
        [](const InteractionGraph& g, std::int32_t max_order, int n_threads) {
            HoiStats stats;
            HoiSet set = high_confidence_set(g, max_order, &stats, n_threads);
            std::vector<HoiRecord> records(set.records().begin(), set.records().end());
            return py::make_tuple(std::move(records), std::move(stats));
        },
        py::arg("graph"), py::arg("max_order") = 2, py::arg("n_threads") = 0);

    py::class_<SgdHyper>(m, "SgdHyper")
        .def(py::init<double, double, double>(), py::arg("eta"), py::arg("lambda_"),
             py::arg("alpha"))
        .def_readonly("eta", &SgdHyper::eta)
        .def_readonly("lambda_", &SgdHyper::lambda)
        .def_readonly("alpha", &SgdHyper::alpha);

    py::enum_<EntryKind>(m, "EntryKind")
        .value("Observed", EntryKind::Observed)
        .value("Pseudo", EntryKind::Pseudo);

    py::class_<PseudoEntry>(m, "PseudoEntry")
        .def(py::init<std::int32_t, std::int32_t, double>(), py::arg("u"), py::arg("i"),
             py::arg("value"))
        .def_readonly("u", &PseudoEntry::u)
        .def_readonly("i", &PseudoEntry::i)
        .def_readonly("value", &PseudoEntry::value);

    py::class_<FactorModel>(m, "FactorModel")
        .def_property_readonly("n_rows", &FactorModel::n_rows)
        .def_property_readonly("n_cols", &FactorModel::n_cols)
        .def_property_readonly("f", &FactorModel::f)
        .def_property_readonly("range", &FactorModel::range)
        .def("predict", &FactorModel::predict, py::arg("u"), py::arg("i"))
        .def("x_row",
             [](const FactorModel& mdl, std::int32_t u) {
                 auto row = mdl.x_row(u);
                 return std::vector<double>(row.begin(), row.end());
             })
        .def("y_row", [](const FactorModel& mdl, std::int32_t i) {
            auto row = mdl.y_row(i);
            return std::vector<double>(row.begin(), row.end());
        });

    m.def("init_model", &init_model, py::arg("n_rows"), py::arg("n_cols"), py::arg("f"),
          py::arg("seed"), py::arg("mean_rating"), py::arg("range"));
    m.def("clamp_activation", &clamp_activation, py::arg("r_hat"), py::arg("range"));
    m.def(
        "objective",
        [](const FactorModel& mdl, const std::vector<Entry>& observed,
           const std::vector<PseudoEntry>& pseudo, const SgdHyper& hyper) {
            return objective(mdl, observed, pseudo, hyper);
        },
        py::arg("model"), py::arg("observed"), py::arg("pseudo"), py::arg("hyper"));
    m.def("sgd_step", &sgd_step, py::arg("model"), py::arg("u"), py::arg("i"), py::arg("value"),
          py::arg("kind"), py::arg("hyper"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("f", &TrainConfig::f)
        .def_readwrite("eta", &TrainConfig::eta)
        .def_readwrite("lambda_", &TrainConfig::lambda)
        .def_readwrite("alpha", &TrainConfig::alpha)
        .def_readwrite("n_rounds", &TrainConfig::n_rounds)
        .def_readwrite("max_epochs_per_round", &TrainConfig::max_epochs_per_round)
        .def_readwrite("tol", &TrainConfig::tol)
        .def_readwrite("val_fraction", &TrainConfig::val_fraction)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("max_order", &TrainConfig::max_order)
        .def_readwrite("warm_start", &TrainConfig::warm_start)
        .def_readwrite("range_override", &TrainConfig::range_override);

    py::class_<RoundReport>(m, "RoundReport")
        .def_readonly("round", &RoundReport::round)
        .def_readonly("epochs", &RoundReport::epochs)
        .def_readonly("final_objective", &RoundReport::final_objective)
        .def_readonly("objectives", &RoundReport::objectives)
        .def_readonly("val_rmse", &RoundReport::val_rmse)
        .def_readonly("sn_size", &RoundReport::sn_size)
        .def_readonly("lambda_size", &RoundReport::lambda_size);

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("rounds", &TrainReport::rounds)
        .def_readonly("hoi_high", &TrainReport::hoi_high)
        .def_readonly("hoi_low", &TrainReport::hoi_low)
        .def_readonly("n_sgd_entries", &TrainReport::n_sgd_entries)
        .def_readonly("n_val_entries", &TrainReport::n_val_entries)
        .def_readonly("mean_rating", &TrainReport::mean_rating)
        .def_readonly("range", &TrainReport::range);

    m.def(
        "train_glfa",
        [](const SparseMatrix& train, const TrainConfig& config) {
            TrainResult r = train_glfa(train, config);
            return py::make_tuple(std::move(r.model), std::move(r.report));
        },
        py::arg("train"), py::arg("config"));
    m.def(
        "train_blf",
        [](const SparseMatrix& train, const TrainConfig& config) {
            TrainResult r = train_blf(train, config);
            return py::make_tuple(std::move(r.model), std::move(r.report));
        },
        py::arg("train"), py::arg("config"));

    py::class_<Scorecard>(m, "Scorecard")
        .def_readonly("rmse", &Scorecard::rmse)
        .def_readonly("mae", &Scorecard::mae)
        .def_readonly("n_scored", &Scorecard::n_scored)
        .def_readonly("n_cold", &Scorecard::n_cold);

    m.def(
        "score",
        [](const FactorModel& mdl, const SparseMatrix& test, double fallback,
           const SparseMatrix* train) {
            if (!train) return score(mdl, test, fallback, nullptr);
            const SeenMask mask = seen_mask(*train);
            return score(mdl, test, fallback, &mask);
        },
        py::arg("model"), py::arg("test"), py::arg("fallback"), py::arg("train") = nullptr);

    py::enum_<Tail>(m, "Tail").value("TwoSided", Tail::TwoSided).value("OneSided", Tail::OneSided);

    py::class_<WilcoxonResult>(m, "WilcoxonResult")
        .def_readonly("r_plus", &WilcoxonResult::r_plus)
        .def_readonly("r_minus", &WilcoxonResult::r_minus)
        .def_readonly("p_value", &WilcoxonResult::p_value)
        .def_readonly("n_used", &WilcoxonResult::n_used)
        .def_readonly("exact", &WilcoxonResult::exact);

    m.def(
        "wilcoxon_signed_rank",
        [](const std::vector<double>& a, const std::vector<double>& b, Tail tail) {
            return wilcoxon_signed_rank(a, b, tail);
        },
        py::arg("a"), py::arg("b"), py::arg("tail") = Tail::TwoSided);
}
