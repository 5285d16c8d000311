// glfa: end-to-end pipeline driver — ingest, split, mine HOIs, train,
// evaluate, predict, and benchmark BLF against GLFA.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "glfa/factor_model.hpp"
#include "glfa/interaction_graph.hpp"
#include "glfa/metrics.hpp"
#include "glfa/rng.hpp"
#include "glfa/sparse_matrix.hpp"
#include "glfa/text.hpp"
#include "glfa/trainer.hpp"

namespace fs = std::filesystem;
using namespace glfa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMissingFile = 3;
constexpr int kExitParse = 4;
constexpr int kExitDivergence = 5;

struct Options {
    std::string subcommand;
    std::string input, model_path, test_path, train_path, pairs_path, idmap_path;
    std::string out_dir, config_path;
    std::string format = "auto";
    bool has_header = false;
    double fraction = 0.2;
    std::uint64_t seed = 0;
    std::int32_t f = 20;
    double eta = 0.01, lambda = 0.05, alpha = 0.1;
    std::int32_t n_rounds = 3, max_order = 2, max_epochs = 200;
    bool n_rounds_set = false;
    double tol = 1e-5, val_fraction = 0.05;
    int warm_start = 1;
    bool glfa_mode = false;
    double fallback = 0;
    bool fallback_set = false;
    double r_min = 0, r_max = 0;
    bool r_min_set = false, r_max_set = false;
    bool clamp = false, tsv = false;
    int seeds = 5;
};

using ConfigMap = std::map<std::string, std::string>;

ConfigMap read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    ConfigMap cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key=value");
        cfg[std::string(trim(sv.substr(0, eq)))] = std::string(trim(sv.substr(eq + 1)));
    }
    return cfg;
}

double cfg_double(const std::string& key, const std::string& value) {
    auto v = parse_double(value);
    if (!v) throw std::runtime_error("config key '" + key + "': bad numeric value '" + value + "'");
    return *v;
}

std::int64_t cfg_int(const std::string& key, const std::string& value) {
    auto v = parse_int(value);
    if (!v) throw std::runtime_error("config key '" + key + "': bad integer value '" + value + "'");
    return *v;
}

bool cfg_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw std::runtime_error("config key '" + key + "': bad boolean value '" + value + "'");
}

void apply_config(Options& o, const ConfigMap& cfg) {
    for (const auto& [key, value] : cfg) {
        if (key == "subcommand") {
            if (value != o.subcommand)
                throw std::runtime_error("config was written by subcommand '" + value +
                                         "', not '" + o.subcommand + "'");
        } else if (key == "input") o.input = value;
        else if (key == "model") o.model_path = value;
        else if (key == "test") o.test_path = value;
        else if (key == "train") o.train_path = value;
        else if (key == "pairs") o.pairs_path = value;
        else if (key == "idmap") o.idmap_path = value;
        else if (key == "format") o.format = value;
        else if (key == "has_header") o.has_header = cfg_bool(key, value);
        else if (key == "fraction") o.fraction = cfg_double(key, value);
        else if (key == "seed") o.seed = static_cast<std::uint64_t>(cfg_int(key, value));
        else if (key == "f") o.f = static_cast<std::int32_t>(cfg_int(key, value));
        else if (key == "eta") o.eta = cfg_double(key, value);
        else if (key == "lambda") o.lambda = cfg_double(key, value);
        else if (key == "alpha") o.alpha = cfg_double(key, value);
        else if (key == "n_rounds") { o.n_rounds = static_cast<std::int32_t>(cfg_int(key, value)); o.n_rounds_set = true; }
        else if (key == "max_order") o.max_order = static_cast<std::int32_t>(cfg_int(key, value));
        else if (key == "max_epochs") o.max_epochs = static_cast<std::int32_t>(cfg_int(key, value));
        else if (key == "tol") o.tol = cfg_double(key, value);
        else if (key == "val_fraction") o.val_fraction = cfg_double(key, value);
        else if (key == "warm_start") o.warm_start = cfg_bool(key, value) ? 1 : 0;
        else if (key == "glfa") o.glfa_mode = cfg_bool(key, value);
        else if (key == "fallback") { o.fallback = cfg_double(key, value); o.fallback_set = true; }
        else if (key == "r_min") { o.r_min = cfg_double(key, value); o.r_min_set = true; }
        else if (key == "r_max") { o.r_max = cfg_double(key, value); o.r_max_set = true; }
        else if (key == "clamp") o.clamp = cfg_bool(key, value);
        else if (key == "tsv") o.tsv = cfg_bool(key, value);
        else if (key == "seeds") o.seeds = static_cast<int>(cfg_int(key, value));
        else throw std::runtime_error("unknown config key '" + key + "'");
    }
}

std::string bool_str(bool b) { return b ? "1" : "0"; }

// Everything needed to reproduce the run, minus the output location.
std::vector<std::pair<std::string, std::string>> runspec_lines(const Options& o) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("subcommand", o.subcommand);
    auto data_keys = [&] {
        kv.emplace_back("input", o.input);
        kv.emplace_back("format", o.format);
        kv.emplace_back("has_header", bool_str(o.has_header));
    };
    auto train_keys = [&] {
        kv.emplace_back("glfa", bool_str(o.glfa_mode));
        kv.emplace_back("f", std::to_string(o.f));
        kv.emplace_back("eta", format_double(o.eta));
        kv.emplace_back("lambda", format_double(o.lambda));
        kv.emplace_back("alpha", format_double(o.alpha));
        kv.emplace_back("n_rounds", std::to_string(o.n_rounds));
        kv.emplace_back("max_order", std::to_string(o.max_order));
        kv.emplace_back("max_epochs", std::to_string(o.max_epochs));
        kv.emplace_back("tol", format_double(o.tol));
        kv.emplace_back("val_fraction", format_double(o.val_fraction));
        kv.emplace_back("warm_start", bool_str(o.warm_start != 0));
        kv.emplace_back("seed", std::to_string(o.seed));
        if (o.r_min_set) kv.emplace_back("r_min", format_double(o.r_min));
        if (o.r_max_set) kv.emplace_back("r_max", format_double(o.r_max));
    };
    if (o.subcommand == "split") {
        data_keys();
        kv.emplace_back("fraction", format_double(o.fraction));
        kv.emplace_back("seed", std::to_string(o.seed));
    } else if (o.subcommand == "hoi-stats") {
        data_keys();
        kv.emplace_back("max_order", std::to_string(o.max_order));
    } else if (o.subcommand == "train") {
        data_keys();
        train_keys();
    } else if (o.subcommand == "evaluate") {
        kv.emplace_back("model", o.model_path);
        kv.emplace_back("test", o.test_path);
        kv.emplace_back("format", o.format);
        kv.emplace_back("has_header", bool_str(o.has_header));
        if (!o.train_path.empty()) kv.emplace_back("train", o.train_path);
        if (o.fallback_set) kv.emplace_back("fallback", format_double(o.fallback));
        kv.emplace_back("tsv", bool_str(o.tsv));
    } else if (o.subcommand == "predict") {
        kv.emplace_back("model", o.model_path);
        kv.emplace_back("pairs", o.pairs_path);
        if (!o.idmap_path.empty()) kv.emplace_back("idmap", o.idmap_path);
        kv.emplace_back("clamp", bool_str(o.clamp));
    } else if (o.subcommand == "bench") {
        data_keys();
        kv.emplace_back("fraction", format_double(o.fraction));
        kv.emplace_back("seeds", std::to_string(o.seeds));
        train_keys();
    }
    return kv;
}

void write_runspec(const Options& o) {
    std::ofstream out(fs::path(o.out_dir) / "runspec.cfg");
    if (!out) throw std::runtime_error("cannot write runspec.cfg in " + o.out_dir);
    for (const auto& [k, v] : runspec_lines(o)) out << k << '=' << v << '\n';
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw CLI::ValidationError(std::string(what) + " path is required");
    if (!fs::exists(path)) {
        std::cerr << "glfa: missing " << what << " file: " << path << "\n";
        std::exit(kExitMissingFile);
    }
}

void prepare_out_dir(const std::string& dir) {
    if (dir.empty()) throw CLI::ValidationError("--out directory is required");
    fs::create_directories(dir);
}

std::string sniff_format(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (sv.starts_with("# rows=")) return "matrix";
        if (sv.front() == '#') continue;
        if (sv.find("::") != std::string_view::npos) return "movielens";
        if (sv.find('\t') != std::string_view::npos) return "tsv";
        if (sv.find(',') != std::string_view::npos) return "csv";
        break;
    }
    throw std::runtime_error("cannot infer format of " + path.string() +
                             "; pass --format explicitly");
}

struct InputData {
    SparseMatrix matrix;
    IdMap ids;
    bool has_ids = false;
};

InputData load_input(const std::string& path, const std::string& format, bool has_header) {
    std::string fmt = format == "auto" ? sniff_format(path) : format;
    if (fmt == "matrix") return {load_matrix(path), {}, false};
    RatingFormat rf;
    if (fmt == "movielens") rf = RatingFormat::MovieLens;
    else if (fmt == "tsv") rf = RatingFormat::Tsv;
    else if (fmt == "csv") rf = RatingFormat::Csv;
    else throw std::runtime_error("unknown format '" + fmt + "'");
    LoadedRatings loaded = load_ratings(path, rf, has_header);
    return {std::move(loaded.matrix), std::move(loaded.ids), true};
}

TrainConfig to_train_config(const Options& o) {
    TrainConfig cfg;
    cfg.f = o.f;
    cfg.eta = o.eta;
    cfg.lambda = o.lambda;
    cfg.alpha = o.alpha;
    cfg.n_rounds = o.n_rounds;
    cfg.max_epochs_per_round = o.max_epochs;
    cfg.tol = o.tol;
    cfg.val_fraction = o.val_fraction;
    cfg.seed = o.seed;
    cfg.max_order = o.max_order;
    cfg.warm_start = o.warm_start != 0;
    if (o.r_min_set != o.r_max_set)
        throw std::runtime_error("--r-min and --r-max must be given together");
    if (o.r_min_set) cfg.range_override = ValueRange{o.r_min, o.r_max};
    return cfg;
}

int cmd_split(const Options& o) {
    require_file(o.input, "input");
    prepare_out_dir(o.out_dir);
    InputData data = load_input(o.input, o.format, o.has_header);
    auto [train, test] = split(data.matrix, o.fraction, o.seed);

    save_matrix(train, fs::path(o.out_dir) / "train.tsv");
    save_matrix(test, fs::path(o.out_dir) / "test.tsv");
    if (data.has_ids) save_id_map(data.ids, fs::path(o.out_dir) / "idmap.tsv");
    write_runspec(o);

    std::cout << "matrix: " << data.matrix.n_rows() << " x " << data.matrix.n_cols()
              << ", nnz=" << data.matrix.nnz() << ", density="
              << format_double(data.matrix.density()) << "\n"
              << "train: " << train.nnz() << " entries, test: " << test.nnz() << " entries\n";
    return kExitOk;
}

int cmd_hoi_stats(const Options& o) {
    require_file(o.input, "input");
    prepare_out_dir(o.out_dir);
    InputData data = load_input(o.input, o.format, o.has_header);
    InteractionGraph graph = build_graph(data.matrix);
    HoiStats stats;
    HoiSet set = high_confidence_set(graph, o.max_order, &stats);

    {
        std::ofstream out(fs::path(o.out_dir) / "hoi.tsv");
        if (!out) throw std::runtime_error("cannot write hoi.tsv");
        out << "# u\ti\torder\n";
        for (const HoiRecord& r : set.records())
            out << r.u << '\t' << r.i << '\t' << r.order << '\n';
    }
    {
        std::ofstream out(fs::path(o.out_dir) / "hoi_summary.txt");
        if (!out) throw std::runtime_error("cannot write hoi_summary.txt");
        out << "high\t" << stats.n_high << "\nlow\t" << stats.n_low << "\nunreachable\t"
            << stats.n_unreachable << "\nbeyond_cap\t" << stats.n_beyond_cap << "\n";
        for (const auto& [order, n] : stats.high_per_order)
            out << "high_order_" << order << '\t' << n << '\n';
        for (const auto& [order, n] : stats.low_per_order)
            out << "low_order_" << order << '\t' << n << '\n';
    }
    write_runspec(o);

    std::cout << "|S|=" << stats.n_high << " low=" << stats.n_low
              << " unreachable=" << stats.n_unreachable << " beyond_cap=" << stats.n_beyond_cap
              << "\n";
    return kExitOk;
}

int cmd_train(const Options& o) {
    require_file(o.input, "input");
    prepare_out_dir(o.out_dir);
    if (!o.glfa_mode && o.n_rounds_set && o.n_rounds > 1)
        throw std::runtime_error("n_rounds > 1 requires --glfa");

    InputData data = load_input(o.input, o.format, o.has_header);
    TrainConfig cfg = to_train_config(o);
    if (!o.glfa_mode) cfg.n_rounds = 1;

    TrainResult result = o.glfa_mode ? train_glfa(data.matrix, cfg) : train_blf(data.matrix, cfg);

    save_model(result.model, fs::path(o.out_dir) / "model.txt");
    save_report(result.report, fs::path(o.out_dir) / "report.txt");
    Options effective = o;
    effective.n_rounds = cfg.n_rounds;  // what actually ran, so the runspec replays cleanly
    write_runspec(effective);

    for (const RoundReport& r : result.report.rounds)
        std::cout << "round " << r.round << ": epochs=" << r.epochs
                  << " objective=" << format_double(r.final_objective)
                  << " val_rmse=" << (r.val_rmse.empty() ? "-" : format_double(r.val_rmse.back()))
                  << " |S_n|=" << r.sn_size << " |lambda|=" << r.lambda_size << "\n";
    return kExitOk;
}

int cmd_evaluate(const Options& o) {
    require_file(o.model_path, "model");
    require_file(o.test_path, "test");
    prepare_out_dir(o.out_dir);

    FactorModel model = load_model(o.model_path);
    InputData test = load_input(o.test_path, o.format, o.has_header);

    double fallback = o.fallback;
    std::optional<SeenMask> mask;
    if (!o.train_path.empty()) {
        require_file(o.train_path, "train");
        InputData train = load_input(o.train_path, o.format, o.has_header);
        mask = seen_mask(train.matrix);
        if (!o.fallback_set) fallback = train.matrix.mean_value();
    } else if (!o.fallback_set) {
        throw std::runtime_error("evaluate needs --train or an explicit --fallback value");
    }

    Scorecard card = score(model, test.matrix, fallback, mask ? &*mask : nullptr);

    {
        std::ofstream out(fs::path(o.out_dir) / "scorecard.txt");
        if (!out) throw std::runtime_error("cannot write scorecard.txt");
        out << "rmse      " << format_double(card.rmse) << "\n"
            << "mae       " << format_double(card.mae) << "\n"
            << "n_scored  " << card.n_scored << "\n"
            << "n_cold    " << card.n_cold << "\n";
    }
    if (o.tsv) {
        std::ofstream out(fs::path(o.out_dir) / "scorecard.tsv");
        if (!out) throw std::runtime_error("cannot write scorecard.tsv");
        out << "rmse\tmae\tn_scored\tn_cold\n"
            << format_double(card.rmse) << '\t' << format_double(card.mae) << '\t' << card.n_scored
            << '\t' << card.n_cold << '\n';
    }
    write_runspec(o);

    std::cout << "rmse=" << format_double(card.rmse) << " mae=" << format_double(card.mae)
              << " n_scored=" << card.n_scored << " n_cold=" << card.n_cold << "\n";
    return kExitOk;
}

int cmd_predict(const Options& o) {
    require_file(o.model_path, "model");
    require_file(o.pairs_path, "pairs");
    prepare_out_dir(o.out_dir);

    FactorModel model = load_model(o.model_path);
    std::optional<IdMap> ids;
    std::map<std::string, std::int32_t, std::less<>> row_lookup, col_lookup;
    if (!o.idmap_path.empty()) {
        require_file(o.idmap_path, "idmap");
        ids = load_id_map(o.idmap_path);
        for (std::size_t k = 0; k < ids->row_tokens.size(); ++k)
            row_lookup.emplace(ids->row_tokens[k], static_cast<std::int32_t>(k));
        for (std::size_t k = 0; k < ids->col_tokens.size(); ++k)
            col_lookup.emplace(ids->col_tokens[k], static_cast<std::int32_t>(k));
    }

    std::ifstream in(o.pairs_path);
    std::ofstream out(fs::path(o.out_dir) / "predictions.tsv");
    if (!out) throw std::runtime_error("cannot write predictions.tsv");
    out << "# u\ti\tprediction\n";

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto fields = split_ws(sv);
        if (fields.size() != 2)
            throw ParseError("pairs line " + std::to_string(line_no) + ": expected 'user item'",
                             line_no);
        std::int32_t u, i;
        if (ids) {
            auto ru = row_lookup.find(fields[0]);
            auto ci = col_lookup.find(fields[1]);
            if (ru == row_lookup.end())
                throw ParseError("pairs line " + std::to_string(line_no) + ": unknown user token '" +
                                 std::string(fields[0]) + "'", line_no);
            if (ci == col_lookup.end())
                throw ParseError("pairs line " + std::to_string(line_no) + ": unknown item token '" +
                                 std::string(fields[1]) + "'", line_no);
            u = ru->second;
            i = ci->second;
        } else {
            const auto pu = parse_int(fields[0]);
            const auto pi = parse_int(fields[1]);
            if (!pu || !pi)
                throw ParseError("pairs line " + std::to_string(line_no) + ": expected integer ids",
                                 line_no);
            u = static_cast<std::int32_t>(*pu);
            i = static_cast<std::int32_t>(*pi);
        }
        if (u < 0 || u >= model.n_rows() || i < 0 || i >= model.n_cols())
            throw ParseError("pairs line " + std::to_string(line_no) + ": id out of range", line_no);
        double pred = model.predict(u, i);
        if (o.clamp) pred = clamp_activation(pred, model.range());
        out << fields[0] << '\t' << fields[1] << '\t' << format_double(pred) << '\n';
    }
    write_runspec(o);
    return kExitOk;
}

int cmd_bench(const Options& o) {
    require_file(o.input, "input");
    prepare_out_dir(o.out_dir);
    if (o.seeds < 3) throw std::runtime_error("bench needs at least 3 seeds");
    if (o.n_rounds < 2) throw std::runtime_error("bench compares BLF against GLFA; use n_rounds >= 2");

    InputData data = load_input(o.input, o.format, o.has_header);

    std::vector<double> blf_metrics, glfa_metrics;  // rmse block then mae block
    std::vector<std::array<double, 4>> rows;        // blf_rmse glfa_rmse blf_mae glfa_mae
    std::vector<double> blf_rmse, glfa_rmse, blf_mae, glfa_mae;

    for (int s = 0; s < o.seeds; ++s) {
        const std::uint64_t split_seed = derive_seed(o.seed, "bench.split." + std::to_string(s));
        auto [train, test] = split(data.matrix, o.fraction, split_seed);

        TrainConfig cfg = to_train_config(o);
        cfg.seed = derive_seed(o.seed, "bench.train." + std::to_string(s));

        TrainResult blf = train_blf(train, cfg);
        TrainResult glfa_run = train_glfa(train, cfg);

        const double fallback = train.mean_value();
        const SeenMask mask = seen_mask(train);
        const Scorecard cb = score(blf.model, test, fallback, &mask);
        const Scorecard cg = score(glfa_run.model, test, fallback, &mask);

        rows.push_back({cb.rmse, cg.rmse, cb.mae, cg.mae});
        blf_rmse.push_back(cb.rmse);
        glfa_rmse.push_back(cg.rmse);
        blf_mae.push_back(cb.mae);
        glfa_mae.push_back(cg.mae);
        std::cout << "seed " << s << ": blf rmse=" << format_double(cb.rmse)
                  << " glfa rmse=" << format_double(cg.rmse) << "\n";
    }

    blf_metrics = blf_rmse;
    blf_metrics.insert(blf_metrics.end(), blf_mae.begin(), blf_mae.end());
    glfa_metrics = glfa_rmse;
    glfa_metrics.insert(glfa_metrics.end(), glfa_mae.begin(), glfa_mae.end());

    {
        std::ofstream out(fs::path(o.out_dir) / "bench.tsv");
        if (!out) throw std::runtime_error("cannot write bench.tsv");
        out << "seed\tblf_rmse\tglfa_rmse\tblf_mae\tglfa_mae\n";
        for (int s = 0; s < o.seeds; ++s)
            out << s << '\t' << format_double(rows[s][0]) << '\t' << format_double(rows[s][1])
                << '\t' << format_double(rows[s][2]) << '\t' << format_double(rows[s][3]) << '\n';
    }
    {
        const WilcoxonResult one = wilcoxon_signed_rank(blf_metrics, glfa_metrics, Tail::OneSided);
        const WilcoxonResult two = wilcoxon_signed_rank(blf_metrics, glfa_metrics, Tail::TwoSided);
        std::ofstream out(fs::path(o.out_dir) / "wilcoxon.txt");
        if (!out) throw std::runtime_error("cannot write wilcoxon.txt");
        out << "r_plus\t" << format_double(one.r_plus) << "\nr_minus\t" << format_double(one.r_minus)
            << "\nn_used\t" << one.n_used << "\np_one_sided\t" << format_double(one.p_value)
            << "\np_two_sided\t" << format_double(two.p_value) << "\nexact\t"
            << (one.exact ? 1 : 0) << "\n";
        std::cout << "wilcoxon: R+=" << format_double(one.r_plus)
                  << " R-=" << format_double(one.r_minus)
                  << " p(one-sided)=" << format_double(one.p_value) << "\n";
    }
    write_runspec(o);
    return kExitOk;
}

void add_data_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--input", o.input, "ratings or matrix file");
    cmd->add_option("--format", o.format,
                    "input format: auto, movielens, tsv, csv, matrix (default auto)");
    cmd->add_flag("--has-header", o.has_header, "skip the first data line");
}

void add_train_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--f", o.f, "embedding dimension");
    cmd->add_option("--eta", o.eta, "SGD learning rate");
    cmd->add_option("--lambda", o.lambda, "regularization strength");
    cmd->add_option("--alpha", o.alpha, "pseudo-label aggregation coefficient");
    cmd->add_option("--n-rounds", o.n_rounds, "recurrent training rounds")
        ->each([&](const std::string&) { o.n_rounds_set = true; });
    cmd->add_option("--max-order", o.max_order, "HOI order cap (mining beyond 2 is combinatorial)");
    cmd->add_option("--max-epochs", o.max_epochs, "epoch cap per round");
    cmd->add_option("--tol", o.tol, "early-stop threshold on validation RMSE improvement");
    cmd->add_option("--val-fraction", o.val_fraction, "held-out share of train for early stopping");
    cmd->add_option("--warm-start", o.warm_start, "1: continue factors across rounds, 0: re-init");
    cmd->add_option("--seed", o.seed, "master RNG seed");
    cmd->add_option("--r-min", o.r_min, "rating range lower bound override")
        ->each([&](const std::string&) { o.r_min_set = true; });
    cmd->add_option("--r-max", o.r_max, "rating range upper bound override")
        ->each([&](const std::string&) { o.r_max_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
    Options o;

    CLI::App app{"graph-incorporated latent factor analysis"};
    app.require_subcommand(1);

    auto* sp = app.add_subcommand("split", "partition a ratings file into train and test");
    add_data_flags(sp, o);
    sp->add_option("--fraction", o.fraction, "train share of the observed entries");
    sp->add_option("--seed", o.seed, "split seed");
    sp->add_option("--out", o.out_dir, "output directory");
    sp->add_option("--config", o.config_path, "key=value file; flags override its keys");

    auto* hs = app.add_subcommand("hoi-stats", "mine the high-confidence HOI set");
    add_data_flags(hs, o);
    hs->add_option("--max-order", o.max_order, "HOI order cap");
    hs->add_option("--out", o.out_dir, "output directory");
    hs->add_option("--config", o.config_path, "key=value file; flags override its keys");

    auto* tr = app.add_subcommand("train", "train a BLF or GLFA model");
    add_data_flags(tr, o);
    tr->add_flag("--glfa", o.glfa_mode, "recurrent training with pseudo-labeled HOIs");
    add_train_flags(tr, o);
    tr->add_option("--out", o.out_dir, "output directory");
    tr->add_option("--config", o.config_path, "key=value file; flags override its keys");

    auto* ev = app.add_subcommand("evaluate", "score a model on a held-out test set");
    ev->add_option("--model", o.model_path, "model file");
    ev->add_option("--test", o.test_path, "test matrix file");
    ev->add_option("--format", o.format, "test file format (default auto)");
    ev->add_flag("--has-header", o.has_header, "skip the first data line");
    ev->add_option("--train", o.train_path, "training matrix (cold-start mask and mean fallback)");
    ev->add_option("--fallback", o.fallback, "explicit fallback prediction")
        ->each([&](const std::string&) { o.fallback_set = true; });
    ev->add_flag("--tsv", o.tsv, "also write scorecard.tsv");
    ev->add_option("--out", o.out_dir, "output directory");
    ev->add_option("--config", o.config_path, "key=value file; flags override its keys");

    auto* pr = app.add_subcommand("predict", "predict a list of (user, item) pairs");
    pr->add_option("--model", o.model_path, "model file");
    pr->add_option("--pairs", o.pairs_path, "file of 'user item' lines");
    pr->add_option("--idmap", o.idmap_path, "token map written by split (pairs use external ids)");
    pr->add_flag("--clamp", o.clamp, "apply the activation clamp to predictions");
    pr->add_option("--out", o.out_dir, "output directory");
    pr->add_option("--config", o.config_path, "key=value file; flags override its keys");

    auto* be = app.add_subcommand("bench", "paired BLF vs GLFA comparison over several seeds");
    add_data_flags(be, o);
    be->add_option("--fraction", o.fraction, "train share per split");
    be->add_option("--seeds", o.seeds, "number of paired runs");
    add_train_flags(be, o);
    be->add_option("--out", o.out_dir, "output directory");
    be->add_option("--config", o.config_path, "key=value file; flags override its keys");

    // A config file supplies defaults before parsing, so explicit flags win.
    try {
        std::string pre_sub = argc >= 2 && argv[1][0] != '-' ? argv[1] : "";
        std::string pre_config;
        for (int k = 2; k < argc; ++k) {
            const std::string_view a = argv[k];
            if (a == "--config" && k + 1 < argc) pre_config = argv[k + 1];
            else if (a.starts_with("--config=")) pre_config = a.substr(9);
        }
        if (!pre_config.empty()) {
            require_file(pre_config, "config");
            o.subcommand = pre_sub;
            apply_config(o, read_config(pre_config));
        }
    } catch (const std::exception& e) {
        std::cerr << "glfa: error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    o.subcommand = app.get_subcommands().front()->get_name();

    try {
        if (o.subcommand == "split") return cmd_split(o);
        if (o.subcommand == "hoi-stats") return cmd_hoi_stats(o);
        if (o.subcommand == "train") return cmd_train(o);
        if (o.subcommand == "evaluate") return cmd_evaluate(o);
        if (o.subcommand == "predict") return cmd_predict(o);
        if (o.subcommand == "bench") return cmd_bench(o);
        std::cerr << "glfa: unknown subcommand\n";
        return kExitUsage;
    } catch (const DivergenceError& e) {
        std::cerr << "glfa: divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const ParseError& e) {
        std::cerr << "glfa: parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "glfa: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "glfa: error: " << e.what() << "\n";
        return kExitError;
    }
}
