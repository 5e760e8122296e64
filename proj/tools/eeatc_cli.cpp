// eeatc — command-line front end for the calibration toolkit.
//
// Subcommands: ingest (raw log -> clean canonical CSV), synth (generate a
// scenario), train / predict / evaluate (single model), sweep (feature-set x
// model-kind comparison report).
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data or I/O
// error. All file output is written atomically (temp file + rename) and
// contains no wall-clock state, so identical invocations produce identical
// bytes.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eeatc/eeatc.hpp"

namespace {

using namespace eeatc;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("failed while reading '" + path + "'");
    return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw IoError("failed while writing '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

NormScope parse_scope(const std::string& name) {
    if (name == "train_only")
        return NormScope::train_only;
    if (name == "full")
        return NormScope::full;
    throw BadConfig("unknown scope '" + name + "' (expected train_only or full)");
}

ModelKind parse_kind(const std::string& name) {
    if (const auto k = model_kind_from_name(name))
        return *k;
    throw BadConfig("unknown model kind '" + name + "' (expected mlr, rf, or eeatc)");
}

NannyKind parse_nanny_kind(const std::string& name) {
    if (name == "forest")
        return NannyKind::forest;
    if (name == "linear")
        return NannyKind::linear;
    throw BadConfig("unknown error-model kind '" + name +
                    "' (expected forest or linear)");
}

// Options shared by train and sweep.
struct FitOptions {
    double split = 0.75;
    std::uint64_t seed = 0;
    std::string scope = "train_only";
    std::size_t trees = 200;
    std::size_t max_depth = 0;
    std::size_t min_leaf = 2;
    std::size_t min_split = 4;
    std::size_t mtry = 0;
    bool no_bootstrap = false;
    std::string nanny = "forest";
    unsigned threads = 1;
};

void add_fit_options(CLI::App* cmd, FitOptions& o) {
    cmd->add_option("--split", o.split, "Training fraction of the row split")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master seed for split and model streams")
        ->envname("EEATC_SEED")
        ->capture_default_str();
    cmd->add_option("--scope", o.scope,
                    "Rows used for normalization statistics (train_only|full)")
        ->capture_default_str();
    cmd->add_option("--trees", o.trees, "Trees per forest")->capture_default_str();
    cmd->add_option("--max-depth", o.max_depth, "Tree depth limit, 0 = unlimited")
        ->capture_default_str();
    cmd->add_option("--min-leaf", o.min_leaf, "Minimum samples per leaf")
        ->capture_default_str();
    cmd->add_option("--min-split", o.min_split, "Minimum samples to split a node")
        ->capture_default_str();
    cmd->add_option("--mtry", o.mtry, "Features tried per split, 0 = ceil(F/3)")
        ->capture_default_str();
    cmd->add_flag("--no-bootstrap", o.no_bootstrap,
                  "Grow every tree on the full sample");
    cmd->add_option("--nanny", o.nanny, "Error-model backbone (forest|linear)")
        ->capture_default_str();
    cmd->add_option("--threads", o.threads,
                    "Worker threads for forest fitting (does not affect results)")
        ->capture_default_str();
}

SplitConfig split_config(const FitOptions& o) {
    return SplitConfig{o.split, o.seed, parse_scope(o.scope)};
}

EeatcConfig eeatc_config(const FitOptions& o) {
    ForestParams fp;
    fp.n_trees = o.trees;
    fp.max_depth = o.max_depth;
    fp.min_samples_leaf = o.min_leaf;
    fp.min_samples_split = o.min_split;
    fp.mtry = o.mtry;
    fp.bootstrap = !o.no_bootstrap;
    EeatcConfig cfg;
    cfg.forest = fp;
    cfg.nanny.kind = parse_nanny_kind(o.nanny);
    cfg.nanny.forest = fp;
    cfg.seed = o.seed;
    return cfg;
}

Records load_records(const std::string& path, const ColumnMapping& mapping = {}) {
    Records records = parse_csv(read_file(path), mapping);
    sort_by_time(records);
    return records;
}

std::string metric_lines(std::string_view label, const MetricPair& m) {
    return std::string(label) + " r2 " + format_double(m.r2) + " rmse " +
           format_double(m.rmse) + " n " + std::to_string(m.n) + "\n";
}

// ---------------------------------------------------------------------------

int run_ingest(const std::string& in, const std::string& out,
               const std::string& report_path, const ColumnMapping& mapping,
               double bucket, bool stationary, double speed_threshold,
               std::size_t min_run, double robust_z) {
    Records records = parse_csv(read_file(in), mapping);
    const std::size_t n_parsed = records.size();
    sort_by_time(records);
    if (bucket > 0.0)
        records = bucket_average(records, bucket);
    const std::size_t n_bucketed = records.size();

    MotionConfig mcfg;
    mcfg.speed_threshold_kmh = speed_threshold;
    mcfg.min_run = min_run;
    mcfg.stationary_deployment = stationary;
    auto [moving, motion] = remove_stationary_segments(records, mcfg);

    OutlierConfig ocfg;
    ocfg.robust_z_max = robust_z;
    auto [clean, outliers] = filter_outliers(moving, ocfg);

    write_file_atomic(out, to_canonical_csv(clean));

    std::string report;
    report += "rows_parsed " + std::to_string(n_parsed) + "\n";
    report += "rows_bucketed " + std::to_string(n_bucketed) + "\n";
    report += "dropped_stationary " + std::to_string(motion.n_dropped) + "\n";
    report += "dropped_range " + std::to_string(outliers.n_range) + "\n";
    report += "dropped_robust " + std::to_string(outliers.n_robust) + "\n";
    report += "rows_out " + std::to_string(clean.size()) + "\n";
    std::cout << report;
    if (!report_path.empty())
        write_file_atomic(report_path, report);
    return 0;
}

int run_synth(const std::string& preset, std::size_t n, std::uint64_t seed,
              const std::string& out, const std::string& sidecar) {
    const auto cfg = synth_preset(preset, n, seed);
    if (!cfg)
        throw BadConfig("unknown preset '" + preset +
                        "' (expected noiseless_linear, heteroscedastic, rh_noise, "
                        "mobile, or lagged)");
    const SynthData data = synth_generate(*cfg);
    write_file_atomic(out, to_canonical_csv(data.records));
    if (!sidecar.empty()) {
        std::string text = "timestamp,noise_std\n";
        for (std::size_t i = 0; i < data.records.size(); ++i)
            text += format_double(data.records[i].timestamp) + "," +
                    format_double(data.noise_std[i]) + "\n";
        write_file_atomic(sidecar, text);
    }
    std::cout << "rows " << data.records.size() << "\n";
    return 0;
}

int run_train(const std::string& in, const std::string& out,
              const std::string& kind_name, const std::string& features,
              const FitOptions& fit) {
    const FeatureSpec spec = FeatureSpec::parse(features);
    const ModelKind kind = parse_kind(kind_name);
    const Records records = load_records(in);
    const auto [train, test] = prepare_split(records, spec, split_config(fit));
    const CalibrationModel model =
        train_model(train, kind, eeatc_config(fit), fit.threads);
    const EvalEntry entry = evaluate_model(model, train, test);
    write_file_atomic(out, save_model(model));
    std::cout << metric_lines("train", entry.train) << metric_lines("test", entry.test);
    return 0;
}

int run_predict(const std::string& model_path, const std::string& in,
                const std::string& out) {
    const CalibrationModel model = load_model(read_file(model_path));
    const Records records = load_records(in);
    const RecordPredictions pred = predict_records(model, records);
    std::string text = "timestamp,y_hat\n";
    for (std::size_t i = 0; i < pred.values.size(); ++i)
        text += format_double(pred.timestamps[i]) + "," +
                format_double(pred.values[i]) + "\n";
    write_file_atomic(out, text);
    std::cout << "rows " << pred.values.size() << "\n";
    return 0;
}

int run_evaluate(const std::string& model_path, const std::string& in,
                 double split, std::uint64_t seed, const std::string& partition) {
    const CalibrationModel model = load_model(read_file(model_path));
    const Records records = load_records(in);
    CalDataset raw = assemble_features(records, model.spec);

    CalDataset part;
    if (partition == "all") {
        part = std::move(raw);
    } else if (partition == "train" || partition == "test") {
        auto [tr, te] = train_test_split(raw, split, seed);
        part = partition == "train" ? std::move(tr) : std::move(te);
    } else {
        throw BadConfig("unknown partition '" + partition +
                        "' (expected train, test, or all)");
    }
    const CalDataset normed = normalize_dataset(part, model.norm);
    const std::vector<double> pred = model_predict(model, normed.x);
    const MetricPair m = evaluate(pred, normed.y);
    std::cout << "partition " << partition << "\n"
              << "r2 " << format_double(m.r2) << "\n"
              << "rmse " << format_double(m.rmse) << "\n"
              << "mae " << format_double(mae(pred, normed.y)) << "\n"
              << "n " << m.n << "\n";
    return 0;
}

int run_sweep(const std::string& in, const std::string& out_dir,
              const std::vector<std::string>& feature_lists,
              const std::string& kinds_list, const FitOptions& fit) {
    SweepConfig cfg;
    for (const auto& f : feature_lists)
        cfg.specs.push_back(FeatureSpec::parse(f));
    cfg.kinds.clear();
    std::stringstream ks(kinds_list);
    for (std::string item; std::getline(ks, item, ',');)
        cfg.kinds.push_back(parse_kind(item));
    cfg.split = split_config(fit);
    cfg.eeatc = eeatc_config(fit);
    cfg.n_threads = fit.threads;

    const Records records = load_records(in);
    const EvalReport report = feature_sweep(records, cfg);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create '" + out_dir + "': " + ec.message());
    const auto path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    write_file_atomic(path("report.txt"), render_report(report));
    write_file_atomic(path("report.mach"), encode_report(report));

    std::string snapshot = "command sweep\n";
    for (const auto& spec : cfg.specs)
        snapshot += "features " + spec.to_string() + "\n";
    snapshot += "kinds " + kinds_list + "\n";
    snapshot += "train_fraction " + format_double(fit.split) + "\n";
    snapshot += "seed " + std::to_string(fit.seed) + "\n";
    snapshot += "scope " + fit.scope + "\n";
    snapshot += "trees " + std::to_string(fit.trees) + "\n";
    snapshot += "max_depth " + std::to_string(fit.max_depth) + "\n";
    snapshot += "min_leaf " + std::to_string(fit.min_leaf) + "\n";
    snapshot += "min_split " + std::to_string(fit.min_split) + "\n";
    snapshot += "mtry " + std::to_string(fit.mtry) + "\n";
    snapshot += std::string("bootstrap ") + (fit.no_bootstrap ? "0" : "1") + "\n";
    snapshot += "nanny " + fit.nanny + "\n";
    write_file_atomic(path("run_config.txt"), snapshot);

    std::cout << render_report(report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-phase calibration toolkit for low-cost air-quality sensors"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI file");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Clean a raw sensor log");
    std::string ing_in, ing_out, ing_report;
    ColumnMapping mapping;
    double ing_bucket = 60.0, ing_speed = 1.0, ing_robust = 4.0;
    std::size_t ing_min_run = 1;
    bool ing_stationary = false;
    ingest->add_option("--in", ing_in, "Raw CSV log")->required();
    ingest->add_option("--out", ing_out, "Cleaned canonical CSV")->required();
    ingest->add_option("--report", ing_report, "Also write the drop report here");
    ingest->add_option("--col-timestamp", mapping.timestamp, "Timestamp column name")
        ->capture_default_str();
    ingest->add_option("--col-s", mapping.s, "Sensor column name")->capture_default_str();
    ingest->add_option("--col-t", mapping.t, "Temperature column name")
        ->capture_default_str();
    ingest->add_option("--col-rh", mapping.rh, "Relative-humidity column name")
        ->capture_default_str();
    ingest->add_option("--col-y", mapping.y, "Reference column name")
        ->capture_default_str();
    ingest->add_option("--col-lat", mapping.lat, "Latitude column name")
        ->capture_default_str();
    ingest->add_option("--col-lon", mapping.lon, "Longitude column name")
        ->capture_default_str();
    ingest->add_option("--col-speed", mapping.speed, "Speed column name (km/h)")
        ->capture_default_str();
    ingest->add_option("--bucket", ing_bucket, "Averaging bucket width in seconds, 0 = off")
        ->capture_default_str();
    ingest->add_flag("--stationary", ing_stationary,
                     "Fixed-site deployment: skip the low-motion filter");
    ingest->add_option("--speed-threshold", ing_speed, "Low-motion speed cut in km/h")
        ->capture_default_str();
    ingest->add_option("--min-run", ing_min_run,
                       "Minimum consecutive low-speed records to drop")
        ->capture_default_str();
    ingest->add_option("--robust-z", ing_robust,
                       "Robust z-score cut for outliers, 0 = off")
        ->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
    std::string syn_preset = "heteroscedastic", syn_out, syn_sidecar;
    std::size_t syn_n = 2000;
    std::uint64_t syn_seed = 0;
    synth->add_option("--preset", syn_preset,
                      "noiseless_linear|heteroscedastic|rh_noise|mobile|lagged")
        ->capture_default_str();
    synth->add_option("--n", syn_n, "Number of samples")->capture_default_str();
    synth->add_option("--seed", syn_seed, "Generator seed")
        ->envname("EEATC_SEED")
        ->capture_default_str();
    synth->add_option("--out", syn_out, "Canonical CSV output")->required();
    synth->add_option("--sidecar", syn_sidecar,
                      "Also write per-sample true noise spread here");

    // train
    auto* train = app.add_subcommand("train", "Train one model on a clean log");
    std::string tr_in, tr_out, tr_kind = "eeatc", tr_features = "s,t,rh";
    FitOptions tr_fit;
    train->add_option("--in", tr_in, "Clean canonical CSV")->required();
    train->add_option("--out", tr_out, "Model file")->required();
    train->add_option("--model", tr_kind, "Model kind (mlr|rf|eeatc)")
        ->capture_default_str();
    train->add_option("--features", tr_features, "Comma-separated feature list")
        ->capture_default_str();
    add_fit_options(train, tr_fit);

    // predict
    auto* predict = app.add_subcommand("predict", "Apply a trained model");
    std::string pr_model, pr_in, pr_out;
    predict->add_option("--model", pr_model, "Model file")->required();
    predict->add_option("--in", pr_in, "Canonical CSV (reference column optional)")
        ->required();
    predict->add_option("--out", pr_out, "Predictions CSV")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score a trained model");
    std::string ev_model, ev_in, ev_partition = "test";
    double ev_split = 0.75;
    std::uint64_t ev_seed = 0;
    evaluate->add_option("--model", ev_model, "Model file")->required();
    evaluate->add_option("--in", ev_in, "Clean canonical CSV with reference values")
        ->required();
    evaluate->add_option("--split", ev_split, "Training fraction used at train time")
        ->capture_default_str();
    evaluate->add_option("--seed", ev_seed, "Seed used at train time")
        ->envname("EEATC_SEED")
        ->capture_default_str();
    evaluate->add_option("--partition", ev_partition, "train|test|all")
        ->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Compare feature sets and model kinds");
    std::string sw_in, sw_out_dir = "results", sw_kinds = "mlr,rf,eeatc";
    std::vector<std::string> sw_features;
    FitOptions sw_fit;
    sweep->add_option("--in", sw_in, "Clean canonical CSV")->required();
    sweep->add_option("--out-dir", sw_out_dir, "Directory for report files")
        ->capture_default_str();
    sweep->add_option("--features", sw_features,
                      "Feature list; repeat the flag for each set")
        ->required();
    sweep->add_option("--kinds", sw_kinds, "Comma-separated model kinds")
        ->capture_default_str();
    add_fit_options(sweep, sw_fit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*ingest)
            return run_ingest(ing_in, ing_out, ing_report, mapping, ing_bucket,
                              ing_stationary, ing_speed, ing_min_run, ing_robust);
        if (*synth)
            return run_synth(syn_preset, syn_n, syn_seed, syn_out, syn_sidecar);
        if (*train)
            return run_train(tr_in, tr_out, tr_kind, tr_features, tr_fit);
        if (*predict)
            return run_predict(pr_model, pr_in, pr_out);
        if (*evaluate)
            return run_evaluate(ev_model, ev_in, ev_split, ev_seed, ev_partition);
        if (*sweep)
            return run_sweep(sw_in, sw_out_dir, sw_features, sw_kinds, sw_fit);
    } catch (const BadConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
