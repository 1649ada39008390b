// Single-binary command line for the whole pipeline: synthetic data,
// standalone causal graphs, window preprocessing, training/evaluation, and
// the Granger-vs-flow comparison. Every run echoes its resolved
// configuration into the output directory; with a fixed seed and --jobs 1
// all output bytes are reproducible, and any --jobs N must match them.

#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lfgnn/causality.hpp"
#include "lfgnn/config.hpp"
#include "lfgnn/data.hpp"
#include "lfgnn/errors.hpp"
#include "lfgnn/graphs.hpp"
#include "lfgnn/io.hpp"
#include "lfgnn/model.hpp"
#include "lfgnn/pipeline.hpp"
#include "lfgnn/train.hpp"

namespace {

using namespace lfgnn;

namespace fs = std::filesystem;

// Flag values land here; `count` on the matching CLI option decides whether
// they override the config file.
struct Flags {
    std::string config;
    std::string dataset;
    std::string regions;
    std::string out;
    std::string label;
    double alpha = 0.0;
    std::size_t surrogates = 0;
    std::uint64_t seed = 0;
    std::size_t topk = 0;
    int jobs = 1;
    std::size_t folds = 0;
    bool paper = false;
};

struct FlagOpts {
    CLI::Option* config = nullptr;
    CLI::Option* dataset = nullptr;
    CLI::Option* regions = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* label = nullptr;
    CLI::Option* alpha = nullptr;
    CLI::Option* surrogates = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* topk = nullptr;
    CLI::Option* jobs = nullptr;
    CLI::Option* folds = nullptr;
    CLI::Option* paper = nullptr;
};

FlagOpts add_common_flags(CLI::App* cmd, Flags& f) {
    FlagOpts o;
    o.config = cmd->add_option("--config", f.config, "run configuration file (INI)");
    o.dataset = cmd->add_option("--dataset", f.dataset, "dataset directory with manifest.json");
    o.regions = cmd->add_option("--regions", f.regions, "channel,region map file");
    o.out = cmd->add_option("--out", f.out, "output directory");
    o.label = cmd->add_option("--label", f.label, "label field: arousal or valence");
    o.alpha = cmd->add_option("--alpha", f.alpha, "edge significance level");
    o.surrogates = cmd->add_option("--surrogates", f.surrogates, "bootstrap surrogates per pair");
    o.seed = cmd->add_option("--seed", f.seed, "master seed");
    o.topk = cmd->add_option("--topk", f.topk, "keep k strongest sources per target (0 = all)");
    o.jobs = cmd->add_option("--jobs", f.jobs, "worker threads, 0 = hardware, 1 = reference");
    o.folds = cmd->add_option("--folds", f.folds, "outer cross-validation folds");
    o.paper = cmd->add_flag("--paper-protocol", f.paper,
                            "full-scale defaults (10x3 folds, 1000 surrogates)");
    return o;
}

void set_entry(IniFile& file, const std::string& key, const std::string& value) {
    file.entries.emplace_back(key, value);
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

// defaults <- config file <- flags, in that order.
RunConfig resolve_config(const Flags& f, const FlagOpts& o) {
    IniFile file;
    if (!f.config.empty()) file = IniFile::load(f.config);
    if (o.paper->count()) set_entry(file, "run.paper_protocol", f.paper ? "true" : "false");
    if (o.dataset->count()) set_entry(file, "paths.dataset", f.dataset);
    if (o.regions->count()) set_entry(file, "paths.regions", f.regions);
    if (o.out->count()) set_entry(file, "paths.output", f.out);
    if (o.label->count()) set_entry(file, "run.label", f.label);
    if (o.alpha->count()) set_entry(file, "causality.alpha", format_double(f.alpha));
    if (o.surrogates->count())
        set_entry(file, "causality.surrogates", std::to_string(f.surrogates));
    if (o.seed->count()) set_entry(file, "run.seed", std::to_string(f.seed));
    if (o.topk->count()) set_entry(file, "graph.topk", std::to_string(f.topk));
    if (o.jobs->count()) set_entry(file, "run.jobs", std::to_string(f.jobs));
    if (o.folds->count()) set_entry(file, "train.outer_folds", std::to_string(f.folds));
    RunConfig rc = RunConfig::from_ini(file);
    rc.validate();
    return rc;
}

std::string prepare_output(const RunConfig& rc) {
    fs::create_directories(rc.output_dir);
    write_file_atomic((fs::path(rc.output_dir) / "config_echo.ini").string(), rc.echo());
    return rc.output_dir;
}

std::string flow_csv(const FlowDecomposition& f, const std::vector<std::string>& labels,
                     bool tested) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "source,target,flow,tau,p_value\n";
    const std::size_t n = labels.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            out << labels[j] << "," << labels[i] << "," << f.flow(j, i) << "," << f.tau(j, i)
                << "," << (tested ? f.p_values(j, i) : 1.0) << "\n";
        }
    return out.str();
}

std::vector<FeatureGraphSample> load_windows(const std::string& dir) {
    const std::vector<FeatureGraphSample> samples = load_sample_set(dir);
    if (samples.empty()) throw DataError("no windows found in " + dir);
    return samples;
}

// Attention of each fold's model over its own test windows, then averaged
// across folds.
std::string fold_averaged_attention(std::vector<Model>& fold_models,
                                    const std::vector<FeatureGraphSample>& samples,
                                    const TrialFolds& outer) {
    std::vector<AttentionRow> total;
    for (std::size_t f = 0; f < fold_models.size(); ++f) {
        std::vector<FeatureGraphSample> test;
        for (std::size_t idx : outer.samples[f]) test.push_back(samples[idx]);
        const std::vector<AttentionRow> rows = mean_attention(fold_models[f], test);
        if (total.empty()) total = rows;
        else
            for (std::size_t r = 0; r < rows.size(); ++r) total[r].mean_weight += rows[r].mean_weight;
    }
    for (AttentionRow& row : total) row.mean_weight /= static_cast<double>(fold_models.size());
    return attention_csv(total);
}

int cmd_generate(const std::string& kind, const RunConfig& rc, std::size_t channels,
                 std::size_t trials, double seconds, double separation, double coupling,
                 std::size_t dim, double strength, std::size_t length) {
    if (rc.dataset_dir.empty()) throw ConfigError("generate needs --dataset (target directory)");
    if (kind == "emotion") {
        EmotionSynthConfig cfg;
        cfg.channels = channels;
        cfg.trials = trials;
        cfg.trial_seconds = seconds;
        cfg.rate = rc.target_rate;
        cfg.separation = separation;
        cfg.coupling = coupling;
        cfg.seed = rc.seed;
        const EmotionSynthResult result = generate_emotion_synthetic(cfg, rc.dataset_dir);
        std::cout << "wrote " << result.manifest.trials.size() << " trials to " << rc.dataset_dir
                  << "\nregions: " << result.region_path << "\nplanted class-1 edges:";
        for (const auto& [src, dst] : result.planted_edges) std::cout << " " << src << ">" << dst;
        std::cout << "\n";
        return 0;
    }
    if (kind == "var") {
        VarSystemSpec spec;
        spec.dim = dim;
        spec.coupling = Matrix(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) spec.coupling(i, i) = 0.5;
        for (std::size_t i = 1; i < dim; ++i) spec.coupling(i, i - 1) = strength;
        spec.length = length;
        spec.rate = rc.target_rate;
        spec.seed = rc.seed;
        const VarData data = generate_var(spec);
        fs::create_directories(rc.dataset_dir);
        const std::string file = (fs::path(rc.dataset_dir) / "var_000.bin").string();
        save_trial(file, data.series);
        std::cout << "wrote chain system (" << dim << " channels, " << length << " samples) to "
                  << file << "\ntrue edges:";
        for (const auto& [src, dst] : data.true_edges)
            std::cout << " " << data.series.labels[src] << ">" << data.series.labels[dst];
        std::cout << "\n";
        return 0;
    }
    throw ConfigError("unknown --kind '" + kind + "' (emotion or var)");
}

int cmd_causal(const RunConfig& rc, const std::string& input, double rate) {
    const TimeSeriesSet series = load_series(input, rate);
    series.validate();
    const std::string out = prepare_output(rc);

    FlowDecomposition f = normalize_flow(estimate_information_flow(series));
    CausalGraph graph;
    const bool tested = rc.alpha < 1.0;
    if (tested) {
        f = significance_test(series, std::move(f), rc.significance());
        graph = build_global_adjacency(f, rc.alpha, series.labels);
    } else {
        // alpha >= 1 keeps every edge and skips the surrogate test
        graph.labels = series.labels;
        graph.adjacency = Matrix(series.channel_count(), series.channel_count());
        graph.p_values = Matrix(series.channel_count(), series.channel_count());
        for (std::size_t i = 0; i < graph.adjacency.rows; ++i)
            for (std::size_t j = 0; j < graph.adjacency.cols; ++j) {
                graph.p_values(i, j) = 1.0;
                if (i != j) graph.adjacency(i, j) = std::abs(f.tau(i, j));
            }
    }

    write_file_atomic((fs::path(out) / "flow.csv").string(),
                      flow_csv(f, series.labels, tested));
    export_graph(graph, GraphFormat::json, (fs::path(out) / "global.json").string());
    export_graph(graph, GraphFormat::dot, (fs::path(out) / "global.dot").string());

    std::size_t edges = 0;
    for (std::size_t i = 0; i < graph.adjacency.rows; ++i)
        for (std::size_t j = 0; j < graph.adjacency.cols; ++j)
            if (graph.adjacency(i, j) != 0.0) ++edges;
    std::cout << "channels=" << series.channel_count() << " samples=" << series.sample_count()
              << " edges=" << edges << (tested ? "" : " (significance test skipped, alpha >= 1)")
              << "\nwrote flow.csv, global.json, global.dot to " << out << "\n";
    return 0;
}

int cmd_preprocess(const RunConfig& rc, const std::string& method_name) {
    if (rc.dataset_dir.empty()) throw ConfigError("preprocess needs a dataset directory");
    if (rc.regions_path.empty()) throw ConfigError("preprocess needs a region map");
    const EdgeMethod method =
        method_name == "granger" ? EdgeMethod::granger : EdgeMethod::liang;
    if (method_name != "granger" && method_name != "liang")
        throw ConfigError("unknown --method '" + method_name + "' (liang or granger)");

    const DatasetManifest manifest =
        DatasetManifest::load((fs::path(rc.dataset_dir) / "manifest.json").string());
    const RegionMap map = RegionMap::load(rc.regions_path);
    const std::vector<LoadedTrial> trials = load_dataset(manifest, rc.dataset_dir);

    const std::string out = prepare_output(rc);
    PreprocessStats stats;
    const std::vector<FeatureGraphSample> samples = build_samples(trials, map, rc, method, &stats);
    save_sample_set(samples, (fs::path(out) / "windows").string());

    std::cout << "windows=" << stats.windows << " global_density=" << std::setprecision(4)
              << stats.global_edge_density << " local_density=" << stats.local_edge_density
              << "\n";
    for (const std::string& w : stats.warnings) std::cout << "note: " << w << "\n";
    std::cout << "wrote " << stats.windows << " window files to " << out << "/windows\n";
    return 0;
}

int cmd_train(const RunConfig& rc, const std::string& windows_dir, double holdout,
              bool report_params) {
    if (rc.regions_path.empty()) throw ConfigError("train needs a region map");
    const RegionMap map = RegionMap::load(rc.regions_path);
    const ModelConfig model_cfg = rc.model_for(map);

    if (report_params) {
        Model model(model_cfg);
        std::cout << "parameters=" << model.param_count() << " fingerprint=" << std::hex
                  << model.fingerprint() << std::dec << "\n";
        return 0;
    }

    const std::vector<FeatureGraphSample> samples = load_windows(windows_dir);
    const TrainConfig tc = rc.train_config();
    const std::string out = prepare_output(rc);

    if (holdout > 0.0) {
        if (holdout >= 1.0) throw ConfigError("--holdout takes a fraction in (0, 1)");
        const std::size_t folds =
            std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(1.0 / holdout)));
        const TrialFolds split = stratified_trial_folds(samples, folds, tc.seed);
        std::vector<FeatureGraphSample> test, pool;
        for (std::size_t idx : split.samples[0]) test.push_back(samples[idx]);
        for (std::size_t f = 1; f < folds; ++f)
            for (std::size_t idx : split.samples[f]) pool.push_back(samples[idx]);
        const TrialFolds vsplit = stratified_trial_folds(pool, std::max<std::size_t>(2, tc.inner_folds), tc.seed + 1);
        std::vector<FeatureGraphSample> val, train;
        for (std::size_t idx : vsplit.samples[0]) val.push_back(pool[idx]);
        for (std::size_t f = 1; f < vsplit.samples.size(); ++f)
            for (std::size_t idx : vsplit.samples[f]) train.push_back(pool[idx]);

        Model model(model_cfg);
        const TrainCurves curves = train_two_stage(model, train, val, tc);
        const EvalResult r = evaluate(model, test);

        MetricsReport report;
        report.folds.push_back({r.accuracy, r.macro_f1, r.confusion});
        report.mean_accuracy = r.accuracy;
        report.mean_f1 = r.macro_f1;
        write_file_atomic((fs::path(out) / "metrics.json").string(), report.to_json());
        write_file_atomic((fs::path(out) / "curves.csv").string(), curves_csv(curves));
        save_weights(model, (fs::path(out) / "model.weights").string());
        write_file_atomic((fs::path(out) / "attention.csv").string(),
                          attention_csv(mean_attention(model, test)));
        std::cout << "holdout accuracy=" << r.accuracy << " macro_f1=" << r.macro_f1
                  << " (test windows=" << test.size() << ")\nwrote metrics.json, model.weights,"
                  << " curves.csv, attention.csv to " << out << "\n";
        return 0;
    }

    std::vector<Model> fold_models;
    const MetricsReport report = nested_cv(samples, model_cfg, tc, &fold_models);
    write_file_atomic((fs::path(out) / "metrics.json").string(), report.to_json());
    for (std::size_t f = 0; f < fold_models.size(); ++f) {
        std::ostringstream name;
        name << "fold_" << std::setw(2) << std::setfill('0') << f << ".weights";
        save_weights(fold_models[f], (fs::path(out) / name.str()).string());
    }
    const TrialFolds outer = outer_folds_of(samples, tc);
    write_file_atomic((fs::path(out) / "attention.csv").string(),
                      fold_averaged_attention(fold_models, samples, outer));
    std::cout << "accuracy=" << report.mean_accuracy << " +/- " << report.std_accuracy
              << " macro_f1=" << report.mean_f1 << " +/- " << report.std_f1 << " ("
              << report.folds.size() << " folds)\nwrote metrics.json, fold weights,"
              << " attention.csv to " << out << "\n";
    return 0;
}

int cmd_eval(const RunConfig& rc, const std::string& windows_dir, const std::string& weights,
             bool report_params) {
    if (rc.regions_path.empty()) throw ConfigError("eval needs a region map");
    const RegionMap map = RegionMap::load(rc.regions_path);
    Model model(rc.model_for(map));
    if (report_params) {
        std::cout << "parameters=" << model.param_count() << " fingerprint=" << std::hex
                  << model.fingerprint() << std::dec << "\n";
        return 0;
    }
    if (weights.empty()) throw ConfigError("eval needs --weights");
    load_weights(model, weights);
    const std::vector<FeatureGraphSample> samples = load_windows(windows_dir);
    const EvalResult r = evaluate(model, samples);

    const std::string out = prepare_output(rc);
    MetricsReport report;
    report.folds.push_back({r.accuracy, r.macro_f1, r.confusion});
    report.mean_accuracy = r.accuracy;
    report.mean_f1 = r.macro_f1;
    write_file_atomic((fs::path(out) / "metrics.json").string(), report.to_json());
    write_file_atomic((fs::path(out) / "attention.csv").string(),
                      attention_csv(mean_attention(model, samples)));
    std::cout << "accuracy=" << r.accuracy << " macro_f1=" << r.macro_f1 << " (windows="
              << samples.size() << ")\nwrote metrics.json, attention.csv to " << out << "\n";
    return 0;
}

int cmd_compare(const RunConfig& rc) {
    if (rc.dataset_dir.empty()) throw ConfigError("compare needs a dataset directory");
    if (rc.regions_path.empty()) throw ConfigError("compare needs a region map");
    if (rc.topk == 0) throw ConfigError("compare needs --topk >= 1");

    const DatasetManifest manifest =
        DatasetManifest::load((fs::path(rc.dataset_dir) / "manifest.json").string());
    const RegionMap map = RegionMap::load(rc.regions_path);
    const std::vector<LoadedTrial> trials = load_dataset(manifest, rc.dataset_dir);
    const ModelConfig model_cfg = rc.model_for(map);
    const TrainConfig tc = rc.train_config();
    const std::string out = prepare_output(rc);

    // same windows, same labels, same fold split; only the edges differ
    const std::vector<FeatureGraphSample> flow_samples =
        build_samples(trials, map, rc, EdgeMethod::liang);
    const std::vector<FeatureGraphSample> granger_samples =
        build_samples(trials, map, rc, EdgeMethod::granger);

    MetricsReport flow_report = nested_cv(flow_samples, model_cfg, tc);
    MetricsReport granger_report = nested_cv(granger_samples, model_cfg, tc);

    std::vector<double> flow_acc, granger_acc;
    for (const FoldMetrics& f : flow_report.folds) flow_acc.push_back(f.accuracy);
    for (const FoldMetrics& f : granger_report.folds) granger_acc.push_back(f.accuracy);
    double p = std::numeric_limits<double>::quiet_NaN();
    std::string note;
    try {
        p = wilcoxon_signed_rank(flow_acc, granger_acc);
    } catch (const Error& e) {
        note = e.what(); // too few informative pairs / all ties
    }
    flow_report.comparison_p = p;
    granger_report.comparison_p = p;

    nlohmann::ordered_json j;
    j["kind"] = "lfgnn-comparison";
    j["conditions"] = {{"flow", nlohmann::ordered_json::parse(flow_report.to_json())},
                       {"granger", nlohmann::ordered_json::parse(granger_report.to_json())}};
    j["paired_folds"] = flow_report.folds.size();
    if (std::isnan(p)) j["wilcoxon_p"] = nullptr;
    else j["wilcoxon_p"] = p;
    if (!note.empty()) j["note"] = note;
    write_file_atomic((fs::path(out) / "comparison.json").string(), j.dump(2) + "\n");

    std::cout << "flow:    accuracy=" << flow_report.mean_accuracy << " +/- "
              << flow_report.std_accuracy << "\n"
              << "granger: accuracy=" << granger_report.mean_accuracy << " +/- "
              << granger_report.std_accuracy << "\n";
    if (std::isnan(p)) std::cout << "wilcoxon: not defined (" << note << ")\n";
    else std::cout << "wilcoxon p=" << p << "\n";
    std::cout << "wrote comparison.json to " << out << "\n";
    return 0;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidOrder& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BandError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedRatio& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SingularMatrix& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const SingularCovariance& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const RankError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const StabilityError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const SurrogateFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-flow causal graphs and the dual-branch emotion classifier"};
    app.require_subcommand(1);

    Flags f;

    CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
    FlagOpts generate_opts = add_common_flags(generate, f);
    std::string gen_kind = "emotion";
    std::size_t gen_channels = 16, gen_trials = 10, gen_dim = 3, gen_length = 10000;
    double gen_seconds = 60.0, gen_separation = 1.0, gen_coupling = 0.35, gen_strength = 0.4;
    generate->add_option("--kind", gen_kind, "emotion or var");
    generate->add_option("--channels", gen_channels, "channel count (emotion)");
    generate->add_option("--trials", gen_trials, "trial count (emotion)");
    generate->add_option("--seconds", gen_seconds, "trial length in seconds (emotion)");
    generate->add_option("--separation", gen_separation, "class separation scale (emotion)");
    generate->add_option("--coupling", gen_coupling, "planted coupling strength (emotion)");
    generate->add_option("--dim", gen_dim, "channel count (var)");
    generate->add_option("--length", gen_length, "sample count (var)");
    generate->add_option("--strength", gen_strength, "chain coupling weight (var)");

    CLI::App* causal = app.add_subcommand("causal", "causal graph of one recording");
    FlagOpts causal_opts = add_common_flags(causal, f);
    std::string causal_input;
    double causal_rate = 0.0;
    causal->add_option("--input", causal_input, "trial file (binary or CSV)")->required();
    causal->add_option("--rate", causal_rate, "sampling rate for CSV inputs");

    CLI::App* preprocess = app.add_subcommand("preprocess", "dataset to model-ready windows");
    FlagOpts preprocess_opts = add_common_flags(preprocess, f);
    std::string method = "liang";
    preprocess->add_option("--method", method, "edge estimator: liang or granger");

    CLI::App* train = app.add_subcommand("train", "nested cross-validation on windows");
    FlagOpts train_opts = add_common_flags(train, f);
    std::string train_windows;
    double holdout = 0.0;
    bool report_params = false;
    train->add_option("--windows", train_windows, "preprocessed windows directory");
    train->add_option("--holdout", holdout, "single split with this test fraction");
    train->add_flag("--report-params", report_params, "print parameter count and exit");

    CLI::App* eval = app.add_subcommand("eval", "evaluate saved weights on windows");
    FlagOpts eval_opts = add_common_flags(eval, f);
    std::string eval_windows, eval_weights;
    eval->add_option("--windows", eval_windows, "preprocessed windows directory");
    eval->add_option("--weights", eval_weights, "weights file");
    eval->add_flag("--report-params", report_params, "print parameter count and exit");

    CLI::App* compare = app.add_subcommand("compare", "flow vs Granger graphs, paired folds");
    FlagOpts compare_opts = add_common_flags(compare, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    if (*generate)
        return run_guarded([&] {
            return cmd_generate(gen_kind, resolve_config(f, generate_opts), gen_channels,
                                gen_trials, gen_seconds, gen_separation, gen_coupling, gen_dim,
                                gen_strength, gen_length);
        });
    if (*causal)
        return run_guarded(
            [&] { return cmd_causal(resolve_config(f, causal_opts), causal_input, causal_rate); });
    if (*preprocess)
        return run_guarded(
            [&] { return cmd_preprocess(resolve_config(f, preprocess_opts), method); });
    if (*train)
        return run_guarded([&] {
            return cmd_train(resolve_config(f, train_opts), train_windows, holdout, report_params);
        });
    if (*eval)
        return run_guarded([&] {
            return cmd_eval(resolve_config(f, eval_opts), eval_windows, eval_weights,
                            report_params);
        });
    if (*compare)
        return run_guarded([&] { return cmd_compare(resolve_config(f, compare_opts)); });
    return 2;
}
