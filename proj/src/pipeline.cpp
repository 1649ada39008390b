#include "lfgnn/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lfgnn/causality.hpp"
#include "lfgnn/errors.hpp"
#include "lfgnn/io.hpp"
#include "lfgnn/parallel.hpp"
#include "lfgnn/rng.hpp"
#include "lfgnn/signal.hpp"

namespace lfgnn {
namespace {

constexpr std::uint64_t kWindowStream = 8; // per-window surrogate seeds

struct WindowJob {
    TimeSeriesSet window; // canonical channel order
    std::uint64_t trial_id = 0;
    std::size_t window_idx = 0;
    int label = 0;
};

Matrix granger_adjacency(const TimeSeriesSet& x, std::size_t order, double alpha) {
    const GrangerResult g = granger_causality(x, order);
    Matrix a(x.channel_count(), x.channel_count());
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j)
            if (i != j && g.p_values(i, j) < alpha) a(i, j) = g.f_stat(i, j);
    return a;
}

// Region-blocked mirror of the flow-based local graph: each region is tested
// in isolation, everything across regions stays zero.
Matrix granger_local_adjacency(const TimeSeriesSet& canonical, const RegionMap& map,
                               std::size_t order, double alpha,
                               std::vector<std::string>* warnings) {
    const std::size_t n = canonical.channel_count();
    Matrix a(n, n);
    for (const auto& [begin, end] : map.extents()) {
        if (end - begin < 2) {
            if (warnings)
                warnings->push_back("region of channel " + canonical.labels[begin] +
                                    " has a single channel; its block stays empty");
            continue;
        }
        std::vector<std::size_t> idx(end - begin);
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = begin + k;
        const Matrix block = granger_adjacency(canonical.select(idx), order, alpha);
        for (std::size_t i = 0; i < block.rows; ++i)
            for (std::size_t j = 0; j < block.cols; ++j) a(begin + i, begin + j) = block(i, j);
    }
    return a;
}

double off_diagonal_density(const Matrix& a, std::size_t denom) {
    if (denom == 0) return 0.0;
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j)
            if (i != j && a(i, j) != 0.0) ++nnz;
    return static_cast<double>(nnz) / static_cast<double>(denom);
}

nlohmann::ordered_json matrix_json(const Matrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix json_matrix(const nlohmann::json& rows, const std::string& what) {
    if (!rows.is_array() || rows.empty()) throw FormatError(what + " must be a matrix");
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (rows[i].size() != m.cols) throw FormatError(what + " rows differ in length");
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j].get<double>();
    }
    return m;
}

} // namespace

std::vector<FeatureGraphSample> build_samples(const std::vector<LoadedTrial>& trials,
                                              const RegionMap& map, const RunConfig& rc,
                                              EdgeMethod method, PreprocessStats* stats) {
    if (!(rc.alpha < 1.0))
        throw ConfigError("window graphs need alpha < 1; alpha = 1 is only meaningful for "
                          "single-recording graphs");
    std::vector<WindowJob> jobs;
    for (const LoadedTrial& trial : trials) {
        const TimeSeriesSet resampled = resample(trial.series, rc.target_rate);
        const std::vector<std::size_t> order = map.order_for(resampled);
        const WindowedRecording windows = segment_windows(resampled, rc.window_seconds);
        const int label = rc.label == "valence" ? trial.valence : trial.arousal;
        for (std::size_t w = 0; w < windows.windows.size(); ++w)
            jobs.push_back({windows.windows[w].select(order), trial.trial_id, w, label});
    }

    const std::size_t n = map.channel_count();
    std::size_t local_pairs = 0;
    for (const auto& [begin, end] : map.extents()) local_pairs += (end - begin) * (end - begin - 1);

    std::vector<FeatureGraphSample> samples(jobs.size());
    std::vector<std::vector<std::string>> notes(jobs.size());
    parallel_for(jobs.size(), rc.jobs, [&](std::size_t i) {
        const WindowJob& job = jobs[i];
        FeatureGraphSample s;
        s.label = job.label;
        s.trial = job.trial_id;
        s.channel_labels = job.window.labels;
        s.features = extract_node_features(job.window, rc.bands).features;

        if (method == EdgeMethod::liang) {
            SignificanceConfig sig = rc.significance();
            sig.seed = Rng(rc.seed).split(kWindowStream, job.trial_id, job.window_idx).next_u64();
            sig.jobs = 1; // parallelism lives at the window level here
            FlowDecomposition f = normalize_flow(estimate_information_flow(job.window));
            f = significance_test(job.window, std::move(f), sig);
            s.global_adj = build_global_adjacency(f, rc.alpha, job.window.labels).adjacency;
            const CausalGraph local = build_local_adjacency(job.window, map, sig);
            s.local_adj = local.adjacency;
            notes[i] = local.warnings;
        } else {
            s.global_adj = granger_adjacency(job.window, rc.granger_order, rc.alpha);
            s.local_adj =
                granger_local_adjacency(job.window, map, rc.granger_order, rc.alpha, &notes[i]);
        }
        if (rc.topk > 0) {
            s.global_adj = topk_sparsify(s.global_adj, rc.topk);
            s.local_adj = topk_sparsify(s.local_adj, rc.topk);
        }
        samples[i] = std::move(s);
    });

    if (stats) {
        stats->windows = samples.size();
        stats->global_edge_density = 0.0;
        stats->local_edge_density = 0.0;
        std::set<std::string> seen;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            stats->global_edge_density += off_diagonal_density(samples[i].global_adj, n * (n - 1));
            stats->local_edge_density += off_diagonal_density(samples[i].local_adj, local_pairs);
            for (const std::string& w : notes[i])
                if (seen.insert(w).second) stats->warnings.push_back(w);
        }
        if (!samples.empty()) {
            stats->global_edge_density /= static_cast<double>(samples.size());
            stats->local_edge_density /= static_cast<double>(samples.size());
        }
    }
    return samples;
}

void save_sample(const FeatureGraphSample& sample, const std::string& path) {
    nlohmann::ordered_json j;
    j["kind"] = "lfgnn-sample";
    j["label"] = sample.label;
    j["trial"] = sample.trial;
    j["channels"] = sample.channel_labels;
    j["features"] = matrix_json(sample.features);
    j["global_adj"] = matrix_json(sample.global_adj);
    j["local_adj"] = matrix_json(sample.local_adj);
    write_file_atomic(path, j.dump() + "\n");
}

FeatureGraphSample load_sample(const std::string& path) {
    try {
        const nlohmann::json j = nlohmann::json::parse(read_file(path));
        if (j.at("kind") != "lfgnn-sample") throw FormatError("not a window sample: " + path);
        FeatureGraphSample s;
        s.label = j.at("label").get<int>();
        s.trial = j.at("trial").get<std::uint64_t>();
        s.channel_labels = j.at("channels").get<std::vector<std::string>>();
        s.features = json_matrix(j.at("features"), "features");
        s.global_adj = json_matrix(j.at("global_adj"), "global_adj");
        s.local_adj = json_matrix(j.at("local_adj"), "local_adj");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad window sample " + path + ": " + e.what());
    }
}

void save_sample_set(const std::vector<FeatureGraphSample>& set, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json index;
    index["kind"] = "lfgnn-samples";
    index["count"] = set.size();
    index["files"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < set.size(); ++i) {
        std::ostringstream name;
        name << "window_" << std::setw(5) << std::setfill('0') << i << ".json";
        save_sample(set[i], (std::filesystem::path(dir) / name.str()).string());
        index["files"].push_back(name.str());
    }
    write_file_atomic((std::filesystem::path(dir) / "index.json").string(), index.dump(2) + "\n");
}

std::vector<FeatureGraphSample> load_sample_set(const std::string& dir) {
    std::vector<std::string> files;
    try {
        const nlohmann::json index =
            nlohmann::json::parse(read_file((std::filesystem::path(dir) / "index.json").string()));
        if (index.at("kind") != "lfgnn-samples") throw FormatError("not a sample set: " + dir);
        files = index.at("files").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sample index in " + dir + ": " + e.what());
    }
    std::vector<FeatureGraphSample> set;
    set.reserve(files.size());
    for (const std::string& f : files)
        set.push_back(load_sample((std::filesystem::path(dir) / f).string()));
    return set;
}

} // namespace lfgnn
