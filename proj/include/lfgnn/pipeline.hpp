#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfgnn/config.hpp"
#include "lfgnn/data.hpp"
#include "lfgnn/graphs.hpp"
#include "lfgnn/model.hpp"

namespace lfgnn {

// Which estimator supplies the directed edges of both graphs.
enum class EdgeMethod { liang, granger };

struct PreprocessStats {
    std::size_t windows = 0;
    double global_edge_density = 0.0; // mean nonzero fraction, off-diagonal
    double local_edge_density = 0.0;
    std::vector<std::string> warnings;
};

// Trials to model-ready windows: resample to rc.target_rate, cut
// rc.window_seconds windows, reorder channels canonically, then per window
// extract band entropies and build the global and region-local adjacencies.
// Per-window significance seeds derive from (rc.seed, trial, window), so the
// result is independent of rc.jobs and of trial order in `trials`.
// rc.topk > 0 keeps only the k strongest sources per target.
std::vector<FeatureGraphSample> build_samples(const std::vector<LoadedTrial>& trials,
                                              const RegionMap& map, const RunConfig& rc,
                                              EdgeMethod method,
                                              PreprocessStats* stats = nullptr);

// One window per JSON file plus an index; values round-trip exactly.
void save_sample(const FeatureGraphSample& sample, const std::string& path);
FeatureGraphSample load_sample(const std::string& path);
void save_sample_set(const std::vector<FeatureGraphSample>& set, const std::string& dir);
std::vector<FeatureGraphSample> load_sample_set(const std::string& dir);

} // namespace lfgnn
