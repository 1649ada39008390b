#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lfgnn/graphs.hpp"
#include "lfgnn/numerics.hpp"

namespace lfgnn {

struct VarSystemSpec {
    std::size_t dim = 2;
    Matrix coupling; // coupling(i, j) feeds channel j into channel i at lag 1
    double noise_scale = 1.0;
    std::size_t length = 10000; // samples kept after burn-in
    double rate = 1.0;
    std::uint64_t seed = 0;
};

struct VarData {
    TimeSeriesSet series;
    std::vector<std::pair<std::size_t, std::size_t>> true_edges; // (src, dst)
};

// Spectral radius estimate by repeated squaring with max-abs rescaling; the
// rescaling keeps defective-matrix polynomial growth from inflating the
// estimate the way a fixed-power norm bound would.
double spectral_radius_bound(const Matrix& a);

// x_{t+1} = A x_t + noise, first 1000 samples discarded. StabilityError when
// the spectral radius estimate reaches 1.
VarData generate_var(const VarSystemSpec& spec);

struct TrialInfo {
    std::string file;
    double duration = 0.0;
    int arousal = 0;
    int valence = 0;
};

struct DatasetManifest {
    std::string subject;
    std::vector<std::string> channels;
    double rate = 200.0;
    std::vector<TrialInfo> trials;

    static DatasetManifest load(const std::string& path);
    void save(const std::string& path) const;
    // Labels binary, channel labels unique, trial files present under dir.
    void validate(const std::string& dir) const;
};

// Trial files: 12-byte magic + u32 version, u64 header length, JSON header
// (channels, rate, samples), then channel-major little-endian doubles. A file
// without the magic is parsed as CSV (header row of channel labels, one row
// per sample) with the rate taken from the manifest.
void save_trial(const std::string& path, const TimeSeriesSet& ts);
void save_trial_csv(const std::string& path, const TimeSeriesSet& ts);
TimeSeriesSet load_trial(const std::string& path, const DatasetManifest& manifest);
// Manifest-free load for standalone files. Binary files are self-describing;
// CSV needs csv_rate > 0 (DataError otherwise).
TimeSeriesSet load_series(const std::string& path, double csv_rate = 0.0);

struct LoadedTrial {
    TimeSeriesSet series;
    int arousal = 0;
    int valence = 0;
    std::uint64_t trial_id = 0;
};
std::vector<LoadedTrial> load_dataset(const DatasetManifest& manifest, const std::string& dir);

// Two-class synthetic recordings. Every channel mixes per-band oscillators
// (frequency jittered per channel so channels are not phase-locked) with
// AR(1) noise; adjacent channels within a region couple at lag 1 in both
// classes. Class 1 additionally couples each frontal channel into its
// temporal partner and shifts band powers (frontal beta/gamma up, temporal
// alpha down); `separation` scales both effects, 0 makes the classes
// statistically identical. Labels alternate by trial parity and are written
// to both the arousal and valence fields.
struct EmotionSynthConfig {
    std::string subject = "synthetic01";
    std::size_t channels = 16; // split evenly into 4 regions, >= 4
    std::size_t trials = 10;
    double trial_seconds = 60.0;
    double rate = 200.0;
    double separation = 1.0;
    double coupling = 0.35;
    std::uint64_t seed = 0;

    void validate() const; // ConfigError
};

struct EmotionSynthResult {
    DatasetManifest manifest;
    std::string manifest_path;
    std::string region_path;
    RegionMap regions;
    // Planted class-1 edges as (src label, dst label), one per frontal
    // channel with a temporal partner.
    std::vector<std::pair<std::string, std::string>> planted_edges;
};
EmotionSynthResult generate_emotion_synthetic(const EmotionSynthConfig& cfg,
                                              const std::string& dir);

} // namespace lfgnn
