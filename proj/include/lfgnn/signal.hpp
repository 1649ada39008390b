#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lfgnn/numerics.hpp"

namespace lfgnn {

struct BandSpec {
    std::string name;
    double low_hz = 0.0;
    double high_hz = 0.0;
};

// delta 1-4, theta 4-8, alpha 8-13, beta 13-30, gamma 30-50 Hz. Feature
// columns keep this order everywhere.
std::vector<BandSpec> default_bands();

struct WindowedRecording {
    std::vector<TimeSeriesSet> windows;
    double window_seconds = 0.0;
    std::string trial_id;
    int label = -1; // binary class, -1 when unset
};

inline constexpr std::size_t kDefaultFirTaps = 129;

// Windowed-sinc FIR kernels (Hamming window, odd tap count, unit DC or
// mid-band gain). Band-pass is the difference of two low-pass kernels.
std::vector<double> design_lowpass(double cutoff_hz, double rate, std::size_t taps = kDefaultFirTaps);
std::vector<double> design_bandpass(double low_hz, double high_hz, double rate,
                                    std::size_t taps = kDefaultFirTaps);

// Forward-backward application of a causal FIR filter: zero phase, squared
// magnitude response. The signal is zero-padded conceptually; output length
// equals input length, so the first/last ~taps samples carry the startup
// transient.
std::vector<double> filtfilt(const std::vector<double>& kernel, const std::vector<double>& x);

// Anti-alias low-pass at 0.45 * target_hz, then integer decimation.
// target == rate bypasses the filter entirely.
TimeSeriesSet resample(const TimeSeriesSet& x, double target_hz,
                       std::size_t taps = kDefaultFirTaps);

// Non-overlapping by default; the incomplete tail is dropped.
WindowedRecording segment_windows(const TimeSeriesSet& x, double seconds,
                                  double overlap_seconds = 0.0);

// One filtered copy of the window per band, same channel layout.
std::vector<TimeSeriesSet> bandpass_decompose(const TimeSeriesSet& window,
                                              const std::vector<BandSpec>& bands,
                                              std::size_t taps = kDefaultFirTaps);

inline constexpr double kDefaultDeFloor = -20.0;

struct DeValue {
    double value = 0.0;
    bool floored = false; // zero-variance channel clamped to the floor
};

// Gaussian closed form 0.5 * ln(2*pi*e * var), unbiased sample variance.
DeValue differential_entropy(const std::vector<double>& x, double floor = kDefaultDeFloor);

struct NodeFeatures {
    Matrix features; // channels x bands, nats
    std::size_t floored_count = 0;
};

NodeFeatures extract_node_features(const TimeSeriesSet& window, const std::vector<BandSpec>& bands,
                                   double floor = kDefaultDeFloor,
                                   std::size_t taps = kDefaultFirTaps);

} // namespace lfgnn
