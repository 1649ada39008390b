#include "lfgnn/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lfgnn/errors.hpp"

namespace lfgnn {
namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = kPi * x;
    return std::sin(px) / px;
}

void check_taps(std::size_t taps) {
    if (taps < 3 || taps % 2 == 0) throw ShapeError("FIR tap count must be odd and at least 3");
}

// Hamming-windowed sinc low-pass, normalized to unit DC gain.
std::vector<double> raw_lowpass(double cutoff_hz, double rate, std::size_t taps) {
    const double fc = cutoff_hz / rate; // cycles per sample
    const auto m = static_cast<double>(taps - 1);
    std::vector<double> h(taps);
    double sum = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
        const double t = static_cast<double>(k) - m / 2.0;
        const double w = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(k) / m);
        h[k] = 2.0 * fc * sinc(2.0 * fc * t) * w;
        sum += h[k];
    }
    for (double& v : h) v /= sum;
    return h;
}

double gain_at(const std::vector<double>& h, double freq_hz, double rate) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double phase = 2.0 * kPi * freq_hz * static_cast<double>(k) / rate;
        re += h[k] * std::cos(phase);
        im -= h[k] * std::sin(phase);
    }
    return std::sqrt(re * re + im * im);
}

} // namespace

std::vector<BandSpec> default_bands() {
    return {{"delta", 1.0, 4.0},
            {"theta", 4.0, 8.0},
            {"alpha", 8.0, 13.0},
            {"beta", 13.0, 30.0},
            {"gamma", 30.0, 50.0}};
}

std::vector<double> design_lowpass(double cutoff_hz, double rate, std::size_t taps) {
    check_taps(taps);
    if (cutoff_hz <= 0.0 || cutoff_hz >= rate / 2.0)
        throw BandError("low-pass cutoff must lie inside (0, Nyquist)");
    return raw_lowpass(cutoff_hz, rate, taps);
}

std::vector<double> design_bandpass(double low_hz, double high_hz, double rate, std::size_t taps) {
    check_taps(taps);
    if (!(0.0 < low_hz && low_hz < high_hz))
        throw BandError("band edges must satisfy 0 < low < high");
    if (high_hz >= rate / 2.0) throw BandError("band edge at or above Nyquist");

    const std::vector<double> hi = raw_lowpass(high_hz, rate, taps);
    const std::vector<double> lo = raw_lowpass(low_hz, rate, taps);
    std::vector<double> h(taps);
    for (std::size_t k = 0; k < taps; ++k) h[k] = hi[k] - lo[k];

    // Unit gain at the geometric band center so narrow bands are not dimmed
    // by overlapping transition skirts.
    const double center = std::sqrt(low_hz * high_hz);
    const double g = gain_at(h, center, rate);
    if (g > 1e-12)
        for (double& v : h) v /= g;
    return h;
}

std::vector<double> filtfilt(const std::vector<double>& kernel, const std::vector<double>& x) {
    if (kernel.empty()) throw ShapeError("empty FIR kernel");
    const std::size_t n = x.size();
    const std::size_t kk = kernel.size();

    auto forward = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (std::size_t t = 0; t < n; ++t) {
            double acc = 0.0;
            const std::size_t kmax = std::min(kk, t + 1);
            for (std::size_t k = 0; k < kmax; ++k) acc += kernel[k] * in[t - k];
            out[t] = acc;
        }
    };

    std::vector<double> a(n), b(n);
    forward(x, a);
    std::reverse(a.begin(), a.end());
    forward(a, b);
    std::reverse(b.begin(), b.end());
    return b;
}

TimeSeriesSet resample(const TimeSeriesSet& x, double target_hz, std::size_t taps) {
    x.validate();
    if (target_hz <= 0.0) throw ShapeError("target rate must be positive");
    if (target_hz > x.rate) throw UnsupportedRatio("target rate exceeds source rate");
    if (target_hz == x.rate) return x;

    const double ratio = x.rate / target_hz;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * ratio)
        throw UnsupportedRatio("source rate is not an integer multiple of the target rate");
    const auto step = static_cast<std::size_t>(rounded);

    const std::vector<double> kernel = design_lowpass(0.45 * target_hz, x.rate, taps);

    TimeSeriesSet out;
    out.labels = x.labels;
    out.rate = target_hz;
    out.channels.resize(x.channel_count());
    for (std::size_t c = 0; c < x.channel_count(); ++c) {
        const std::vector<double> filtered = filtfilt(kernel, x.channels[c]);
        auto& dst = out.channels[c];
        dst.reserve((filtered.size() + step - 1) / step);
        for (std::size_t t = 0; t < filtered.size(); t += step) dst.push_back(filtered[t]);
    }
    return out;
}

WindowedRecording segment_windows(const TimeSeriesSet& x, double seconds, double overlap_seconds) {
    x.validate();
    if (seconds <= 0.0) throw ShapeError("window length must be positive");
    if (overlap_seconds < 0.0 || overlap_seconds >= seconds)
        throw ShapeError("overlap must lie in [0, window)");

    const auto len = static_cast<std::size_t>(std::llround(seconds * x.rate));
    const auto overlap = static_cast<std::size_t>(std::llround(overlap_seconds * x.rate));
    if (len == 0) throw ShapeError("window shorter than one sample");
    const std::size_t stride = len - overlap;
    const std::size_t total = x.sample_count();
    if (total < len) throw InsufficientData("recording shorter than one window");

    WindowedRecording rec;
    rec.window_seconds = seconds;
    for (std::size_t start = 0; start + len <= total; start += stride) {
        TimeSeriesSet w;
        w.labels = x.labels;
        w.rate = x.rate;
        w.channels.resize(x.channel_count());
        for (std::size_t c = 0; c < x.channel_count(); ++c)
            w.channels[c].assign(x.channels[c].begin() + static_cast<std::ptrdiff_t>(start),
                                 x.channels[c].begin() + static_cast<std::ptrdiff_t>(start + len));
        rec.windows.push_back(std::move(w));
    }
    return rec;
}

std::vector<TimeSeriesSet> bandpass_decompose(const TimeSeriesSet& window,
                                              const std::vector<BandSpec>& bands,
                                              std::size_t taps) {
    window.validate();
    if (bands.empty()) throw BandError("no bands given");

    std::vector<TimeSeriesSet> out;
    out.reserve(bands.size());
    for (const BandSpec& band : bands) {
        const std::vector<double> kernel =
            design_bandpass(band.low_hz, band.high_hz, window.rate, taps);
        TimeSeriesSet filtered;
        filtered.labels = window.labels;
        filtered.rate = window.rate;
        filtered.channels.resize(window.channel_count());
        for (std::size_t c = 0; c < window.channel_count(); ++c)
            filtered.channels[c] = filtfilt(kernel, window.channels[c]);
        out.push_back(std::move(filtered));
    }
    return out;
}

DeValue differential_entropy(const std::vector<double>& x, double floor) {
    if (x.size() < 2) throw InsufficientData("differential entropy needs at least two samples");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(x.size() - 1);

    DeValue de;
    if (var <= 0.0) {
        de.value = floor;
        de.floored = true;
        return de;
    }
    de.value = 0.5 * std::log(2.0 * kPi * std::numbers::e * var);
    return de;
}

NodeFeatures extract_node_features(const TimeSeriesSet& window, const std::vector<BandSpec>& bands,
                                   double floor, std::size_t taps) {
    const std::vector<TimeSeriesSet> per_band = bandpass_decompose(window, bands, taps);
    NodeFeatures nf;
    nf.features = Matrix(window.channel_count(), bands.size());
    for (std::size_t b = 0; b < per_band.size(); ++b) {
        for (std::size_t c = 0; c < window.channel_count(); ++c) {
            const DeValue de = differential_entropy(per_band[b].channels[c], floor);
            nf.features(c, b) = de.value;
            if (de.floored) ++nf.floored_count;
        }
    }
    return nf;
}

} // namespace lfgnn
