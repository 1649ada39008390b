#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lfgnn/errors.hpp"
#include "lfgnn/rng.hpp"
#include "lfgnn/signal.hpp"

using namespace lfgnn;

namespace {

TimeSeriesSet sinusoid(double freq_hz, double rate, double seconds, double amplitude = 1.0) {
    TimeSeriesSet ts;
    ts.rate = rate;
    const auto n = static_cast<std::size_t>(seconds * rate);
    ts.channels.resize(1);
    ts.channels[0].resize(n);
    for (std::size_t t = 0; t < n; ++t)
        ts.channels[0][t] =
            amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(t) / rate);
    return ts;
}

// Steady-state energy: edges carry the filter startup transient, so skip them.
double central_energy(const std::vector<double>& x, std::size_t margin) {
    double e = 0.0;
    for (std::size_t t = margin; t + margin < x.size(); ++t) e += x[t] * x[t];
    return e;
}

} // namespace

TEST_CASE("default bands are the five canonical ranges in order") {
    const auto bands = default_bands();
    REQUIRE(bands.size() == 5);
    CHECK(bands[0].name == "delta");
    CHECK(bands[0].low_hz == 1.0);
    CHECK(bands[4].name == "gamma");
    CHECK(bands[4].high_hz == 50.0);
    for (std::size_t i = 1; i < bands.size(); ++i) CHECK(bands[i].low_hz == bands[i - 1].high_hz);
}

TEST_CASE("resample 60 s at 1000 Hz to 200 Hz gives 12000 samples") {
    TimeSeriesSet ts = sinusoid(5.0, 1000.0, 60.0);
    const TimeSeriesSet out = resample(ts, 200.0);
    CHECK(out.rate == 200.0);
    REQUIRE(out.channel_count() == 1);
    CHECK(out.channels[0].size() == 12000);
}

TEST_CASE("resample to the source rate is the identity") {
    TimeSeriesSet ts = sinusoid(5.0, 1000.0, 1.0);
    const TimeSeriesSet out = resample(ts, 1000.0);
    CHECK(out.channels[0] == ts.channels[0]);
}

TEST_CASE("resample rejects non-integer ratios and upsampling") {
    TimeSeriesSet ts = sinusoid(5.0, 1000.0, 1.0);
    CHECK_THROWS_AS(resample(ts, 300.0), UnsupportedRatio);
    CHECK_THROWS_AS(resample(ts, 2000.0), UnsupportedRatio);
}

TEST_CASE("a 5 Hz sinusoid survives 1000 to 200 Hz within 1 percent amplitude") {
    TimeSeriesSet ts = sinusoid(5.0, 1000.0, 60.0);
    const TimeSeriesSet out = resample(ts, 200.0);
    // RMS of a unit sinusoid is 1/sqrt(2); use the central span to avoid edges.
    const auto& x = out.channels[0];
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 100; t + 100 < x.size(); ++t) {
        ss += x[t] * x[t];
        ++n;
    }
    const double amplitude = std::sqrt(2.0 * ss / static_cast<double>(n));
    CHECK(amplitude == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("segment_windows produces the arithmetically forced window count") {
    TimeSeriesSet ts = sinusoid(5.0, 200.0, 60.0);
    const WindowedRecording rec = segment_windows(ts, 4.0);
    CHECK(rec.windows.size() == 15);
    for (const auto& w : rec.windows) CHECK(w.sample_count() == 800);
}

TEST_CASE("segment_windows drops the incomplete tail") {
    TimeSeriesSet ts = sinusoid(5.0, 200.0, 4.5);
    const WindowedRecording rec = segment_windows(ts, 4.0);
    CHECK(rec.windows.size() == 1);
}

TEST_CASE("segment_windows rejects a recording shorter than one window") {
    TimeSeriesSet ts = sinusoid(5.0, 200.0, 3.0);
    CHECK_THROWS_AS(segment_windows(ts, 4.0), InsufficientData);
}

TEST_CASE("concatenating windows reproduces the kept prefix exactly") {
    Rng rng(3);
    TimeSeriesSet ts;
    ts.rate = 200.0;
    ts.channels.resize(2);
    for (auto& ch : ts.channels) {
        ch.resize(2100);
        for (double& v : ch) v = rng.next_gaussian();
    }
    const WindowedRecording rec = segment_windows(ts, 4.0);
    REQUIRE(rec.windows.size() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
        std::size_t pos = 0;
        for (const auto& w : rec.windows)
            for (double v : w.channels[c]) CHECK(v == ts.channels[c][pos++]);
        CHECK(pos == 1600);
    }
}

TEST_CASE("overlapping windows advance by the stride") {
    TimeSeriesSet ts = sinusoid(5.0, 200.0, 10.0);
    const WindowedRecording rec = segment_windows(ts, 4.0, 2.0);
    // Starts at 0, 400, 800 samples: 4 windows fit in 2000 samples.
    CHECK(rec.windows.size() == 4);
}

TEST_CASE("a 10 Hz sinusoid lands in the alpha band at least 20 dB above the rest") {
    TimeSeriesSet ts = sinusoid(10.0, 200.0, 12.0);
    const auto bands = default_bands();
    const auto decomposed = bandpass_decompose(ts, bands);
    REQUIRE(decomposed.size() == 5);

    const std::size_t margin = 200;
    std::vector<double> energy(5);
    for (std::size_t b = 0; b < 5; ++b) energy[b] = central_energy(decomposed[b].channels[0], margin);

    const double alpha = energy[2];
    for (std::size_t b = 0; b < 5; ++b) {
        if (b == 2) continue;
        INFO("band ", bands[b].name);
        CHECK(alpha >= 100.0 * energy[b]); // 20 dB in power
    }
}

TEST_CASE("zero signal decomposes to zero in every band") {
    TimeSeriesSet ts;
    ts.rate = 200.0;
    ts.channels = {std::vector<double>(800, 0.0)};
    for (const auto& band : bandpass_decompose(ts, default_bands()))
        for (double v : band.channels[0]) CHECK(v == 0.0);
}

TEST_CASE("white noise has energy in all five bands") {
    Rng rng(8);
    TimeSeriesSet ts;
    ts.rate = 200.0;
    ts.channels.resize(1);
    ts.channels[0].resize(2000);
    for (double& v : ts.channels[0]) v = rng.next_gaussian();
    for (const auto& band : bandpass_decompose(ts, default_bands()))
        CHECK(central_energy(band.channels[0], 150) > 1.0);
}

TEST_CASE("band edges above Nyquist are rejected") {
    TimeSeriesSet ts = sinusoid(10.0, 80.0, 4.0);
    CHECK_THROWS_AS(bandpass_decompose(ts, default_bands()), BandError);
    CHECK_THROWS_AS(design_bandpass(30.0, 20.0, 200.0), BandError);
    CHECK_THROWS_AS(design_lowpass(120.0, 200.0), BandError);
}

TEST_CASE("bandpass_decompose is linear") {
    Rng rng(21);
    TimeSeriesSet x, y, combo;
    x.rate = y.rate = combo.rate = 200.0;
    x.channels.resize(1, std::vector<double>(1000));
    y.channels.resize(1, std::vector<double>(1000));
    combo.channels.resize(1, std::vector<double>(1000));
    const double a = 2.5, b = -1.25;
    for (std::size_t t = 0; t < 1000; ++t) {
        x.channels[0][t] = rng.next_gaussian();
        y.channels[0][t] = rng.next_gaussian();
        combo.channels[0][t] = a * x.channels[0][t] + b * y.channels[0][t];
    }
    const auto bands = default_bands();
    const auto dx = bandpass_decompose(x, bands);
    const auto dy = bandpass_decompose(y, bands);
    const auto dc = bandpass_decompose(combo, bands);
    for (std::size_t bi = 0; bi < bands.size(); ++bi)
        for (std::size_t t = 0; t < 1000; ++t)
            CHECK(dc[bi].channels[0][t] ==
                  doctest::Approx(a * dx[bi].channels[0][t] + b * dy[bi].channels[0][t])
                      .epsilon(1e-9));
}

TEST_CASE("differential entropy closed-form values") {
    Rng rng(31);
    // sigma^2 = 1 -> 0.5 ln(2 pi e) ~ 1.41894.
    std::vector<double> unit(20000);
    for (double& v : unit) v = rng.next_gaussian();
    const double de1 = differential_entropy(unit).value;
    CHECK(de1 == doctest::Approx(1.4189385332046727).epsilon(0.01));

    // Scaling by 2 adds ln 2 exactly (variance ratio is exact).
    std::vector<double> doubled(unit);
    for (double& v : doubled) v *= 2.0;
    const double de2 = differential_entropy(doubled).value;
    CHECK(de2 - de1 == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("differential entropy is shift-invariant") {
    Rng rng(32);
    std::vector<double> x(500);
    for (double& v : x) v = rng.next_gaussian();
    std::vector<double> shifted(x);
    for (double& v : shifted) v += 123.456;
    CHECK(std::abs(differential_entropy(x).value - differential_entropy(shifted).value) < 1e-9);
}

TEST_CASE("constant signal floors the DE value and sets the flag") {
    const std::vector<double> flat(100, 3.0);
    const DeValue de = differential_entropy(flat);
    CHECK(de.value == kDefaultDeFloor);
    CHECK(de.floored);

    const DeValue custom = differential_entropy(flat, -5.0);
    CHECK(custom.value == -5.0);

    CHECK_THROWS_AS(differential_entropy({1.0}), InsufficientData);
}

TEST_CASE("node features have one column per band in band order") {
    TimeSeriesSet ts = sinusoid(10.0, 200.0, 4.0);
    ts.channels.push_back(std::vector<double>(ts.channels[0].size(), 0.0)); // flat channel
    const NodeFeatures nf = extract_node_features(ts, default_bands());
    REQUIRE(nf.features.rows == 2);
    REQUIRE(nf.features.cols == 5);
    // Channel 0 carries a 10 Hz tone: alpha column is the largest.
    for (std::size_t b = 0; b < 5; ++b) {
        if (b == 2) continue;
        CHECK(nf.features(0, 2) > nf.features(0, b));
    }
    // The flat channel floors all five bands.
    CHECK(nf.floored_count == 5);
    for (std::size_t b = 0; b < 5; ++b) CHECK(nf.features(1, b) == kDefaultDeFloor);
}
