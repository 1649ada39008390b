#include <doctest.h>

#include <cmath>
#include <vector>

#include "lfgnn/causality.hpp"
#include "lfgnn/errors.hpp"
#include "lfgnn/rng.hpp"

using namespace lfgnn;

namespace {

// X1 is AR(0.5); X2_{t+1} = 0.5 X2_t + coupling X1_t + noise. Ground truth:
// flow 1->2 only.
TimeSeriesSet coupled_pair(std::uint64_t seed, std::size_t total, double coupling = 0.5) {
    Rng rng(seed);
    TimeSeriesSet ts;
    ts.rate = 1.0;
    ts.channels.assign(2, std::vector<double>(total));
    double x1 = 0.0, x2 = 0.0;
    for (std::size_t t = 0; t < total + 200; ++t) {
        const double n1 = rng.next_gaussian();
        const double n2 = rng.next_gaussian();
        const double nx1 = 0.5 * x1 + n1;
        const double nx2 = 0.5 * x2 + coupling * x1 + n2;
        x1 = nx1;
        x2 = nx2;
        if (t >= 200) {
            ts.channels[0][t - 200] = x1;
            ts.channels[1][t - 200] = x2;
        }
    }
    return ts;
}

TimeSeriesSet white_noise(std::uint64_t seed, std::size_t channels, std::size_t total) {
    Rng rng(seed);
    TimeSeriesSet ts;
    ts.rate = 1.0;
    ts.channels.assign(channels, std::vector<double>(total));
    for (auto& ch : ts.channels)
        for (double& v : ch) v = rng.next_gaussian();
    return ts;
}

bool matrices_equal(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

} // namespace

TEST_CASE("independent channels carry no systematic flow") {
    const TimeSeriesSet ts = white_noise(101, 4, 50000);
    const FlowDecomposition f = estimate_information_flow(ts);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(f.flow(i, i) == 0.0);
        for (std::size_t j = 0; j < 4; ++j)
            if (i != j) CHECK(std::abs(f.flow(j, i)) < 0.02);
    }
}

TEST_CASE("the coupled pair shows flow 1->2 and not 2->1") {
    const TimeSeriesSet ts = coupled_pair(7, 50000);
    const FlowDecomposition f = estimate_information_flow(ts);
    CHECK(f.flow(0, 1) > 0.05);
    CHECK(std::abs(f.flow(1, 0)) < 0.02);
    CHECK(std::abs(f.flow(1, 0)) < 0.2 * f.flow(0, 1));

    // Self and noise terms: stationary AR with positive noise keeps both active.
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(f.self_rate[i] < 0.0); // mean reversion of a stable AR step
        CHECK(f.noise_rate[i] > 0.0);
    }
}

TEST_CASE("estimate preconditions: channel count, length, singular covariance") {
    TimeSeriesSet one;
    one.rate = 1.0;
    one.channels = {std::vector<double>(100, 0.0)};
    CHECK_THROWS_AS(estimate_information_flow(one), ShapeError);

    TimeSeriesSet tiny = white_noise(3, 3, 20);
    CHECK_THROWS_AS(estimate_information_flow(tiny), InsufficientData);

    // Duplicated channel makes the covariance singular; the message names it.
    TimeSeriesSet dup = white_noise(4, 2, 1000);
    dup.channels.push_back(dup.channels[0]);
    dup.labels = {"a", "b", "a-copy"};
    try {
        estimate_information_flow(dup);
        FAIL("expected SingularCovariance");
    } catch (const SingularCovariance& e) {
        const std::string msg = e.what();
        CHECK(msg.find("a") != std::string::npos);
    }
}

TEST_CASE("cofactor route matches the LU route on random SPD systems") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.next_index(5));
        Matrix samples(8 * n, n);
        for (double& v : samples.data) v = rng.next_gaussian();
        const Matrix c = covariance(samples);
        std::vector<double> rhs(n);
        for (double& v : rhs) v = rng.next_gaussian();

        const std::vector<double> via_lu = solve_linear(c, rhs);
        const std::vector<double> via_cofactor = cramer_coefficients(c, rhs);
        for (std::size_t k = 0; k < n; ++k) {
            const double scale = std::max(1e-30, std::abs(via_lu[k]));
            CHECK(std::abs(via_lu[k] - via_cofactor[k]) / scale < 1e-8);
        }
    }
}

TEST_CASE("normalization bounds, signs, and degenerate target") {
    const TimeSeriesSet ts = coupled_pair(11, 20000);
    FlowDecomposition f = normalize_flow(estimate_information_flow(ts));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(f.tau(i, i) == 0.0);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(f.tau(j, i)) <= 1.0);
            if (f.flow(j, i) != 0.0)
                CHECK(std::signbit(f.tau(j, i)) == std::signbit(f.flow(j, i)));
        }
    }

    // Hand-built decomposition: single nonzero flow, zero self and noise.
    FlowDecomposition g;
    g.flow = Matrix(2, 2);
    g.flow(0, 1) = -0.75;
    g.self_rate = {0.0, 0.0};
    g.noise_rate = {0.0, 0.0};
    g = normalize_flow(std::move(g));
    CHECK(g.tau(0, 1) == -1.0);
    CHECK(g.tau(1, 0) == 0.0); // target 0 has Z = 0
}

TEST_CASE("normalized flow is exactly bounded on adversarial magnitudes") {
    Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 3;
        FlowDecomposition g;
        g.flow = Matrix(n, n);
        g.self_rate.assign(n, 0.0);
        g.noise_rate.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    g.flow(i, j) = std::ldexp(rng.next_gaussian(),
                                              static_cast<int>(rng.next_index(60)) - 30);
        CHECK_NOTHROW(normalize_flow(std::move(g)));
    }
}

TEST_CASE("significance test rejects the planted direction and not the reverse") {
    const TimeSeriesSet ts = coupled_pair(13, 20000);
    SignificanceConfig cfg;
    cfg.surrogate_count = 100;
    cfg.block_length = 20;
    cfg.seed = 99;
    const FlowDecomposition f =
        significance_test(ts, estimate_information_flow(ts), cfg);
    CHECK(f.p_values(0, 1) <= 0.01);
    CHECK(f.p_values(1, 0) > 0.01);
    CHECK(f.p_values(0, 0) == 1.0);
    CHECK(f.p_values(1, 1) == 1.0);
}

TEST_CASE("direction recovery holds across seeds") {
    int correct = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const TimeSeriesSet ts = coupled_pair(1000 + static_cast<std::uint64_t>(s), 20000);
        SignificanceConfig cfg;
        cfg.surrogate_count = 100;
        cfg.block_length = 20;
        cfg.seed = 5 + static_cast<std::uint64_t>(s);
        cfg.jobs = 2;
        const FlowDecomposition f =
            significance_test(ts, estimate_information_flow(ts), cfg);
        if (f.p_values(0, 1) <= 0.01 && f.p_values(1, 0) > 0.01) ++correct;
    }
    CHECK(correct >= 19);
}

TEST_CASE("calibration: independent channels rarely rejected at alpha 0.01") {
    const TimeSeriesSet ts = white_noise(2024, 12, 1500);
    SignificanceConfig cfg;
    cfg.surrogate_count = 100;
    cfg.block_length = 10;
    cfg.seed = 31;
    cfg.jobs = 4;
    const FlowDecomposition f =
        significance_test(ts, estimate_information_flow(ts), cfg);
    std::size_t rejections = 0, pairs = 0;
    for (std::size_t j = 0; j < 12; ++j)
        for (std::size_t i = 0; i < 12; ++i) {
            if (i == j) continue;
            ++pairs;
            if (f.p_values(j, i) <= cfg.alpha) ++rejections;
        }
    CHECK(static_cast<double>(rejections) / static_cast<double>(pairs) <= 0.03);
}

TEST_CASE("identical seeds give bit-identical p-values, independent of jobs") {
    // Four channels: 12 informative cells, so two seeds colliding on every
    // exceedance count is out of the question.
    const TimeSeriesSet ts = white_noise(21, 4, 2000);
    const FlowDecomposition base = estimate_information_flow(ts);
    SignificanceConfig cfg;
    cfg.surrogate_count = 100;
    cfg.block_length = 15;
    cfg.seed = 7;
    cfg.jobs = 1;
    const FlowDecomposition a = significance_test(ts, base, cfg);
    cfg.jobs = 4;
    const FlowDecomposition b = significance_test(ts, base, cfg);
    CHECK(matrices_equal(a.p_values, b.p_values));

    cfg.seed = 8;
    const FlowDecomposition c = significance_test(ts, base, cfg);
    CHECK_FALSE(matrices_equal(a.p_values, c.p_values));
}

TEST_CASE("rescaling a channel preserves tau ordering and the significant edge set") {
    const TimeSeriesSet ts = coupled_pair(17, 20000);
    TimeSeriesSet scaled = ts;
    for (double& v : scaled.channels[0]) v *= 37.5;

    SignificanceConfig cfg;
    cfg.surrogate_count = 100;
    cfg.block_length = 20;
    cfg.seed = 3;

    const FlowDecomposition fa =
        significance_test(ts, normalize_flow(estimate_information_flow(ts)), cfg);
    const FlowDecomposition fb =
        significance_test(scaled, normalize_flow(estimate_information_flow(scaled)), cfg);

    for (std::size_t i = 0; i < 2; ++i) {
        // Per-target strongest source is unchanged.
        std::size_t arg_a = 0, arg_b = 0;
        double best_a = -1.0, best_b = -1.0;
        for (std::size_t j = 0; j < 2; ++j) {
            if (std::abs(fa.tau(j, i)) > best_a) {
                best_a = std::abs(fa.tau(j, i));
                arg_a = j;
            }
            if (std::abs(fb.tau(j, i)) > best_b) {
                best_b = std::abs(fb.tau(j, i));
                arg_b = j;
            }
        }
        CHECK(arg_a == arg_b);
        for (std::size_t j = 0; j < 2; ++j)
            CHECK((fa.p_values(j, i) <= cfg.alpha) == (fb.p_values(j, i) <= cfg.alpha));
    }
}

TEST_CASE("flow is directional: the two orientations of a pair differ") {
    const TimeSeriesSet ts = coupled_pair(29, 20000);
    const FlowDecomposition f = estimate_information_flow(ts);
    CHECK(f.flow(0, 1) != f.flow(1, 0));
    CHECK(std::abs(f.flow(0, 1)) > 3.0 * std::abs(f.flow(1, 0)));
}

TEST_CASE("significance config validation") {
    SignificanceConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.alpha = 0.01;
    cfg.surrogate_count = 50;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.surrogate_count = 100;
    CHECK_NOTHROW(cfg.validate());

    CHECK(cfg.resolved_block_length(200.0) == 100);
    CHECK(cfg.resolved_block_length(1.0) == 1);
    cfg.block_length = 7;
    CHECK(cfg.resolved_block_length(200.0) == 7);
}

TEST_CASE("granger recovers the planted direction") {
    const TimeSeriesSet ts = coupled_pair(41, 20000);
    const GrangerResult g = granger_causality(ts, 5);
    CHECK(g.p_values(0, 1) < 1e-6);
    CHECK(g.p_values(1, 0) > 0.01);
    CHECK(g.f_stat(0, 1) > g.f_stat(1, 0));
    CHECK(g.f_stat(0, 0) == 0.0);
    CHECK(g.p_values(0, 0) == 1.0);
}

TEST_CASE("granger p-values are roughly uniform on white noise") {
    std::vector<double> ps;
    for (int s = 0; s < 40; ++s) {
        const TimeSeriesSet ts = white_noise(3000 + static_cast<std::uint64_t>(s), 2, 2000);
        const GrangerResult g = granger_causality(ts, 5);
        ps.push_back(g.p_values(0, 1));
        ps.push_back(g.p_values(1, 0));
    }
    double mean = 0.0;
    for (double p : ps) mean += p;
    mean /= static_cast<double>(ps.size());
    CHECK(mean > 0.35);
    CHECK(mean < 0.65);
    CHECK(*std::min_element(ps.begin(), ps.end()) < 0.2);
    CHECK(*std::max_element(ps.begin(), ps.end()) > 0.8);
}

TEST_CASE("granger rejects invalid order and short series") {
    const TimeSeriesSet ts = white_noise(1, 2, 2000);
    CHECK_THROWS_AS(granger_causality(ts, 0), InvalidOrder);

    const TimeSeriesSet tiny = white_noise(1, 2, 60);
    CHECK_THROWS_AS(granger_causality(tiny, 5), InsufficientData);
}

TEST_CASE("granger flags a rank-deficient lag matrix") {
    TimeSeriesSet ts;
    ts.rate = 1.0;
    // Constant channels: lag columns are collinear with the intercept.
    ts.channels = {std::vector<double>(500, 1.0), std::vector<double>(500, 2.0)};
    CHECK_THROWS_AS(granger_causality(ts, 2), RankError);
}
