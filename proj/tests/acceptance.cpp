// Acceptance gate: one timed pass/fail line per criterion, exit 0 only when
// every criterion holds. Each body re-derives its expectation independently
// of the implementation under test (closed-form systems, brute-force
// enumeration, dual numeric routes) rather than comparing against recorded
// outputs. Runs standalone; ctest registers it with a generous timeout
// because the learnability and calibration criteria do real work.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

#include "lfgnn/causality.hpp"
#include "lfgnn/config.hpp"
#include "lfgnn/data.hpp"
#include "lfgnn/errors.hpp"
#include "lfgnn/graphs.hpp"
#include "lfgnn/io.hpp"
#include "lfgnn/model.hpp"
#include "lfgnn/nn.hpp"
#include "lfgnn/numerics.hpp"
#include "lfgnn/pipeline.hpp"
#include "lfgnn/rng.hpp"
#include "lfgnn/signal.hpp"
#include "lfgnn/stats.hpp"
#include "lfgnn/train.hpp"

namespace fs = std::filesystem;
using namespace lfgnn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome pass(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

std::string work_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("lfgnn_accept_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

int run_cli(const std::string& args, const std::string& cwd = "",
            const std::string& stdout_file = "/dev/null") {
    std::string cmd;
    if (!cwd.empty()) cmd += "cd " + cwd + " && ";
    cmd += std::string(LFGNN_BIN) + " " + args + " >" + stdout_file + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream out;
    out.precision(digits);
    out << v;
    return out.str();
}

// ---- shared random builders (mirror the unit-test constructions) ----

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * (2.0 * rng.next_double() - 1.0);
    return m;
}

Matrix random_transition(std::size_t n, Rng& rng) {
    Matrix m(n, n);
    for (double& v : m.data) v = rng.next_double() + 0.05;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += m(i, j);
        for (std::size_t j = 0; j < n; ++j) m(i, j) /= row;
    }
    return m;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = 2.0 * rng.next_double() - 1.0;
    return v;
}

double weighted_sum(const Matrix& m, const Matrix& c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.data.size(); ++i) acc += m.data[i] * c.data[i];
    return acc;
}

double weighted_sum(const std::vector<double>& v, const std::vector<double>& c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * c[i];
    return acc;
}

TimeSeriesSet white_noise(std::uint64_t seed, std::size_t channels, std::size_t samples,
                          double rate) {
    TimeSeriesSet ts;
    ts.rate = rate;
    for (std::size_t i = 0; i < channels; ++i) ts.labels.push_back("ch" + std::to_string(i + 1));
    ts.channels.assign(channels, std::vector<double>(samples));
    Rng rng(seed);
    for (auto& ch : ts.channels)
        for (double& v : ch) v = rng.next_gaussian();
    return ts;
}

ModelConfig small_model_config(std::uint64_t seed) {
    ModelConfig cfg;
    cfg.channels = 8;
    cfg.regions = RegionMap::parse("A1,Front\nA2,Front\nA3,Front\nB1,Mid\nB2,Mid\n"
                                   "C1,Back\nC2,Back\nC3,Back\n");
    cfg.feature_dim = 3;
    cfg.global_hidden = 4;
    cfg.local_hidden = 4;
    cfg.k_global = 2;
    cfg.k_local = 2;
    cfg.pooled_nodes = 3;
    cfg.gate_hidden = 4;
    cfg.hidden_dim = 5;
    cfg.classifier_hidden = 4;
    cfg.dropout = 0.2;
    cfg.seed = seed;
    return cfg;
}

FeatureGraphSample random_sample(const ModelConfig& cfg, Rng& rng) {
    const std::size_t n = cfg.channels;
    FeatureGraphSample s;
    s.features = Matrix(n, cfg.feature_dim);
    for (double& v : s.features.data) v = 2.0 * rng.next_double() - 1.0;
    s.global_adj = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && rng.next_double() < 0.5) s.global_adj(i, j) = rng.next_double();
    s.local_adj = Matrix(n, n);
    for (const auto& [begin, end] : cfg.regions.extents())
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = begin; j < end; ++j)
                if (i != j && rng.next_double() < 0.7) s.local_adj(i, j) = rng.next_double();
    return s;
}

// Exact two-sided signed-rank p by enumerating all sign assignments of the
// observed (nonzero) differences; the reference for criterion 8.
double brute_force_wilcoxon(const std::vector<double>& diffs) {
    const std::size_t n = diffs.size();
    std::vector<std::size_t> by_abs(n);
    for (std::size_t i = 0; i < n; ++i) by_abs[i] = i;
    std::stable_sort(by_abs.begin(), by_abs.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[by_abs[j]]) == std::abs(diffs[by_abs[i]])) ++j;
        for (std::size_t k = i; k < j; ++k) rank[by_abs[k]] = (i + 1 + j) / 2.0;
        i = j;
    }
    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) (diffs[i] > 0.0 ? w_plus : w_minus) += rank[i];
    const double w_small = std::min(w_plus, w_minus);

    std::size_t hits = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) w += rank[i];
        if (w <= w_small + 1e-12) ++hits;
    }
    return std::min(1.0, 2.0 * static_cast<double>(hits) /
                             static_cast<double>(std::size_t{1} << n));
}

// Byte compare of two directory trees. `skip` names files excluded at any
// depth. Returns an empty string when equal, else a description.
std::string compare_trees(const fs::path& a, const fs::path& b,
                          const std::vector<std::string>& skip = {}) {
    auto skipped = [&](const fs::path& p) {
        return std::find(skip.begin(), skip.end(), p.filename().string()) != skip.end();
    };
    std::vector<fs::path> rel;
    for (const auto& entry : fs::recursive_directory_iterator(a))
        if (entry.is_regular_file() && !skipped(entry.path()))
            rel.push_back(fs::relative(entry.path(), a));
    std::sort(rel.begin(), rel.end());
    std::size_t b_count = 0;
    for (const auto& entry : fs::recursive_directory_iterator(b))
        if (entry.is_regular_file() && !skipped(entry.path())) ++b_count;
    if (b_count != rel.size())
        return "file count differs: " + std::to_string(rel.size()) + " vs " +
               std::to_string(b_count);
    for (const fs::path& r : rel) {
        if (!fs::exists(b / r)) return "missing " + r.string();
        if (read_file((a / r).string()) != read_file((b / r).string()))
            return "content differs: " + r.string();
    }
    return "";
}

// ---- criterion 1: directed recovery on a two-channel driven system ----
//
// x2 is driven by x1 at lag 1 (weight 0.5) with no feedback. At T = 50000
// the forward edge must come out significant and the reverse edge must not,
// at alpha 0.01, in at least 95 of 100 seeds.
Outcome criterion_direction() {
    const auto start = std::chrono::steady_clock::now();
    VarSystemSpec spec;
    spec.dim = 2;
    spec.coupling = Matrix(2, 2);
    spec.coupling(0, 0) = 0.5;
    spec.coupling(1, 1) = 0.5;
    spec.coupling(1, 0) = 0.5; // channel 0 feeds channel 1
    spec.length = 50000;
    spec.rate = 20.0; // surrogate blocks of rate/2 = 10 samples span the AR memory

    SignificanceConfig cfg;
    cfg.alpha = 0.01;
    cfg.surrogate_count = 120;
    cfg.jobs = 1;

    std::size_t good = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        spec.seed = 1000 + s;
        cfg.seed = spec.seed;
        const VarData data = generate_var(spec);
        const FlowDecomposition f =
            significance_test(data.series, estimate_information_flow(data.series), cfg);
        const bool forward_hit = f.p_values(0, 1) < cfg.alpha;
        const bool reverse_clean = f.p_values(1, 0) >= cfg.alpha;
        if (forward_hit && reverse_clean) ++good;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string detail = std::to_string(good) + "/100 seeds clean in " + fmt(secs, 3) + "s";
    if (good < 95) return fail(detail);
    if (secs >= 60.0) return fail(detail + " (over the 60s budget)");
    return pass(detail);
}

// ---- criterion 2: cofactor and LU coefficient routes agree ----
Outcome criterion_dual_route() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        Rng rng = Rng(77).split(i);
        const std::size_t dim = 2 + i % 5;
        const Matrix a = random_matrix(dim, dim, rng);
        Matrix c(dim, dim);
        // A^T A + dim*I: symmetric positive definite with eigenvalues >= dim,
        // so both routes operate far from singularity.
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t s = 0; s < dim; ++s) {
                double acc = r == s ? static_cast<double>(dim) : 0.0;
                for (std::size_t k = 0; k < dim; ++k) acc += a(k, r) * a(k, s);
                c(r, s) = acc;
            }
        const std::vector<double> rhs = random_vec(dim, rng);
        const std::vector<double> cof = cramer_coefficients(c, rhs);
        const std::vector<double> lu = solve_linear(c, rhs);
        for (std::size_t k = 0; k < dim; ++k) {
            const double denom = std::max({std::abs(cof[k]), std::abs(lu[k]), 1e-30});
            worst = std::max(worst, std::abs(cof[k] - lu[k]) / denom);
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string detail = "max relative gap " + fmt(worst, 3) + " over 200 systems in " +
                               fmt(secs, 3) + "s";
    if (worst > 1e-8) return fail(detail);
    if (secs >= 5.0) return fail(detail + " (over the 5s budget)");
    return pass(detail);
}

// ---- criterion 3: false-positive rate on independent channels ----
Outcome criterion_calibration() {
    const auto start = std::chrono::steady_clock::now();
    SignificanceConfig cfg;
    cfg.alpha = 0.01;
    cfg.surrogate_count = 300;
    cfg.block_length = 10;
    cfg.jobs = 1;

    std::size_t rejections = 0, pairs = 0;
    for (std::uint64_t d = 0; d < 80; ++d) {
        const TimeSeriesSet ts = white_noise(500 + d, 5, 800, 200.0);
        cfg.seed = 90000 + d;
        const FlowDecomposition f =
            significance_test(ts, estimate_information_flow(ts), cfg);
        for (std::size_t j = 0; j < 5; ++j)
            for (std::size_t i = 0; i < 5; ++i) {
                if (i == j) continue;
                ++pairs;
                if (f.p_values(j, i) < cfg.alpha) ++rejections;
            }
    }
    const double rate = static_cast<double>(rejections) / static_cast<double>(pairs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string detail = std::to_string(rejections) + "/" + std::to_string(pairs) +
                               " rejections (rate " + fmt(rate, 3) + ") in " + fmt(secs, 3) + "s";
    if (pairs < 1600) return fail(detail + " (need >= 1600 pair tests)");
    if (rate > 0.03) return fail(detail);
    if (secs >= 300.0) return fail(detail + " (over the 5min budget)");
    return pass(detail);
}

// ---- criterion 4: normalized flows stay inside the unit interval ----
Outcome criterion_tau_bound() {
    double max_abs_tau = 0.0;
    std::size_t estimations = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        Rng rng = Rng(4040).split(s);
        const std::size_t dim = 2 + s % 5;
        VarSystemSpec spec;
        spec.dim = dim;
        spec.coupling = random_matrix(dim, dim, rng, 0.6);
        const double radius = spectral_radius_bound(spec.coupling);
        const double target = 0.2 + 0.7 * rng.next_double();
        if (radius > 0.0)
            for (double& v : spec.coupling.data) v *= target / radius;
        spec.length = 2000;
        spec.rate = 10.0;
        spec.seed = 8800 + s;
        const VarData data = generate_var(spec);
        const FlowDecomposition f = normalize_flow(estimate_information_flow(data.series));
        ++estimations;
        for (double v : f.tau.data) {
            if (!std::isfinite(v)) return fail("non-finite tau at seed " + std::to_string(s));
            max_abs_tau = std::max(max_abs_tau, std::abs(v));
        }
    }
    // Plus plain noise, where normalization denominators are all noise/self.
    const FlowDecomposition f =
        normalize_flow(estimate_information_flow(white_noise(6000, 8, 1200, 100.0)));
    ++estimations;
    for (double v : f.tau.data) max_abs_tau = std::max(max_abs_tau, std::abs(v));

    const std::string detail = "max |tau| " + fmt(max_abs_tau, 6) + " over " +
                               std::to_string(estimations) + " estimations";
    return max_abs_tau <= 1.0 ? pass(detail) : fail(detail);
}

// ---- criterion 5: analytic gradients vs central differences, 20 seeds ----
Outcome criterion_gradients() {
    const auto start = std::chrono::steady_clock::now();
    double worst_layer = 0.0, worst_model = 0.0;
    std::string worst_name;

    for (std::uint64_t s = 0; s < 20; ++s) {
        auto note = [&](const GradReport& r, const char* kind, double& worst) {
            if (r.max_rel_error > worst) {
                worst = r.max_rel_error;
                worst_name = std::string(kind) + "/" + r.worst_param + " seed " + std::to_string(s);
            }
        };

        { // diffusion convolution
            Rng rng(1000 + s);
            const std::size_t n = 5, in = 3, out = 4;
            DConv layer(in, out, 3, Activation::relu, rng);
            Matrix x = random_matrix(n, in, rng);
            const Matrix pf = random_transition(n, rng);
            const Matrix pb = random_transition(n, rng);
            const Matrix c = random_matrix(n, out, rng);
            Matrix gx(n, in);
            GradCheckTarget t;
            t.loss = [&] { return weighted_sum(layer.forward(x, pf, pb), c); };
            t.grads = [&] {
                layer.zero_grad();
                layer.forward(x, pf, pb);
                gx = layer.backward(c);
            };
            layer.collect(t.params, "dconv");
            t.params.push_back({"input", &x, &gx});
            note(grad_check(t), "dconv", worst_layer);
        }
        { // hierarchical pooling with the entropy regularizer live
            Rng rng(2000 + s);
            const std::size_t n = 5, in = 3, out = 4, m = 2;
            DiffPool pool(in, out, m, rng);
            pool.entropy_weight = 0.1;
            Matrix x = random_matrix(n, in, rng);
            const Matrix pf = random_transition(n, rng);
            const Matrix pb = random_transition(n, rng);
            const Matrix adj = random_matrix(n, n, rng, 0.5);
            const Matrix c = random_matrix(m, out, rng);
            Matrix gx(n, in);
            GradCheckTarget t;
            t.loss = [&] {
                const DiffPool::Out o = pool.forward(x, adj, pf, pb);
                return weighted_sum(o.x, c) + pool.entropy_weight * pool.entropy_loss();
            };
            t.grads = [&] {
                pool.zero_grad();
                pool.forward(x, adj, pf, pb);
                gx = pool.backward(c);
            };
            pool.collect(t.params, "pool");
            t.params.push_back({"input", &x, &gx});
            note(grad_check(t), "diffpool", worst_layer);
        }
        { // attention pooling over uneven regions
            Rng rng(3000 + s);
            AttentionPool pool({{0, 2}, {2, 5}, {5, 6}}, rng);
            Matrix x = random_matrix(6, 4, rng);
            const Matrix c = random_matrix(3, 4, rng);
            Matrix gx(6, 4);
            GradCheckTarget t;
            t.loss = [&] { return weighted_sum(pool.forward(x), c); };
            t.grads = [&] {
                pool.zero_grad();
                pool.forward(x);
                gx = pool.backward(c);
            };
            pool.collect(t.params, "attn");
            t.params.push_back({"input", &x, &gx});
            note(grad_check(t), "attention", worst_layer);
        }
        { // gated fusion, all three inputs checked
            Rng rng(4000 + s);
            const std::size_t m = 3, d = 4;
            GatedFusion fusion(5, 6, m, d, 2, rng);
            Matrix zg = random_matrix(m, d, rng);
            Matrix zl = random_matrix(m, d, rng);
            Matrix summary(1, 5);
            summary.data = random_vec(5, rng);
            const std::vector<double> c = random_vec(2, rng);
            Matrix g_zg(m, d), g_zl(m, d), g_summary(1, 5);
            GradCheckTarget t;
            t.loss = [&] { return weighted_sum(fusion.forward(zg, zl, summary.data), c); };
            t.grads = [&] {
                fusion.zero_grad();
                fusion.forward(zg, zl, summary.data);
                GatedFusion::Back back = fusion.backward(c);
                g_zg = back.d_global;
                g_zl = back.d_local;
                g_summary.data = back.d_summary;
            };
            fusion.collect(t.params, "fusion");
            t.params.push_back({"z_global", &zg, &g_zg});
            t.params.push_back({"z_local", &zl, &g_zl});
            t.params.push_back({"summary", &summary, &g_summary});
            note(grad_check(t), "fusion", worst_layer);
        }
        { // classifier with dropout live under a fixed mask
            Rng rng(5000 + s);
            Classifier clf(8, 6, 2, 0.3, rng);
            Matrix z(1, 8), gz(1, 8);
            z.data = random_vec(8, rng);
            const std::vector<double> c = random_vec(2, rng);
            const std::uint64_t drop_seed = 17 + s;
            GradCheckTarget t;
            t.loss = [&] { return weighted_sum(clf.forward(z.data, true, drop_seed), c); };
            t.grads = [&] {
                clf.zero_grad();
                clf.forward(z.data, true, drop_seed);
                gz.data = clf.backward(c);
            };
            clf.collect(t.params, "clf");
            t.params.push_back({"input", &z, &gz});
            note(grad_check(t), "classifier", worst_layer);
        }
        { // full model, end to end through the loss
            Model model(small_model_config(s));
            Rng rng(6000 + s);
            FeatureGraphSample sample = random_sample(model.config(), rng);
            sample.label = static_cast<int>(s % 2);
            const std::uint64_t drop_seed = 13 + s;
            GradCheckTarget t;
            t.loss = [&] {
                return cross_entropy(model.forward(sample, true, drop_seed).logits, sample.label)
                    .loss;
            };
            t.grads = [&] {
                model.zero_grad();
                const ModelOutput out = model.forward(sample, true, drop_seed);
                model.backward(cross_entropy(out.logits, sample.label).grad);
            };
            t.params = model.params();
            note(grad_check(t), "model", worst_model);
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string detail = "worst layer " + fmt(worst_layer, 3) + ", worst model " +
                               fmt(worst_model, 3) + " (" + worst_name + ") in " + fmt(secs, 3) + "s";
    if (worst_layer >= 1e-5) return fail(detail);
    if (worst_model >= 1e-4) return fail(detail);
    if (secs >= 120.0) return fail(detail + " (over the 2min budget)");
    return pass(detail);
}

// ---- criterion 6: abstract node counts, block structure, assignments ----
Outcome criterion_architecture() {
    const RegionMap map = RegionMap::load(std::string(TEST_CONFIG_DIR) + "/regions_32ch.txt");
    ModelConfig cfg;
    cfg.regions = map;
    cfg.seed = 1;
    if (map.region_count() != 7) return fail("expected 7 regions in the 32-channel map");

    Model model(cfg);
    Rng rng(123);
    const FeatureGraphSample sample = random_sample(cfg, rng);
    const ModelOutput out = model.forward(sample, false, 0);

    if (out.gates.size() != 7) return fail("global branch emits " +
                                           std::to_string(out.gates.size()) + " nodes");
    if (out.attention.size() != 7) return fail("local branch emits " +
                                               std::to_string(out.attention.size()) + " nodes");

    const Matrix& s = model.pool.assignment();
    if (s.rows != 32 || s.cols != 7)
        return fail("assignment is " + std::to_string(s.rows) + "x" + std::to_string(s.cols));
    double worst_row_gap = 0.0;
    for (std::size_t i = 0; i < s.rows; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < s.cols; ++j) row += s(i, j);
        worst_row_gap = std::max(worst_row_gap, std::abs(row - 1.0));
    }
    if (worst_row_gap > 1e-12)
        return fail("assignment row sum off by " + fmt(worst_row_gap, 3));

    // Regional graph built from a real estimation run must be exactly zero
    // outside the diagonal blocks.
    TimeSeriesSet ts = white_noise(321, 32, 600, 200.0);
    ts.labels = map.canonical_labels();
    SignificanceConfig sig;
    sig.alpha = 0.05;
    sig.surrogate_count = 100;
    sig.seed = 5;
    sig.jobs = 1;
    const CausalGraph local = build_local_adjacency(ts, map, sig);
    const auto extents = map.extents();
    auto region_of = [&](std::size_t ch) {
        for (std::size_t r = 0; r < extents.size(); ++r)
            if (ch >= extents[r].first && ch < extents[r].second) return r;
        return extents.size();
    };
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j)
            if (region_of(i) != region_of(j) && local.adjacency(i, j) != 0.0)
                return fail("regional adjacency leaks across blocks at (" + std::to_string(i) +
                            "," + std::to_string(j) + ")");

    return pass("7 nodes per branch, assignment rows sum to 1 within " + fmt(worst_row_gap, 2) +
                ", regional graph exactly block diagonal");
}

// Shared by criteria 7: dataset on disk -> windows -> desk-scale nested CV.
MetricsReport planted_cv(double separation, std::uint64_t seed, const std::string& dir) {
    EmotionSynthConfig gen;
    gen.channels = 16;
    gen.trials = 12;
    gen.trial_seconds = 60.0;
    gen.rate = 200.0;
    gen.separation = separation;
    gen.coupling = 0.35;
    gen.seed = seed;
    const EmotionSynthResult made = generate_emotion_synthetic(gen, dir);
    const std::vector<LoadedTrial> trials = load_dataset(made.manifest, dir);

    RunConfig rc = RunConfig::defaults(false);
    rc.seed = seed;
    rc.jobs = 1;
    rc.surrogates = 150;
    rc.validate();
    const std::vector<FeatureGraphSample> samples =
        build_samples(trials, made.regions, rc, EdgeMethod::liang);
    return nested_cv(samples, rc.model_for(made.regions), rc.train_config());
}

// ---- criterion 7: planted structure is learnable, noise is not ----
Outcome criterion_learnability() {
    const auto start = std::chrono::steady_clock::now();
    const MetricsReport planted = planted_cv(1.5, 9001, work_dir("planted"));
    const MetricsReport control = planted_cv(0.0, 9003, work_dir("control"));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string detail = "planted acc " + fmt(planted.mean_accuracy, 3) + " f1 " +
                               fmt(planted.mean_f1, 3) + ", control acc " +
                               fmt(control.mean_accuracy, 3) + " in " + fmt(secs, 4) + "s";
    if (planted.mean_accuracy < 0.90 || planted.mean_f1 < 0.88) return fail(detail);
    if (control.mean_accuracy < 0.40 || control.mean_accuracy > 0.60) return fail(detail);
    if (secs >= 600.0) return fail(detail + " (over the 10min budget)");
    return pass(detail);
}

// ---- criterion 8: paired comparison through the command line ----
Outcome criterion_comparison() {
    const std::string root = work_dir("compare");
    const std::string data = root + "/data";
    EmotionSynthConfig gen;
    gen.channels = 8;
    gen.trials = 16;
    gen.trial_seconds = 12.0;
    gen.rate = 64.0;
    gen.separation = 0.8;
    gen.coupling = 0.35;
    gen.seed = 4242;
    const EmotionSynthResult made = generate_emotion_synthetic(gen, data);

    const std::string cfg_path = root + "/compare.ini";
    write_file_atomic(cfg_path,
                      "[paths]\ndataset = " + data + "\nregions = " + made.region_path +
                          "\n[run]\nseed = 7\n[signal]\ntarget_rate = 64\nwindow_seconds = 2\n"
                          "bands = 1-4,4-8,8-13,13-20,20-28\n[causality]\nalpha = 0.05\n"
                          "surrogates = 100\n[graph]\ntopk = 3\n[train]\nouter_folds = 8\n"
                          "inner_folds = 2\nstage1_epochs = 6\nstage2_epochs = 2\nbatch = 16\n");
    const int rc_exit = run_cli("compare --config " + cfg_path + " --out " + root + "/out");
    if (rc_exit != 0) return fail("compare exited " + std::to_string(rc_exit));

    const nlohmann::json j = nlohmann::json::parse(read_file(root + "/out/comparison.json"));
    if (j.at("paired_folds").get<std::size_t>() != 8) return fail("expected 8 paired folds");
    const auto& flow_folds = j.at("conditions").at("flow").at("folds");
    const auto& granger_folds = j.at("conditions").at("granger").at("folds");
    if (flow_folds.size() != 8 || granger_folds.size() != 8)
        return fail("per-condition fold lists are not 8 long");
    if (j.at("wilcoxon_p").is_null()) return fail("wilcoxon p missing: " +
                                                  j.value("note", std::string("no note")));
    const double reported = j.at("wilcoxon_p").get<double>();
    if (!(reported >= 0.0 && reported <= 1.0)) return fail("p out of range: " + fmt(reported, 6));

    std::vector<double> diffs;
    for (std::size_t f = 0; f < 8; ++f) {
        const double d = flow_folds[f].at("accuracy").get<double>() -
                         granger_folds[f].at("accuracy").get<double>();
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) return fail("all fold pairs tied; comparison degenerate");
    const double brute = brute_force_wilcoxon(diffs);
    if (std::abs(reported - brute) > 1e-12)
        return fail("reported p " + fmt(reported, 10) + " vs enumerated " + fmt(brute, 10));

    // The pairing is only meaningful if both conditions saw the same outer
    // split; rebuild both window families and compare the fold assignment.
    const RunConfig rc = RunConfig::from_ini(IniFile::load(cfg_path));
    const std::vector<LoadedTrial> trials = load_dataset(made.manifest, data);
    const std::vector<FeatureGraphSample> flow_samples =
        build_samples(trials, made.regions, rc, EdgeMethod::liang);
    const std::vector<FeatureGraphSample> granger_samples =
        build_samples(trials, made.regions, rc, EdgeMethod::granger);
    const TrialFolds a = outer_folds_of(flow_samples, rc.train_config());
    const TrialFolds b = outer_folds_of(granger_samples, rc.train_config());
    if (a.trials != b.trials || a.samples != b.samples)
        return fail("outer folds differ between edge families");

    return pass("8 paired folds, identical splits, p " + fmt(reported, 6) +
                " matches enumeration over " + std::to_string(diffs.size()) + " informative pairs");
}

// ---- criterion 9: default architecture stays within the weight budget ----
Outcome criterion_parameter_budget() {
    ModelConfig cfg;
    cfg.regions = RegionMap::load(std::string(TEST_CONFIG_DIR) + "/regions_32ch.txt");
    cfg.seed = 1;
    Model model(cfg);
    const std::size_t count = model.param_count();
    const std::string detail = std::to_string(count) + " parameters (budget 60000)";
    return count <= 60000 ? pass(detail) : fail(detail);
}

// ---- criterion 10: the real-recordings protocol is documented ----
//
// Table-level results from the recorded dataset cannot be recomputed here
// (the recordings are not redistributable), so the repository must instead
// document the exact command against user-supplied data and ship a config
// that actually validates under the full protocol.
Outcome criterion_documentation() {
    const fs::path root = fs::path(TEST_CONFIG_DIR).parent_path();
    const std::string readme_path = (root / "README.md").string();
    if (!fs::exists(readme_path)) return fail("README.md missing");
    const std::string readme = read_file(readme_path);
    if (readme.find("MEEG") == std::string::npos)
        return fail("README does not address the recorded-dataset protocol");
    if (readme.find("configs/meeg_arousal.ini") == std::string::npos)
        return fail("README does not give the exact command configuration");

    const std::string cfg_path = (root / "configs/meeg_arousal.ini").string();
    if (!fs::exists(cfg_path)) return fail("configs/meeg_arousal.ini missing");
    const RunConfig rc = RunConfig::from_ini(IniFile::load(cfg_path));
    rc.validate();
    if (!rc.paper_protocol) return fail("documented config is not on the full protocol");
    if (rc.surrogates != 1000 || rc.train.outer_folds != 10)
        return fail("documented config departs from the full protocol");
    return pass("README names the command, configs/meeg_arousal.ini validates on the full protocol");
}

// ---- criterion 11: byte reproducibility and worker-count invariance ----
Outcome criterion_reproducibility() {
    const std::string cfg =
        "[signal]\ntarget_rate = 64\nwindow_seconds = 2\nbands = 1-4,4-8,8-13,13-20,20-28\n"
        "[causality]\nalpha = 0.05\nsurrogates = 100\n"
        "[train]\nouter_folds = 3\ninner_folds = 2\nstage1_epochs = 5\nstage2_epochs = 2\nbatch = 8\n";
    const std::string roots[2] = {work_dir("repro_a"), work_dir("repro_b")};
    for (const std::string& root : roots) {
        write_file_atomic(root + "/run.ini", cfg);
        if (run_cli("generate --kind emotion --config run.ini --dataset data --channels 8 "
                    "--trials 6 --seconds 8 --seed 3",
                    root) != 0)
            return fail("generate failed in " + root);
        if (run_cli("preprocess --config run.ini --dataset data --regions data/regions.txt "
                    "--out pre --seed 3 --jobs 1",
                    root) != 0)
            return fail("preprocess failed in " + root);
        if (run_cli("train --config run.ini --windows pre/windows --regions data/regions.txt "
                    "--out fit --seed 3 --jobs 1",
                    root) != 0)
            return fail("train failed in " + root);
    }
    const std::string rerun_gap = compare_trees(roots[0], roots[1]);
    if (!rerun_gap.empty()) return fail("fresh rerun differs: " + rerun_gap);

    // Worker-count invariance: recompute with more jobs in the first root.
    // The config echo legitimately records the requested worker count, so the
    // comparison covers every computational artifact but not the echo.
    if (run_cli("preprocess --config run.ini --dataset data --regions data/regions.txt "
                "--out pre_jobs --seed 3 --jobs 3",
                roots[0]) != 0)
        return fail("preprocess --jobs 3 failed");
    if (run_cli("train --config run.ini --windows pre/windows --regions data/regions.txt "
                "--out fit_jobs --seed 3 --jobs 2",
                roots[0]) != 0)
        return fail("train --jobs 2 failed");
    const std::string pre_gap = compare_trees(fs::path(roots[0]) / "pre",
                                              fs::path(roots[0]) / "pre_jobs",
                                              {"config_echo.ini"});
    if (!pre_gap.empty()) return fail("preprocess --jobs 3 differs: " + pre_gap);
    const std::string fit_gap = compare_trees(fs::path(roots[0]) / "fit",
                                              fs::path(roots[0]) / "fit_jobs",
                                              {"config_echo.ini"});
    if (!fit_gap.empty()) return fail("train --jobs 2 differs: " + fit_gap);

    return pass("reruns byte-identical, jobs 3/2 match jobs 1 on all artifacts");
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> body;
};

} // namespace

// Optional argv: criterion ids to run (default all), handy when iterating
// on a single criterion.
int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "directed recovery on the driven pair", criterion_direction},
        {2, "cofactor route matches LU route", criterion_dual_route},
        {3, "calibration on independent channels", criterion_calibration},
        {4, "normalized flows bounded by one", criterion_tau_bound},
        {5, "gradients match central differences", criterion_gradients},
        {6, "branch widths and block structure", criterion_architecture},
        {7, "planted structure learnable, noise not", criterion_learnability},
        {8, "paired comparison with exact signed-rank", criterion_comparison},
        {9, "parameter budget", criterion_parameter_budget},
        {10, "recorded-dataset protocol documented", criterion_documentation},
        {11, "byte reproducibility across reruns and jobs", criterion_reproducibility},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0, ran = 0;
    for (const Criterion& c : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.body();
        } catch (const std::exception& e) {
            outcome = fail(std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %2d: %-46s (%7.1fs) %s\n", outcome.pass ? "PASS" : "FAIL",
                    c.id, c.name, secs, outcome.detail.c_str());
        std::fflush(stdout);
        ++ran;
        if (!outcome.pass) ++failures;
    }
    if (failures == 0) std::printf("acceptance: all %d criteria hold\n", ran);
    else std::printf("acceptance: %d of %d criteria failed\n", failures, ran);
    return failures == 0 ? 0 : 1;
}
