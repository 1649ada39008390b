#include "lfgnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "lfgnn/errors.hpp"
#include "lfgnn/parallel.hpp"
#include "lfgnn/rng.hpp"
#include "lfgnn/stats.hpp"

namespace lfgnn {
namespace {

// Derived-seed streams; keep these distinct so shuffling, dropout, and fold
// assignment never share a counter sequence.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;
constexpr std::uint64_t kFoldStream = 3;
constexpr std::uint64_t kOuterStream = 4;
constexpr std::uint64_t kInnerStream = 5;
constexpr std::uint64_t kInitStream = 6;
constexpr std::uint64_t kCandidateStream = 7;

void shuffle_indices(std::vector<std::size_t>& order, Rng rng) {
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_index(i)]);
}

std::vector<std::vector<double>> snapshot(const std::vector<ParamRef>& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const ParamRef& p : params) out.push_back(p.value->data);
    return out;
}

void restore(const std::vector<ParamRef>& params, const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i].value->data = snap[i];
}

// One pass over `set` in a seeded shuffle order, updating after each batch.
// Returns the mean per-sample loss as visited (before each update).
double run_epoch(Model& model, const std::vector<FeatureGraphSample>& set, AdamState& opt,
                 double lr, const TrainConfig& cfg, std::uint64_t stage, std::size_t epoch) {
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_indices(order, Rng(cfg.seed).split(kShuffleStream, stage, epoch));

    const std::vector<ParamRef> params = model.params();
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
        const std::size_t count = std::min(cfg.batch, order.size() - start);
        model.zero_grad();
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t idx = order[start + k];
            const FeatureGraphSample& s = set[idx];
            const std::uint64_t drop_seed =
                Rng(cfg.seed).split(kDropoutStream, stage, epoch).split(idx).next_u64();
            const ModelOutput out = model.forward(s, true, drop_seed);
            const LossGrad ce = cross_entropy(out.logits, s.label);
            loss_sum += ce.loss + model.pool.entropy_weight * model.pool.entropy_loss();
            model.backward(ce.grad);
        }
        // Batch mean: gradients were accumulated as sums (including the
        // pooling entropy term), so scale once here.
        const double inv = 1.0 / static_cast<double>(count);
        for (const ParamRef& p : params)
            for (double& g : p.grad->data) g *= inv;
        adam_step(params, opt, lr, cfg);
    }
    return loss_sum / static_cast<double>(set.size());
}

} // namespace

TrainConfig TrainConfig::desk() {
    TrainConfig cfg;
    cfg.outer_folds = 5;
    cfg.inner_folds = 2;
    cfg.stage1_epochs = 40;
    cfg.stage2_epochs = 10;
    return cfg;
}

void TrainConfig::validate() const {
    if (outer_folds < 2 || inner_folds < 2) throw ConfigError("folds must be >= 2");
    if (stage1_lr < 0.0 || stage2_lr < 0.0) throw ConfigError("learning rates must be >= 0");
    if (stage1_epochs == 0 || stage2_epochs == 0) throw ConfigError("epochs must be >= 1");
    if (batch == 0) throw ConfigError("batch size must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
    if (jobs < 0) throw ConfigError("jobs must be >= 0");
}

void adam_step(const std::vector<ParamRef>& params, AdamState& state, double lr,
               const TrainConfig& cfg) {
    if (state.m.empty() && state.t == 0) {
        for (const ParamRef& p : params) {
            state.m.emplace_back(p.value->rows, p.value->cols);
            state.v.emplace_back(p.value->rows, p.value->cols);
        }
    }
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw ShapeError("optimizer state does not match the parameter list");
    state.t += 1;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& value = *params[i].value;
        const Matrix& grad = *params[i].grad;
        Matrix& m = state.m[i];
        Matrix& v = state.v[i];
        if (m.rows != value.rows || m.cols != value.cols)
            throw ShapeError("optimizer moment shape mismatch: " + params[i].name);
        for (std::size_t k = 0; k < value.data.size(); ++k) {
            const double g = grad.data[k];
            m.data[k] = cfg.beta1 * m.data[k] + (1.0 - cfg.beta1) * g;
            v.data[k] = cfg.beta2 * v.data[k] + (1.0 - cfg.beta2) * g * g;
            value.data[k] -= lr * (m.data[k] / c1) / (std::sqrt(v.data[k] / c2) + cfg.epsilon);
        }
    }
}

TrainCurves train_two_stage(Model& model, const std::vector<FeatureGraphSample>& train,
                            const std::vector<FeatureGraphSample>& val,
                            const TrainConfig& cfg) {
    cfg.validate();
    if (train.empty() || val.empty()) throw DataError("empty training or validation split");

    TrainCurves curves;
    const std::vector<ParamRef> params = model.params();
    AdamState stage1;
    double best = -1.0;
    std::vector<std::vector<double>> best_params;
    for (std::size_t epoch = 1; epoch <= cfg.stage1_epochs; ++epoch) {
        curves.stage1_loss.push_back(run_epoch(model, train, stage1, cfg.stage1_lr, cfg, 1, epoch));
        const double acc = evaluate(model, val).accuracy;
        curves.stage1_val_acc.push_back(acc);
        if (acc > best) {
            best = acc;
            curves.best_epoch = epoch;
            best_params = snapshot(params);
        }
    }
    restore(params, best_params);
    curves.best_val_acc = best;

    std::vector<FeatureGraphSample> full = train;
    full.insert(full.end(), val.begin(), val.end());
    AdamState stage2;
    for (std::size_t epoch = 1; epoch <= cfg.stage2_epochs; ++epoch)
        curves.stage2_loss.push_back(run_epoch(model, full, stage2, cfg.stage2_lr, cfg, 2, epoch));
    return curves;
}

std::string curves_csv(const TrainCurves& curves) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "stage,epoch,train_loss,val_accuracy\n";
    for (std::size_t e = 0; e < curves.stage1_loss.size(); ++e)
        out << "1," << e + 1 << ',' << curves.stage1_loss[e] << ','
            << curves.stage1_val_acc[e] << '\n';
    for (std::size_t e = 0; e < curves.stage2_loss.size(); ++e)
        out << "2," << e + 1 << ',' << curves.stage2_loss[e] << ",\n";
    return out.str();
}

EvalResult evaluate(Model& model, const std::vector<FeatureGraphSample>& test) {
    if (test.empty()) throw DataError("empty evaluation set");
    Matrix confusion(2, 2);
    for (const FeatureGraphSample& s : test) {
        if (s.label < 0 || s.label > 1) throw DataError("labels must be binary");
        const ModelOutput out = model.forward(s, false, 0);
        const std::size_t pred = out.logits[1] > out.logits[0] ? 1 : 0;
        confusion(static_cast<std::size_t>(s.label), pred) += 1.0;
    }
    return metrics_from_confusion(confusion);
}

EvalResult metrics_from_confusion(const Matrix& confusion) {
    if (!confusion.square() || confusion.rows == 0)
        throw ShapeError("confusion matrix must be square");
    const std::size_t k = confusion.rows;
    double total = 0.0, correct = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            total += confusion(i, j);
            if (i == j) correct += confusion(i, j);
        }
    if (total == 0.0) throw DataError("confusion matrix is empty");

    double f1_sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double tp = confusion(c, c);
        double fn = 0.0, fp = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j != c) {
                fn += confusion(c, j);
                fp += confusion(j, c);
            }
        }
        const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        f1_sum += precision + recall > 0.0
                      ? 2.0 * precision * recall / (precision + recall)
                      : 0.0;
    }
    EvalResult out;
    out.accuracy = correct / total;
    out.macro_f1 = f1_sum / static_cast<double>(k);
    out.confusion = confusion;
    return out;
}

TrialFolds stratified_trial_folds(const std::vector<FeatureGraphSample>& dataset,
                                  std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("need at least two folds");
    if (dataset.empty()) throw DataError("empty dataset");

    std::vector<std::uint64_t> trial_ids;
    std::vector<int> trial_label;
    std::vector<std::vector<std::size_t>> trial_samples;
    std::map<std::uint64_t, std::size_t> slot;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const FeatureGraphSample& s = dataset[i];
        if (s.label < 0 || s.label > 1) throw DataError("labels must be binary");
        const auto [it, fresh] = slot.try_emplace(s.trial, trial_ids.size());
        if (fresh) {
            trial_ids.push_back(s.trial);
            trial_label.push_back(s.label);
            trial_samples.emplace_back();
        } else if (trial_label[it->second] != s.label) {
            throw DataError("trial " + std::to_string(s.trial) + " has mixed labels");
        }
        trial_samples[it->second].push_back(i);
    }

    std::vector<std::size_t> order(trial_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_indices(order, Rng(seed).split(kFoldStream));

    // Continuing the round-robin cursor across classes keeps both the
    // per-class and the total fold sizes within one trial of each other.
    TrialFolds out;
    out.trials.resize(folds);
    out.samples.resize(folds);
    std::size_t cursor = 0;
    for (int cls : {0, 1}) {
        for (std::size_t t : order) {
            if (trial_label[t] != cls) continue;
            const std::size_t f = cursor % folds;
            ++cursor;
            out.trials[f].push_back(trial_ids[t]);
            for (std::size_t si : trial_samples[t]) out.samples[f].push_back(si);
        }
    }

    for (std::size_t f = 0; f < folds; ++f) {
        bool has[2] = {false, false};
        for (std::uint64_t id : out.trials[f]) has[trial_label[slot.at(id)]] = true;
        if (!has[0] || !has[1])
            throw StratificationError("fold " + std::to_string(f) +
                                      " is missing a class; need more trials per class");
    }
    return out;
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["folds"] = nlohmann::ordered_json::array();
    for (const FoldMetrics& f : folds) {
        nlohmann::ordered_json confusion = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < f.confusion.rows; ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (std::size_t k = 0; k < f.confusion.cols; ++k) row.push_back(f.confusion(i, k));
            confusion.push_back(row);
        }
        j["folds"].push_back({{"accuracy", f.accuracy},
                              {"macro_f1", f.macro_f1},
                              {"confusion", confusion}});
    }
    j["mean_accuracy"] = mean_accuracy;
    j["std_accuracy"] = std_accuracy;
    j["mean_f1"] = mean_f1;
    j["std_f1"] = std_f1;
    if (comparison_p >= 0.0) j["comparison_p"] = comparison_p;
    return j.dump(2);
}

TrialFolds outer_folds_of(const std::vector<FeatureGraphSample>& dataset,
                          const TrainConfig& cfg) {
    return stratified_trial_folds(dataset, cfg.outer_folds,
                                  Rng(cfg.seed).split(kOuterStream).next_u64());
}

MetricsReport nested_cv(const std::vector<FeatureGraphSample>& dataset,
                        const ModelConfig& model_cfg, const TrainConfig& cfg,
                        std::vector<Model>* fold_models) {
    cfg.validate();
    model_cfg.validate();
    const TrialFolds outer = outer_folds_of(dataset, cfg);

    MetricsReport report;
    report.folds.resize(cfg.outer_folds);
    if (fold_models) fold_models->assign(cfg.outer_folds, Model(model_cfg));
    parallel_for(cfg.outer_folds, cfg.jobs, [&](std::size_t f) {
        std::vector<FeatureGraphSample> test;
        for (std::size_t idx : outer.samples[f]) test.push_back(dataset[idx]);
        std::vector<FeatureGraphSample> pool;
        for (std::size_t g = 0; g < cfg.outer_folds; ++g) {
            if (g == f) continue;
            for (std::size_t idx : outer.samples[g]) pool.push_back(dataset[idx]);
        }

        const TrialFolds inner = stratified_trial_folds(
            pool, cfg.inner_folds, Rng(cfg.seed).split(kInnerStream, f).next_u64());
        double best_acc = -1.0;
        std::optional<Model> best;
        for (std::size_t i = 0; i < cfg.inner_folds; ++i) {
            std::vector<FeatureGraphSample> ival;
            for (std::size_t idx : inner.samples[i]) ival.push_back(pool[idx]);
            std::vector<FeatureGraphSample> itrain;
            for (std::size_t g = 0; g < cfg.inner_folds; ++g) {
                if (g == i) continue;
                for (std::size_t idx : inner.samples[g]) itrain.push_back(pool[idx]);
            }
            ModelConfig mc = model_cfg;
            mc.seed = Rng(cfg.seed).split(kInitStream, f, i).next_u64();
            TrainConfig tc = cfg;
            tc.seed = Rng(cfg.seed).split(kCandidateStream, f, i).next_u64();
            Model candidate(mc);
            const TrainCurves curves = train_two_stage(candidate, itrain, ival, tc);
            if (curves.best_val_acc > best_acc) {
                best_acc = curves.best_val_acc;
                best.emplace(std::move(candidate));
            }
        }
        const EvalResult r = evaluate(*best, test);
        report.folds[f] = {r.accuracy, r.macro_f1, r.confusion};
        if (fold_models) (*fold_models)[f] = std::move(*best);
    });

    auto aggregate = [&](auto pick, double& mean, double& stdev) {
        double sum = 0.0;
        for (const FoldMetrics& f : report.folds) sum += pick(f);
        mean = sum / static_cast<double>(report.folds.size());
        double ss = 0.0;
        for (const FoldMetrics& f : report.folds) {
            const double d = pick(f) - mean;
            ss += d * d;
        }
        stdev = report.folds.size() > 1
                    ? std::sqrt(ss / static_cast<double>(report.folds.size() - 1))
                    : 0.0;
    };
    aggregate([](const FoldMetrics& f) { return f.accuracy; }, report.mean_accuracy,
              report.std_accuracy);
    aggregate([](const FoldMetrics& f) { return f.macro_f1; }, report.mean_f1, report.std_f1);
    return report;
}

double wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeError("paired scores must have equal length");
    if (a.size() < 6) throw DataError("need at least six pairs");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw DegenerateTest("all paired differences are zero");

    const std::size_t n = diffs.size();
    std::vector<std::size_t> by_abs(n);
    std::iota(by_abs.begin(), by_abs.end(), std::size_t{0});
    std::stable_sort(by_abs.begin(), by_abs.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });
    std::vector<double> rank(n);
    std::vector<std::size_t> tie_sizes;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[by_abs[j]]) == std::abs(diffs[by_abs[i]])) ++j;
        const double avg = static_cast<double>(i + 1 + j) / 2.0;
        for (std::size_t k = i; k < j; ++k) rank[by_abs[k]] = avg;
        tie_sizes.push_back(j - i);
        i = j;
    }

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) (diffs[i] > 0.0 ? w_plus : w_minus) += rank[i];

    if (n <= 20) {
        // Doubled ranks stay integral under .5 tie averages; count sign
        // assignments whose positive-rank sum is at most the observed
        // smaller side, then double for the two-sided value.
        std::vector<std::int64_t> r2(n);
        std::int64_t total2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            r2[i] = std::llround(2.0 * rank[i]);
            total2 += r2[i];
        }
        const std::int64_t w2 = std::llround(2.0 * std::min(w_plus, w_minus));
        std::vector<std::uint64_t> ways(static_cast<std::size_t>(total2) + 1, 0);
        ways[0] = 1;
        for (std::int64_t r : r2)
            for (std::int64_t s = total2; s >= r; --s)
                ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r)];
        std::uint64_t count = 0;
        for (std::int64_t s = 0; s <= w2; ++s) count += ways[static_cast<std::size_t>(s)];
        const double p = 2.0 * static_cast<double>(count) /
                         std::pow(2.0, static_cast<double>(n));
        return std::min(p, 1.0);
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    for (std::size_t t : tie_sizes) {
        const double tt = static_cast<double>(t);
        var -= (tt * tt * tt - tt) / 48.0;
    }
    const double z = std::max(0.0, std::abs(w_plus - mean) - 0.5) / std::sqrt(var);
    return std::min(1.0, 2.0 * normal_sf(z));
}

} // namespace lfgnn
