#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfgnn/model.hpp"
#include "lfgnn/nn.hpp"
#include "lfgnn/numerics.hpp"

namespace lfgnn {

// Field defaults follow the full evaluation protocol; desk() shrinks folds
// and epochs to something that runs in minutes on a laptop.
struct TrainConfig {
    std::size_t outer_folds = 10;
    std::size_t inner_folds = 3;
    double stage1_lr = 1e-3;
    std::size_t stage1_epochs = 200;
    double stage2_lr = 1e-4;
    std::size_t stage2_epochs = 20;
    std::size_t batch = 64;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    int jobs = 1;

    static TrainConfig desk();
    void validate() const; // ConfigError on violation
};

struct AdamState {
    std::vector<Matrix> m, v;
    std::size_t t = 0;
};
// Bias-corrected Adam over the referenced parameters using their accumulated
// gradients. Moments are allocated on first use and must stay parallel to
// `params` afterwards. lr = 0 leaves parameters unchanged but still decays
// the moments.
void adam_step(const std::vector<ParamRef>& params, AdamState& state, double lr,
               const TrainConfig& cfg);

struct TrainCurves {
    std::vector<double> stage1_loss;    // mean sample loss per epoch
    std::vector<double> stage1_val_acc; // after each epoch
    std::vector<double> stage2_loss;
    std::size_t best_epoch = 0; // 1-based; earliest epoch wins ties
    double best_val_acc = 0.0;
};
// Stage 1 trains on `train` at stage1_lr, snapshotting parameters whenever
// validation accuracy strictly improves; the best snapshot is restored and
// stage 2 fine-tunes it on train+val at stage2_lr with fresh optimizer
// moments.
TrainCurves train_two_stage(Model& model, const std::vector<FeatureGraphSample>& train,
                            const std::vector<FeatureGraphSample>& val,
                            const TrainConfig& cfg);
std::string curves_csv(const TrainCurves& curves);

struct EvalResult {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    Matrix confusion; // confusion(i, j) = count of label i predicted j
};
EvalResult evaluate(Model& model, const std::vector<FeatureGraphSample>& test);
// Metric arithmetic on a precomputed confusion matrix; zero-denominator
// precision/recall/F1 terms count as 0 in the macro average.
EvalResult metrics_from_confusion(const Matrix& confusion);

// Windows grouped by trial, trials dealt round-robin per class so no trial
// straddles folds, fold sizes differ by at most one trial, and every fold
// sees both classes (StratificationError otherwise). Windows of one trial
// must agree on the label.
struct TrialFolds {
    std::vector<std::vector<std::uint64_t>> trials;
    std::vector<std::vector<std::size_t>> samples; // indices into the dataset
};
TrialFolds stratified_trial_folds(const std::vector<FeatureGraphSample>& dataset,
                                  std::size_t folds, std::uint64_t seed);
// The outer split nested_cv derives from cfg; exposed so callers can line
// artifacts up with fold test sets.
TrialFolds outer_folds_of(const std::vector<FeatureGraphSample>& dataset, const TrainConfig& cfg);

struct FoldMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    Matrix confusion;
};
struct MetricsReport {
    std::vector<FoldMetrics> folds;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_f1 = 0.0;
    double std_f1 = 0.0;
    double comparison_p = -1.0; // < 0 when no paired comparison ran

    std::string to_json() const;
};

// Outer stratified trial-grouped CV; per outer fold, each inner fold trains
// a candidate (derived init and shuffle seeds) and the best stage-1
// validation accuracy picks the candidate evaluated on the held-out fold.
// Fold results are independent of cfg.jobs; aggregation order is fixed.
// fold_models, when given, receives the selected model of every fold.
MetricsReport nested_cv(const std::vector<FeatureGraphSample>& dataset,
                        const ModelConfig& model_cfg, const TrainConfig& cfg,
                        std::vector<Model>* fold_models = nullptr);

// Two-sided paired Wilcoxon signed-rank test. Zero differences are dropped
// (DegenerateTest when all are); ties share average ranks. Exact null
// enumeration up to 20 informative pairs, normal approximation with
// continuity correction beyond.
double wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

} // namespace lfgnn
