#pragma once

#include <cstdint>
#include <vector>

#include "lfgnn/numerics.hpp"

namespace lfgnn {

// Directed matrices throughout use (row, col) = (source, target): flow(j, i)
// is the rate from channel j into channel i, in nats per second.
struct FlowDecomposition {
    Matrix flow;                    // T_{j->i}, diagonal 0
    std::vector<double> self_rate;  // per-target fitted self coefficient
    std::vector<double> noise_rate; // per-target residual-variance rate
    Matrix tau;                     // normalized flow, |tau| <= 1, diagonal 0
    Matrix p_values;                // bootstrap p-values, diagonal 1
};

struct SignificanceConfig {
    double alpha = 0.01;
    std::size_t surrogate_count = 1000;
    std::size_t block_length = 0; // 0 = derive as max(1, rate/2) samples
    std::uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
    std::size_t resolved_block_length(double rate) const;
};

// Linear information-flow estimator. Rates of change are forward differences
// scaled by dt; the series is truncated to the first T-1 samples so both
// factors align. Fills flow, self_rate, noise_rate.
FlowDecomposition estimate_information_flow(const TimeSeriesSet& x);

// Cofactor-expansion solution of C a = c. Slow (minor determinants); kept as
// an independent route for cross-checking the LU path.
std::vector<double> cramer_coefficients(const Matrix& c_matrix, const std::vector<double>& rhs);

// Fills tau: tau_{j->i} = flow_{j->i} / Z_i with
// Z_i = |self_rate_i| + sum_{j != i} |flow_{j->i}| + |noise_rate_i|.
// Z_i = 0 yields a zero column. |tau| <= 1 holds exactly and is enforced.
FlowDecomposition normalize_flow(FlowDecomposition f);

// Block-bootstrap test per directed pair: surrogates of the source channel
// only, preserving its autocorrelation while destroying cross-channel
// coupling. The surrogate statistic re-estimates the regression coefficient
// against the surrogate design but keeps the observed C_ij/C_ii scale, so the
// comparison stays calibrated when channels are correlated without causation.
// p = (1 + #{|T_s| >= |T_obs|}) / (1 + surrogate_count).
// Deterministic given cfg.seed, independent of cfg.jobs.
FlowDecomposition significance_test(const TimeSeriesSet& x, FlowDecomposition f,
                                    const SignificanceConfig& cfg);

struct GrangerResult {
    Matrix f_stat;   // (source, target), diagonal 0
    Matrix p_values; // diagonal 1
};

// Pairwise Granger: restricted AR(order) on the target vs the same model
// augmented with `order` lags of the source, F-tested.
GrangerResult granger_causality(const TimeSeriesSet& x, std::size_t order = 5);

} // namespace lfgnn
