#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lfgnn/numerics.hpp"
#include "lfgnn/rng.hpp"

namespace lfgnn {

// Every layer keeps its parameters and gradient buffers as matrices and
// caches the last forward activations; backward must follow the forward it
// differentiates. Gradients accumulate until zero_grad so batches sum
// sample gradients in a fixed order.

enum class Activation { identity, relu };

struct ParamRef {
    std::string name;
    Matrix* value;
    Matrix* grad;
};

std::vector<double> softmax_vec(const std::vector<double>& logits);
Matrix softmax_rows(const Matrix& logits);
// dL/dlogits from dL/ds where s = softmax(logits).
std::vector<double> softmax_vec_backward(const std::vector<double>& s,
                                         const std::vector<double>& ds);

struct Linear {
    Matrix w; // out x in
    Matrix b; // 1 x out
    Matrix gw;
    Matrix gb;

    Linear(std::size_t in, std::size_t out, Rng& rng);

    std::vector<double> forward(const std::vector<double>& x);
    std::vector<double> backward(const std::vector<double>& dy);

    void zero_grad();
    void collect(std::vector<ParamRef>& out, const std::string& prefix);

private:
    std::vector<double> x_;
};

// Diffusion convolution over a directed graph:
//   X' = act( sum_{k=0}^{K-1} P_fwd^k X Th_fwd[k] + P_bwd^k X Th_bwd[k] )
// The k=0 power is the identity, so K=1 ignores the graph entirely. No bias.
struct DConv {
    std::size_t in_dim, out_dim, order;
    Activation act;
    std::vector<Matrix> th_fwd, th_bwd; // K matrices, in x out
    std::vector<Matrix> g_fwd, g_bwd;

    DConv(std::size_t in, std::size_t out, std::size_t k, Activation act, Rng& rng);

    Matrix forward(const Matrix& x, const Matrix& p_fwd, const Matrix& p_bwd);
    Matrix backward(const Matrix& d_out); // returns dX

    void zero_grad();
    void collect(std::vector<ParamRef>& out, const std::string& prefix);

private:
    std::vector<Matrix> vf_, vb_; // cached diffusion powers applied to X
    Matrix pre_;                  // pre-activation
    Matrix pt_fwd_, pt_bwd_;      // cached transposed transitions
};

// Soft hierarchical pooling: S = softmax_rows(pool(X)), Z = embed(X),
// X' = S^T Z, A' = S^T A S. A' is computed for completeness; backward
// propagates through X' only. Optional assignment-entropy regularizer.
struct DiffPool {
    DConv pool;  // in -> m logits, identity activation
    DConv embed; // in -> out, relu
    double entropy_weight = 0.0;

    DiffPool(std::size_t in, std::size_t out, std::size_t m, Rng& rng,
             std::size_t pool_order = 1, std::size_t embed_order = 1);

    struct Out {
        Matrix x; // m x out
        Matrix a; // m x m
    };
    Out forward(const Matrix& x, const Matrix& adjacency, const Matrix& p_fwd,
                const Matrix& p_bwd);
    Matrix backward(const Matrix& d_x); // returns dX

    const Matrix& assignment() const { return s_; }
    // Mean per-node assignment entropy of the last forward (>= 0).
    double entropy_loss() const;

    void zero_grad();
    void collect(std::vector<ParamRef>& out, const std::string& prefix);

private:
    Matrix s_; // n x m
    Matrix z_; // n x out
};

// Squeeze-and-excitation pooling per contiguous region block: the region
// summary is the feature-axis mean (one value per channel), a per-region MLP
// maps it to channel logits, and the softmax weights combine channel rows.
struct AttentionPool {
    std::vector<std::pair<std::size_t, std::size_t>> extents;
    std::vector<Linear> fc1, fc2;

    AttentionPool(std::vector<std::pair<std::size_t, std::size_t>> region_extents, Rng& rng);

    Matrix forward(const Matrix& x);        // n x d -> regions x d
    Matrix backward(const Matrix& d_out);   // returns dX

    // Per-region softmax weights of the last forward, for attention export.
    const std::vector<std::vector<double>>& weights() const { return w_; }

    void zero_grad();
    void collect(std::vector<ParamRef>& out, const std::string& prefix);

private:
    Matrix x_;
    std::vector<std::vector<double>> w_;
    std::vector<std::vector<double>> h_pre_; // fc1 pre-activations
};

// g = sigmoid(MLP(x0_summary)) weighs the global branch against the local
// branch per abstract node; the fused matrix is flattened row-major and
// projected to the hidden representation.
struct GatedFusion {
    Linear gate1; // summary_dim -> gate_hidden
    Linear gate2; // gate_hidden -> regions
    Linear proj;  // regions*branch_dim -> hidden_dim

    GatedFusion(std::size_t summary_dim, std::size_t gate_hidden, std::size_t regions,
                std::size_t branch_dim, std::size_t hidden_dim, Rng& rng);

    std::vector<double> forward(const Matrix& z_global, const Matrix& z_local,
                                const std::vector<double>& x0_summary);

    struct Back {
        Matrix d_global;
        Matrix d_local;
        std::vector<double> d_summary;
    };
    Back backward(const std::vector<double>& dz);

    const std::vector<double>& gates() const { return g_; }

    void zero_grad();
    void collect(std::vector<ParamRef>& out, const std::string& prefix);

private:
    std::size_t regions_, branch_dim_;
    Matrix zg_, zl_;
    std::vector<double> g_, h_pre_;
};

struct Dropout {
    double rate = 0.0;

    std::vector<double> forward(const std::vector<double>& x, bool train, Rng& rng);
    std::vector<double> backward(const std::vector<double>& dy) const;

private:
    std::vector<double> mask_;
};

// linear -> ReLU -> dropout -> linear -> logits. Dropout uses the inverted
// convention and is active only in train mode; the mask derives from the
// seed passed to forward, so a fixed seed fixes the mask.
struct Classifier {
    Linear fc1;
    Dropout drop;
    Linear fc2;

    Classifier(std::size_t in, std::size_t hidden, std::size_t classes, double dropout_rate,
               Rng& rng);

    std::vector<double> forward(const std::vector<double>& z, bool train, std::uint64_t seed);
    std::vector<double> backward(const std::vector<double>& d_logits);

    void zero_grad();
    void collect(std::vector<ParamRef>& out, const std::string& prefix);

private:
    std::vector<double> h_pre_;
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};
// Softmax cross-entropy over two logits; grad = softmax - one_hot(label).
LossGrad cross_entropy(const std::vector<double>& logits, int label);

// Central-difference check of analytic gradients. `loss` runs a pure forward
// pass; `grads` zeroes buffers then runs forward+backward filling them.
struct GradCheckTarget {
    std::function<double()> loss;
    std::function<void()> grads;
    std::vector<ParamRef> params;
};
struct GradReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    bool pass(double tol) const { return max_rel_error < tol; }
};
GradReport grad_check(const GradCheckTarget& target, double h = 1e-5);

} // namespace lfgnn
