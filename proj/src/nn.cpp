#include "lfgnn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "lfgnn/errors.hpp"

namespace lfgnn {
namespace {

Matrix uniform_init(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = bound * (2.0 * rng.next_double() - 1.0);
    return m;
}

double relu(double v) { return v > 0.0 ? v : 0.0; }
double relu_grad(double pre) { return pre > 0.0 ? 1.0 : 0.0; }

} // namespace

std::vector<double> softmax_vec(const std::vector<double>& logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> s(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        s[i] = std::exp(logits[i] - top);
        sum += s[i];
    }
    for (double& v : s) v /= sum;
    return s;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix s(logits.rows, logits.cols);
    std::vector<double> row(logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        for (std::size_t j = 0; j < logits.cols; ++j) row[j] = logits(i, j);
        const std::vector<double> sr = softmax_vec(row);
        for (std::size_t j = 0; j < logits.cols; ++j) s(i, j) = sr[j];
    }
    return s;
}

std::vector<double> softmax_vec_backward(const std::vector<double>& s,
                                         const std::vector<double>& ds) {
    double dot = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) dot += s[i] * ds[i];
    std::vector<double> dl(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) dl[i] = s[i] * (ds[i] - dot);
    return dl;
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng)
    : w(uniform_init(out, in, 1.0 / std::sqrt(static_cast<double>(in)), rng)),
      b(1, out),
      gw(out, in),
      gb(1, out) {}

std::vector<double> Linear::forward(const std::vector<double>& x) {
    if (x.size() != w.cols) throw ShapeError("linear input size mismatch");
    x_ = x;
    std::vector<double> y(w.rows);
    for (std::size_t i = 0; i < w.rows; ++i) {
        double acc = b(0, i);
        for (std::size_t j = 0; j < w.cols; ++j) acc += w(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

std::vector<double> Linear::backward(const std::vector<double>& dy) {
    if (dy.size() != w.rows) throw ShapeError("linear grad size mismatch");
    std::vector<double> dx(w.cols, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
        gb(0, i) += dy[i];
        for (std::size_t j = 0; j < w.cols; ++j) {
            gw(i, j) += dy[i] * x_[j];
            dx[j] += w(i, j) * dy[i];
        }
    }
    return dx;
}

void Linear::zero_grad() {
    std::fill(gw.data.begin(), gw.data.end(), 0.0);
    std::fill(gb.data.begin(), gb.data.end(), 0.0);
}

void Linear::collect(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
}

DConv::DConv(std::size_t in, std::size_t out, std::size_t k, Activation act_, Rng& rng)
    : in_dim(in), out_dim(out), order(k), act(act_) {
    if (k == 0) throw ShapeError("diffusion order must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t i = 0; i < k; ++i) {
        th_fwd.push_back(uniform_init(in, out, bound, rng));
        th_bwd.push_back(uniform_init(in, out, bound, rng));
        g_fwd.emplace_back(in, out);
        g_bwd.emplace_back(in, out);
    }
}

Matrix DConv::forward(const Matrix& x, const Matrix& p_fwd, const Matrix& p_bwd) {
    if (x.cols != in_dim) throw ShapeError("dconv feature size mismatch");
    vf_.assign(1, x);
    vb_.assign(1, x);
    for (std::size_t k = 1; k < order; ++k) {
        vf_.push_back(matmul(p_fwd, vf_.back()));
        vb_.push_back(matmul(p_bwd, vb_.back()));
    }
    pre_ = Matrix(x.rows, out_dim);
    for (std::size_t k = 0; k < order; ++k) {
        const Matrix tf = matmul(vf_[k], th_fwd[k]);
        const Matrix tb = matmul(vb_[k], th_bwd[k]);
        for (std::size_t i = 0; i < pre_.data.size(); ++i)
            pre_.data[i] += tf.data[i] + tb.data[i];
    }
    pt_fwd_ = transpose(p_fwd);
    pt_bwd_ = transpose(p_bwd);
    if (act == Activation::identity) return pre_;
    Matrix out = pre_;
    for (double& v : out.data) v = relu(v);
    return out;
}

Matrix DConv::backward(const Matrix& d_out) {
    Matrix ds = d_out;
    if (act == Activation::relu) {
        for (std::size_t i = 0; i < ds.data.size(); ++i)
            ds.data[i] *= relu_grad(pre_.data[i]);
    }
    for (std::size_t k = 0; k < order; ++k) {
        const Matrix gf = matmul(transpose(vf_[k]), ds);
        const Matrix gb = matmul(transpose(vb_[k]), ds);
        for (std::size_t i = 0; i < gf.data.size(); ++i) {
            g_fwd[k].data[i] += gf.data[i];
            g_bwd[k].data[i] += gb.data[i];
        }
    }
    // dX = sum_k (P^T)^k dS Th_k^T, evaluated as a Horner recurrence. The
    // transitions are treated as constants: no gradient flows into P.
    Matrix hf = matmul(ds, transpose(th_fwd[order - 1]));
    Matrix hb = matmul(ds, transpose(th_bwd[order - 1]));
    for (std::size_t k = order - 1; k-- > 0;) {
        hf = matmul(pt_fwd_, hf);
        hb = matmul(pt_bwd_, hb);
        const Matrix gf = matmul(ds, transpose(th_fwd[k]));
        const Matrix gb = matmul(ds, transpose(th_bwd[k]));
        for (std::size_t i = 0; i < hf.data.size(); ++i) {
            hf.data[i] += gf.data[i];
            hb.data[i] += gb.data[i];
        }
    }
    for (std::size_t i = 0; i < hf.data.size(); ++i) hf.data[i] += hb.data[i];
    return hf;
}

void DConv::zero_grad() {
    for (Matrix& g : g_fwd) std::fill(g.data.begin(), g.data.end(), 0.0);
    for (Matrix& g : g_bwd) std::fill(g.data.begin(), g.data.end(), 0.0);
}

void DConv::collect(std::vector<ParamRef>& out, const std::string& prefix) {
    for (std::size_t k = 0; k < order; ++k) {
        out.push_back({prefix + ".fwd" + std::to_string(k), &th_fwd[k], &g_fwd[k]});
        out.push_back({prefix + ".bwd" + std::to_string(k), &th_bwd[k], &g_bwd[k]});
    }
}

DiffPool::DiffPool(std::size_t in, std::size_t out, std::size_t m, Rng& rng,
                   std::size_t pool_order, std::size_t embed_order)
    : pool(in, m, pool_order, Activation::identity, rng),
      embed(in, out, embed_order, Activation::relu, rng) {}

DiffPool::Out DiffPool::forward(const Matrix& x, const Matrix& adjacency,
                                const Matrix& p_fwd, const Matrix& p_bwd) {
    s_ = softmax_rows(pool.forward(x, p_fwd, p_bwd));
    z_ = embed.forward(x, p_fwd, p_bwd);
    Out out;
    const Matrix st = transpose(s_);
    out.x = matmul(st, z_);
    out.a = matmul(st, matmul(adjacency, s_));
    return out;
}

Matrix DiffPool::backward(const Matrix& d_x) {
    const Matrix dz = matmul(s_, d_x);
    Matrix ds = matmul(z_, transpose(d_x));
    if (entropy_weight != 0.0) {
        const double scale = entropy_weight / static_cast<double>(s_.rows);
        for (std::size_t i = 0; i < ds.data.size(); ++i)
            ds.data[i] -= scale * (std::log(s_.data[i]) + 1.0);
    }
    Matrix dl(s_.rows, s_.cols);
    std::vector<double> srow(s_.cols), dsrow(s_.cols);
    for (std::size_t i = 0; i < s_.rows; ++i) {
        for (std::size_t j = 0; j < s_.cols; ++j) {
            srow[j] = s_(i, j);
            dsrow[j] = ds(i, j);
        }
        const std::vector<double> dlr = softmax_vec_backward(srow, dsrow);
        for (std::size_t j = 0; j < s_.cols; ++j) dl(i, j) = dlr[j];
    }
    Matrix dx = pool.backward(dl);
    const Matrix dxe = embed.backward(dz);
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dxe.data[i];
    return dx;
}

double DiffPool::entropy_loss() const {
    double acc = 0.0;
    for (double v : s_.data) acc -= v * std::log(v);
    return acc / static_cast<double>(s_.rows);
}

void DiffPool::zero_grad() {
    pool.zero_grad();
    embed.zero_grad();
}

void DiffPool::collect(std::vector<ParamRef>& out, const std::string& prefix) {
    pool.collect(out, prefix + ".pool");
    embed.collect(out, prefix + ".embed");
}

AttentionPool::AttentionPool(std::vector<std::pair<std::size_t, std::size_t>> region_extents,
                             Rng& rng)
    : extents(std::move(region_extents)) {
    for (const auto& [begin, end] : extents) {
        if (end <= begin) throw ShapeError("empty region extent");
        const std::size_t c = end - begin;
        fc1.emplace_back(c, c, rng);
        fc2.emplace_back(c, c, rng);
    }
}

Matrix AttentionPool::forward(const Matrix& x) {
    x_ = x;
    w_.assign(extents.size(), {});
    h_pre_.assign(extents.size(), {});
    Matrix out(extents.size(), x.cols);
    for (std::size_t r = 0; r < extents.size(); ++r) {
        const auto [begin, end] = extents[r];
        if (end > x.rows) throw ShapeError("region extent outside node range");
        const std::size_t c = end - begin;
        std::vector<double> summary(c, 0.0);
        for (std::size_t i = 0; i < c; ++i) {
            for (std::size_t j = 0; j < x.cols; ++j) summary[i] += x(begin + i, j);
            summary[i] /= static_cast<double>(x.cols);
        }
        h_pre_[r] = fc1[r].forward(summary);
        std::vector<double> h(c);
        for (std::size_t i = 0; i < c; ++i) h[i] = relu(h_pre_[r][i]);
        w_[r] = softmax_vec(fc2[r].forward(h));
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = 0; j < x.cols; ++j)
                out(r, j) += w_[r][i] * x(begin + i, j);
    }
    return out;
}

Matrix AttentionPool::backward(const Matrix& d_out) {
    Matrix dx(x_.rows, x_.cols);
    for (std::size_t r = 0; r < extents.size(); ++r) {
        const auto [begin, end] = extents[r];
        const std::size_t c = end - begin;
        std::vector<double> dw(c, 0.0);
        for (std::size_t i = 0; i < c; ++i) {
            for (std::size_t j = 0; j < x_.cols; ++j) {
                dx(begin + i, j) += w_[r][i] * d_out(r, j);
                dw[i] += x_(begin + i, j) * d_out(r, j);
            }
        }
        std::vector<double> dh = fc2[r].backward(softmax_vec_backward(w_[r], dw));
        for (std::size_t i = 0; i < c; ++i) dh[i] *= relu_grad(h_pre_[r][i]);
        const std::vector<double> dsum = fc1[r].backward(dh);
        // The summary is the feature-axis mean, so its gradient spreads
        // uniformly back over the features of each channel row.
        const double inv = 1.0 / static_cast<double>(x_.cols);
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = 0; j < x_.cols; ++j)
                dx(begin + i, j) += dsum[i] * inv;
    }
    return dx;
}

void AttentionPool::zero_grad() {
    for (Linear& l : fc1) l.zero_grad();
    for (Linear& l : fc2) l.zero_grad();
}

void AttentionPool::collect(std::vector<ParamRef>& out, const std::string& prefix) {
    for (std::size_t r = 0; r < extents.size(); ++r) {
        fc1[r].collect(out, prefix + ".r" + std::to_string(r) + ".fc1");
        fc2[r].collect(out, prefix + ".r" + std::to_string(r) + ".fc2");
    }
}

GatedFusion::GatedFusion(std::size_t summary_dim, std::size_t gate_hidden, std::size_t regions,
                         std::size_t branch_dim, std::size_t hidden_dim, Rng& rng)
    : gate1(summary_dim, gate_hidden, rng),
      gate2(gate_hidden, regions, rng),
      proj(regions * branch_dim, hidden_dim, rng),
      regions_(regions),
      branch_dim_(branch_dim) {}

std::vector<double> GatedFusion::forward(const Matrix& z_global, const Matrix& z_local,
                                         const std::vector<double>& x0_summary) {
    if (z_global.rows != regions_ || z_local.rows != regions_ ||
        z_global.cols != branch_dim_ || z_local.cols != branch_dim_)
        throw ShapeError("fusion branch shape mismatch");
    zg_ = z_global;
    zl_ = z_local;
    h_pre_ = gate1.forward(x0_summary);
    std::vector<double> h(h_pre_.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = relu(h_pre_[i]);
    const std::vector<double> u = gate2.forward(h);
    g_.resize(regions_);
    for (std::size_t i = 0; i < regions_; ++i) g_[i] = 1.0 / (1.0 + std::exp(-u[i]));
    std::vector<double> flat(regions_ * branch_dim_);
    for (std::size_t i = 0; i < regions_; ++i)
        for (std::size_t j = 0; j < branch_dim_; ++j)
            flat[i * branch_dim_ + j] = g_[i] * zg_(i, j) + (1.0 - g_[i]) * zl_(i, j);
    return proj.forward(flat);
}

GatedFusion::Back GatedFusion::backward(const std::vector<double>& dz) {
    const std::vector<double> dflat = proj.backward(dz);
    Back back{Matrix(regions_, branch_dim_), Matrix(regions_, branch_dim_), {}};
    std::vector<double> du(regions_);
    for (std::size_t i = 0; i < regions_; ++i) {
        double dg = 0.0;
        for (std::size_t j = 0; j < branch_dim_; ++j) {
            const double df = dflat[i * branch_dim_ + j];
            back.d_global(i, j) = g_[i] * df;
            back.d_local(i, j) = (1.0 - g_[i]) * df;
            dg += df * (zg_(i, j) - zl_(i, j));
        }
        du[i] = dg * g_[i] * (1.0 - g_[i]);
    }
    std::vector<double> dh = gate2.backward(du);
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= relu_grad(h_pre_[i]);
    back.d_summary = gate1.backward(dh);
    return back;
}

void GatedFusion::zero_grad() {
    gate1.zero_grad();
    gate2.zero_grad();
    proj.zero_grad();
}

void GatedFusion::collect(std::vector<ParamRef>& out, const std::string& prefix) {
    gate1.collect(out, prefix + ".gate1");
    gate2.collect(out, prefix + ".gate2");
    proj.collect(out, prefix + ".proj");
}

std::vector<double> Dropout::forward(const std::vector<double>& x, bool train, Rng& rng) {
    mask_.assign(x.size(), 1.0);
    if (!train || rate <= 0.0) return x;
    const double keep = 1.0 - rate;
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask_[i] = rng.next_double() < rate ? 0.0 : 1.0 / keep;
        y[i] = x[i] * mask_[i];
    }
    return y;
}

std::vector<double> Dropout::backward(const std::vector<double>& dy) const {
    std::vector<double> dx(dy.size());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask_[i];
    return dx;
}

Classifier::Classifier(std::size_t in, std::size_t hidden, std::size_t classes,
                       double dropout_rate, Rng& rng)
    : fc1(in, hidden, rng), fc2(hidden, classes, rng) {
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ShapeError("dropout rate must lie in [0, 1)");
    drop.rate = dropout_rate;
}

std::vector<double> Classifier::forward(const std::vector<double>& z, bool train,
                                        std::uint64_t seed) {
    h_pre_ = fc1.forward(z);
    std::vector<double> h(h_pre_.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = relu(h_pre_[i]);
    Rng rng(seed);
    return fc2.forward(drop.forward(h, train, rng));
}

std::vector<double> Classifier::backward(const std::vector<double>& d_logits) {
    std::vector<double> dh = drop.backward(fc2.backward(d_logits));
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= relu_grad(h_pre_[i]);
    return fc1.backward(dh);
}

void Classifier::zero_grad() {
    fc1.zero_grad();
    fc2.zero_grad();
}

void Classifier::collect(std::vector<ParamRef>& out, const std::string& prefix) {
    fc1.collect(out, prefix + ".fc1");
    fc2.collect(out, prefix + ".fc2");
}

LossGrad cross_entropy(const std::vector<double>& logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw ShapeError("label outside logit range");
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - top);
    const double log_z = top + std::log(sum);
    LossGrad out;
    out.loss = log_z - logits[static_cast<std::size_t>(label)];
    out.grad.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out.grad[i] = std::exp(logits[i] - log_z);
        if (i == static_cast<std::size_t>(label)) out.grad[i] -= 1.0;
    }
    return out;
}

GradReport grad_check(const GradCheckTarget& target, double h) {
    target.grads();
    GradReport report;
    for (const ParamRef& p : target.params) {
        for (std::size_t i = 0; i < p.value->data.size(); ++i) {
            const double saved = p.value->data[i];
            p.value->data[i] = saved + h;
            const double up = target.loss();
            p.value->data[i] = saved - h;
            const double down = target.loss();
            p.value->data[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = p.grad->data[i];
            const double rel = std::abs(analytic - numeric) /
                               std::max({1.0, std::abs(analytic), std::abs(numeric)});
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p.name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return report;
}

} // namespace lfgnn
