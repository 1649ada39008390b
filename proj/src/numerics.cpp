#include "lfgnn/numerics.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

namespace lfgnn {

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                         " times " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            double* crow = &c.data[i * c.cols];
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

void TimeSeriesSet::validate() const {
    if (rate <= 0.0) throw ShapeError("time series rate must be positive");
    if (channels.empty()) throw ShapeError("time series has no channels");
    const std::size_t len = channels[0].size();
    for (const auto& ch : channels)
        if (ch.size() != len) throw ShapeError("channels have unequal lengths");
    if (!labels.empty() && labels.size() != channels.size())
        throw ShapeError("label count does not match channel count");
}

TimeSeriesSet TimeSeriesSet::select(const std::vector<std::size_t>& idx) const {
    TimeSeriesSet out;
    out.rate = rate;
    out.channels.reserve(idx.size());
    if (!labels.empty()) out.labels.reserve(idx.size());
    for (std::size_t i : idx) {
        if (i >= channels.size()) throw ShapeError("channel index out of range");
        out.channels.push_back(channels[i]);
        if (!labels.empty()) out.labels.push_back(labels[i]);
    }
    return out;
}

LuFactor::LuFactor(const Matrix& m) {
    if (!m.square()) throw ShapeError("LU factorization needs a square matrix");
    const std::size_t n = m.rows;
    lu_ = m;
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    const double floor = kRelativePivotFloor * m.max_abs();

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double a = std::abs(lu_(i, k));
            if (a > best) {
                best = a;
                piv = i;
            }
        }
        if (best <= floor) {
            singular_ = true;
            return;
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
            std::swap(perm_[k], perm_[piv]);
            sign_ = -sign_;
        }
        const double pivot = lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu_(i, k) / pivot;
            lu_(i, k) = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
        }
    }
}

double LuFactor::det() const {
    if (singular_) return 0.0;
    double d = static_cast<double>(sign_);
    for (std::size_t i = 0; i < lu_.rows; ++i) d *= lu_(i, i);
    return d;
}

std::vector<double> LuFactor::solve(const std::vector<double>& b) const {
    if (b.size() != lu_.rows) throw ShapeError("solve: right-hand side length mismatch");
    std::vector<double> x(b);
    solve_in_place(x);
    return x;
}

void LuFactor::solve_in_place(std::vector<double>& x) const {
    if (singular_) throw SingularMatrix("matrix is numerically singular");
    const std::size_t n = lu_.rows;
    if (x.size() != n) throw ShapeError("solve: right-hand side length mismatch");

    // Apply the row permutation, then forward and back substitution.
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
        double s = y[i];
        for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
        y[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * y[j];
        y[ii] = s / lu_(ii, ii);
    }
    x = std::move(y);
}

Matrix covariance(const Matrix& samples_by_vars, CovNormalization norm) {
    const std::size_t n = samples_by_vars.rows;
    const std::size_t d = samples_by_vars.cols;
    if (n < 2) throw InsufficientData("covariance needs at least two samples");

    std::vector<double> mean(d, 0.0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t j = 0; j < d; ++j) mean[j] += samples_by_vars(t, j);
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);

    Matrix cov(d, d);
    const double denom =
        norm == CovNormalization::unbiased ? static_cast<double>(n - 1) : static_cast<double>(n);
    // Upper triangle only, then mirror: symmetry holds to the last bit.
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t)
                s += (samples_by_vars(t, i) - mean[i]) * (samples_by_vars(t, j) - mean[j]);
            const double v = s / denom;
            cov(i, j) = v;
            cov(j, i) = v;
        }
    }
    return cov;
}

double determinant(const Matrix& m) { return LuFactor(m).det(); }

std::vector<double> solve_linear(const Matrix& m, const std::vector<double>& b) {
    return LuFactor(m).solve(b);
}

DifferenceSeries first_difference(const TimeSeriesSet& x, std::size_t step) {
    x.validate();
    if (step == 0) throw ShapeError("difference step must be positive");
    const std::size_t len = x.sample_count();
    if (len <= step) throw InsufficientData("series too short for the difference step");

    DifferenceSeries out;
    out.dt = x.dt();
    const double scale = 1.0 / (static_cast<double>(step) * out.dt);
    out.values.resize(x.channel_count());
    for (std::size_t c = 0; c < x.channel_count(); ++c) {
        const auto& src = x.channels[c];
        auto& dst = out.values[c];
        dst.resize(len - step);
        for (std::size_t t = 0; t + step < len; ++t) dst[t] = (src[t + step] - src[t]) * scale;
    }
    return out;
}

double gershgorin_min_bound(const Matrix& m) {
    if (!m.square()) throw ShapeError("Gershgorin bound needs a square matrix");
    double bound = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        double radius = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j)
            if (j != i) radius += std::abs(m(i, j));
        const double lo = m(i, i) - radius;
        if (i == 0 || lo < bound) bound = lo;
    }
    return bound;
}

} // namespace lfgnn
