#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lfgnn/errors.hpp"

namespace lfgnn {

// Dense row-major matrix of 64-bit reals. Small sizes only (channel counts,
// layer widths), so no blocking or expression machinery.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool empty() const { return data.empty(); }
    bool square() const { return rows == cols; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data) {
            const double a = v < 0 ? -v : v;
            if (a > m) m = a;
        }
        return m;
    }
};

Matrix transpose(const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);

// n channels sampled at a common fixed rate; channels[i] has one value per
// sample. The unit of every flow estimate downstream is nats per second with
// dt = 1/rate.
struct TimeSeriesSet {
    std::vector<std::string> labels;
    double rate = 1.0;
    std::vector<std::vector<double>> channels;

    std::size_t channel_count() const { return channels.size(); }
    std::size_t sample_count() const { return channels.empty() ? 0 : channels[0].size(); }
    double dt() const { return 1.0 / rate; }

    void validate() const;

    // New set containing the given channels, in the given order.
    TimeSeriesSet select(const std::vector<std::size_t>& idx) const;
};

// Forward differences (x[t+step] - x[t]) / (step * dt), one sequence per
// channel, each shorter than the source by `step`.
struct DifferenceSeries {
    std::vector<std::vector<double>> values;
    double dt = 1.0;
};

// LU factorization with partial pivoting. Shared by determinant and
// solve_linear and reused where one factorization serves many right-hand
// sides. A pivot below 1e-12 times the largest absolute entry of the input
// marks the matrix numerically singular.
class LuFactor {
public:
    static constexpr double kRelativePivotFloor = 1e-12;

    explicit LuFactor(const Matrix& m);

    bool singular() const { return singular_; }
    double det() const;

    // Throws SingularMatrix when the factorization flagged a tiny pivot.
    std::vector<double> solve(const std::vector<double>& b) const;

    // Overwrites `x` with the solution; avoids allocation in hot loops.
    void solve_in_place(std::vector<double>& x) const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    int sign_ = 1;
    bool singular_ = false;
};

enum class CovNormalization { unbiased, population };

// Sample covariance of the columns of a samples-by-variables matrix.
// Computed symmetrically so the result is symmetric to the last bit.
Matrix covariance(const Matrix& samples_by_vars,
                  CovNormalization norm = CovNormalization::unbiased);

double determinant(const Matrix& m);

std::vector<double> solve_linear(const Matrix& m, const std::vector<double>& b);

DifferenceSeries first_difference(const TimeSeriesSet& x, std::size_t step = 1);

// Gershgorin lower bound on the smallest eigenvalue of a symmetric matrix:
// min_i (a_ii - sum_{j != i} |a_ij|).
double gershgorin_min_bound(const Matrix& m);

} // namespace lfgnn
