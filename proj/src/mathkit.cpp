#include "vos/mathkit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vos {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngState::next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * kGamma);
}

double RngState::next_uniform() {
    // 53 bits of mantissa: [0, 1) on an even grid of 2^53 points.
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

RngState RngState::split() {
    return RngState(next_u64());
}

Matrix cholesky(const Matrix& spd) {
    const std::size_t n = spd.rows();
    if (n == 0 || spd.cols() != n)
        throw std::invalid_argument("cholesky: matrix must be square and non-empty");
    const double sym_tol = 1e-10 * std::max(1.0, spd.max_abs());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(spd(i, j) - spd(j, i)) > sym_tol)
                throw std::invalid_argument("cholesky: matrix not symmetric");

    Matrix lower(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = spd(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
        if (!(diag > 0.0) || !std::isfinite(diag))
            throw std::runtime_error("cholesky: matrix not SPD (nonpositive pivot at index " +
                                     std::to_string(j) + ")");
        const double ljj = std::sqrt(diag);
        lower(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = spd(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / ljj;
        }
    }
    return lower;
}

double logsumexp(const Vector& values) {
    if (values.empty()) throw std::invalid_argument("logsumexp: empty input");
    const double shift = *std::max_element(values.begin(), values.end());
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - shift);
    return shift + std::log(acc);
}

double logsumexp_weighted(const Vector& values, const Vector& weights) {
    if (values.empty()) throw std::invalid_argument("logsumexp_weighted: empty input");
    if (values.size() != weights.size())
        throw std::invalid_argument("logsumexp_weighted: length mismatch");
    Vector shifted(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(weights[k] > 0.0))
            throw std::invalid_argument("logsumexp_weighted: weights must be strictly positive");
        shifted[k] = values[k] + std::log(weights[k]);
    }
    return logsumexp(shifted);
}

Vector standard_normal(std::size_t n, RngState& rng) {
    if (n == 0) throw std::invalid_argument("standard_normal: n must be >= 1");
    Vector out;
    out.reserve(n + 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    while (out.size() < n) {
        // u1 in (0, 1] so log(u1) is finite.
        const double u1 = 1.0 - rng.next_uniform();
        const double u2 = rng.next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        out.push_back(r * std::cos(two_pi * u2));
        out.push_back(r * std::sin(two_pi * u2));
    }
    out.resize(n);
    return out;
}

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (x.size() != a.cols()) throw std::invalid_argument("matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
    if (x.size() != a.rows()) throw std::invalid_argument("matvec_transposed: dimension mismatch");
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
    }
    return y;
}

Vector solve_lower(const Matrix& lower, const Vector& b) {
    const std::size_t n = lower.rows();
    if (b.size() != n) throw std::invalid_argument("solve_lower: dimension mismatch");
    Vector u(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= lower(i, j) * u[j];
        u[i] = s / lower(i, i);
    }
    return u;
}

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus_inverse(double y) {
    if (!(y > 0.0)) throw std::invalid_argument("softplus_inverse: argument must be positive");
    return y + std::log1p(-std::exp(-y));
}

}  // namespace vos
