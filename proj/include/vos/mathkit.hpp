#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace vos {

/// Dense vector of doubles. All public APIs treat entries as finite reals.
using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    bool all_finite() const;
    /// max_ij |a_ij|
    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

/// Deterministic counter-based random stream.
///
/// The stream is SplitMix64 over an explicit (seed, counter) pair: draw i of
/// seed s is mix64(s + (i+1) * 0x9E3779B97F4A7C15) where mix64 is the
/// xor-shift-multiply finalizer below. The same seed always yields the same
/// sequence of u64 draws on every platform; all floating-point draws are
/// derived from u64 draws by fixed arithmetic, so they are reproducible too.
///
/// `split()` derives an independent child stream seeded by the next u64 of
/// the parent (advancing the parent by one draw).
class RngState {
public:
    explicit RngState(std::uint64_t seed) : seed_(seed), counter_(0) {}

    std::uint64_t next_u64();
    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double next_uniform();
    /// Child stream; advances this stream by one u64 draw.
    RngState split();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

/// Cholesky factorization S = L * L^T of a symmetric positive-definite matrix.
/// Throws std::invalid_argument if S is not square or not symmetric within
/// 1e-10 * max(1, max|S|), and std::runtime_error naming the failing pivot
/// index if a non-positive pivot is met (matrix not SPD). No pivoting.
Matrix cholesky(const Matrix& spd);

/// log(sum_k exp(values_k)), computed with a max shift.
double logsumexp(const Vector& values);

/// log(sum_k weights_k * exp(values_k)) with strictly positive weights,
/// computed as logsumexp(values + log(weights)). Throws on empty input or
/// a nonpositive weight. With all weights equal to 1 this matches
/// logsumexp(values) exactly.
double logsumexp_weighted(const Vector& values, const Vector& weights);

/// n i.i.d. standard normal draws via the Box-Muller transform. Draws are
/// generated in pairs; for odd n the spare is discarded. Throws on n == 0.
Vector standard_normal(std::size_t n, RngState& rng);

// Small dense kernels shared by the model and density code.

double dot(const Vector& a, const Vector& b);

/// y = A x  (A is rows x cols, x has cols entries)
Vector matvec(const Matrix& a, const Vector& x);

/// y = A^T x  (A is rows x cols, x has rows entries)
Vector matvec_transposed(const Matrix& a, const Vector& x);

/// Solve L u = b for lower-triangular L by forward substitution.
Vector solve_lower(const Matrix& lower, const Vector& b);

/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// Logistic function 1 / (1 + exp(-x)).
double sigmoid(double x);

/// Inverse of softplus: log(exp(y) - 1), valid for y > 0.
double softplus_inverse(double y);

}  // namespace vos
