#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "vos/mathkit.hpp"

namespace vos {

/// Fixed-capacity FIFO of feature vectors for one class. Once full, each
/// enqueue evicts exactly one (the oldest) element.
class ClassQueue {
public:
    ClassQueue(int class_id, std::size_t capacity, std::size_t dim);

    /// Appends `feature`; evicts the oldest element iff the queue was full.
    /// Throws std::invalid_argument on a dimension mismatch.
    void enqueue(const Vector& feature);

    int class_id() const { return class_id_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return buffer_.size(); }
    const std::deque<Vector>& buffer() const { return buffer_; }

private:
    int class_id_;
    std::size_t capacity_;
    std::size_t dim_;
    std::deque<Vector> buffer_;
};

/// Class-conditional Gaussians with one covariance shared across classes.
/// The Cholesky factor and log-determinant of the covariance are cached at
/// fit time; the model is immutable afterwards.
struct GaussianModel {
    std::vector<Vector> means;  // K vectors of length dim
    Matrix tied_cov;            // dim x dim, ridge included
    Matrix chol;                // lower triangular, chol * chol^T == tied_cov
    double log_det = 0.0;       // log |tied_cov| = 2 * sum log diag(chol)
    std::size_t dim = 0;
    std::size_t num_classes = 0;

    /// log N(v; mean_k, tied_cov) =
    ///   -(dim/2) log(2 pi) - log_det/2 - mahalanobis^2 / 2,
    /// with the Mahalanobis term computed by a triangular solve against chol.
    double log_density(std::size_t class_id, const Vector& v) const;

    /// log_density for many vectors at once.
    std::vector<double> log_density_batch(std::size_t class_id,
                                          const std::vector<Vector>& vs) const;

    /// n draws mean_k + chol * z, z ~ N(0, I). Deterministic under the rng seed.
    std::vector<Vector> sample(std::size_t class_id, std::size_t n, RngState& rng) const;
};

/// Fits per-class means and the pooled (tied) covariance over the current
/// queue contents, then adds ridge * I before factorizing. Every queue must
/// hold at least 2 samples; otherwise throws std::invalid_argument naming
/// the class.
GaussianModel estimate_gaussian_model(const std::vector<ClassQueue>& queues, double ridge);

/// Same, over spans of raw per-class sample sets (used by the trainer when
/// some classes are excluded).
GaussianModel estimate_gaussian_model(const std::vector<const std::deque<Vector>*>& class_samples,
                                      double ridge);

}  // namespace vos
