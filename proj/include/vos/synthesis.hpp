#pragma once

#include <cstddef>
#include <vector>

#include "vos/density.hpp"
#include "vos/mathkit.hpp"

namespace vos {

/// Outliers drawn from the low-likelihood sublevel set of one class's
/// Gaussian, together with the likelihood threshold actually realized.
struct OutlierBatch {
    int class_id = 0;
    std::vector<Vector> outliers;
    /// t-th smallest likelihood over the pool (the realized threshold).
    double epsilon = 0.0;
    /// Same threshold in log space; exact even when epsilon underflows.
    double log_epsilon = 0.0;
    std::size_t pool_size = 0;
};

/// Draws `pool_size` samples from N(mean_k, cov) with one call to
/// GaussianModel::sample, then keeps the `t` pool members with smallest
/// log-density under that class's Gaussian (selection in log space; ties
/// broken by pool draw index). The realized threshold is the t-th smallest
/// pool likelihood. Throws if t < 1 or t > pool_size.
OutlierBatch synthesize(const GaussianModel& model, int class_id, std::size_t pool_size,
                        std::size_t t, RngState& rng);

/// Baseline mode: n pure-noise vectors ~ N(0, scale^2 I), independent of any
/// fitted model.
std::vector<Vector> gaussian_noise_outliers(std::size_t dim, std::size_t n, double scale,
                                            RngState& rng);

}  // namespace vos
