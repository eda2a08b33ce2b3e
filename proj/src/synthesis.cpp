#include "vos/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vos {

OutlierBatch synthesize(const GaussianModel& model, int class_id, std::size_t pool_size,
                        std::size_t t, RngState& rng) {
    if (t == 0) throw std::invalid_argument("synthesize: t must be >= 1");
    if (t > pool_size) throw std::invalid_argument("synthesize: t must be <= pool_size");

    const std::size_t k = static_cast<std::size_t>(class_id);
    const std::vector<Vector> pool = model.sample(k, pool_size, rng);
    const std::vector<double> log_densities = model.log_density_batch(k, pool);

    std::vector<std::size_t> order(pool_size);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return log_densities[a] < log_densities[b];
    });

    OutlierBatch batch;
    batch.class_id = class_id;
    batch.pool_size = pool_size;
    batch.outliers.reserve(t);
    for (std::size_t i = 0; i < t; ++i) batch.outliers.push_back(pool[order[i]]);
    batch.log_epsilon = log_densities[order[t - 1]];
    batch.epsilon = std::exp(batch.log_epsilon);
    return batch;
}

std::vector<Vector> gaussian_noise_outliers(std::size_t dim, std::size_t n, double scale,
                                            RngState& rng) {
    if (n == 0) throw std::invalid_argument("gaussian_noise_outliers: n must be >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("gaussian_noise_outliers: scale must be > 0");
    std::vector<Vector> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        Vector z = standard_normal(dim, rng);
        for (double& v : z) v *= scale;
        out.push_back(std::move(z));
    }
    return out;
}

}  // namespace vos
