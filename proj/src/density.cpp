#include "vos/density.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vos {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
}

ClassQueue::ClassQueue(int class_id, std::size_t capacity, std::size_t dim)
    : class_id_(class_id), capacity_(capacity), dim_(dim) {
    if (capacity == 0) throw std::invalid_argument("ClassQueue: capacity must be >= 1");
    if (dim == 0) throw std::invalid_argument("ClassQueue: dim must be >= 1");
}

void ClassQueue::enqueue(const Vector& feature) {
    if (feature.size() != dim_)
        throw std::invalid_argument("ClassQueue: feature dimension " +
                                    std::to_string(feature.size()) + " != " +
                                    std::to_string(dim_));
    if (buffer_.size() == capacity_) buffer_.pop_front();
    buffer_.push_back(feature);
}

double GaussianModel::log_density(std::size_t class_id, const Vector& v) const {
    if (class_id >= num_classes)
        throw std::invalid_argument("GaussianModel: class_id out of range");
    if (v.size() != dim)
        throw std::invalid_argument("GaussianModel: vector dimension mismatch");
    Vector centered(dim);
    for (std::size_t i = 0; i < dim; ++i) centered[i] = v[i] - means[class_id][i];
    const Vector u = solve_lower(chol, centered);
    const double maha_sq = dot(u, u);
    return -0.5 * (static_cast<double>(dim) * kLogTwoPi + log_det + maha_sq);
}

std::vector<double> GaussianModel::log_density_batch(std::size_t class_id,
                                                     const std::vector<Vector>& vs) const {
    std::vector<double> out;
    out.reserve(vs.size());
    for (const Vector& v : vs) out.push_back(log_density(class_id, v));
    return out;
}

std::vector<Vector> GaussianModel::sample(std::size_t class_id, std::size_t n,
                                          RngState& rng) const {
    if (class_id >= num_classes)
        throw std::invalid_argument("GaussianModel: class_id out of range");
    if (n == 0) throw std::invalid_argument("GaussianModel: n must be >= 1");
    std::vector<Vector> draws;
    draws.reserve(n);
    const Vector& mean = means[class_id];
    for (std::size_t s = 0; s < n; ++s) {
        const Vector z = standard_normal(dim, rng);
        Vector x(dim);
        // lower-triangular matvec, fused with the mean shift
        for (std::size_t i = 0; i < dim; ++i) {
            double acc = mean[i];
            for (std::size_t j = 0; j <= i; ++j) acc += chol(i, j) * z[j];
            x[i] = acc;
        }
        draws.push_back(std::move(x));
    }
    return draws;
}

GaussianModel estimate_gaussian_model(const std::vector<const std::deque<Vector>*>& class_samples,
                                      double ridge) {
    if (class_samples.empty())
        throw std::invalid_argument("estimate_gaussian_model: no classes");
    if (ridge < 0.0)
        throw std::invalid_argument("estimate_gaussian_model: ridge must be >= 0");

    const std::size_t num_classes = class_samples.size();
    std::size_t dim = 0;
    std::size_t total = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
        const auto& samples = *class_samples[k];
        if (samples.size() < 2)
            throw std::invalid_argument("estimate_gaussian_model: insufficient samples for class " +
                                        std::to_string(k) + " (need >= 2, have " +
                                        std::to_string(samples.size()) + ")");
        if (dim == 0) dim = samples.front().size();
        for (const Vector& v : samples) {
            if (v.size() != dim)
                throw std::invalid_argument("estimate_gaussian_model: inconsistent dimensions");
            ++total;
        }
    }

    GaussianModel model;
    model.dim = dim;
    model.num_classes = num_classes;
    model.means.assign(num_classes, Vector(dim, 0.0));
    for (std::size_t k = 0; k < num_classes; ++k) {
        const auto& samples = *class_samples[k];
        Vector& mean = model.means[k];
        for (const Vector& v : samples)
            for (std::size_t i = 0; i < dim; ++i) mean[i] += v[i];
        for (std::size_t i = 0; i < dim; ++i) mean[i] /= static_cast<double>(samples.size());
    }

    // Pooled covariance of per-class centered deviations, normalized by the
    // total sample count.
    Matrix cov(dim, dim, 0.0);
    Vector centered(dim);
    for (std::size_t k = 0; k < num_classes; ++k) {
        const Vector& mean = model.means[k];
        for (const Vector& v : *class_samples[k]) {
            for (std::size_t i = 0; i < dim; ++i) centered[i] = v[i] - mean[i];
            for (std::size_t i = 0; i < dim; ++i) {
                const double ci = centered[i];
                for (std::size_t j = 0; j <= i; ++j) cov(i, j) += ci * centered[j];
            }
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double value = cov(i, j) / static_cast<double>(total);
            if (i == j) value += ridge;
            cov(i, j) = value;
            cov(j, i) = value;
        }
    }
    model.tied_cov = cov;
    try {
        model.chol = cholesky(cov);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string("estimate_gaussian_model: covariance not SPD "
                                             "after ridge: ") + e.what());
    }
    model.log_det = 0.0;
    for (std::size_t i = 0; i < dim; ++i) model.log_det += 2.0 * std::log(model.chol(i, i));
    return model;
}

GaussianModel estimate_gaussian_model(const std::vector<ClassQueue>& queues, double ridge) {
    std::vector<const std::deque<Vector>*> views;
    views.reserve(queues.size());
    for (const ClassQueue& q : queues) views.push_back(&q.buffer());
    return estimate_gaussian_model(views, ridge);
}

}  // namespace vos
