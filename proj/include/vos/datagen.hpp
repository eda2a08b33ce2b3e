#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vos/mathkit.hpp"

namespace vos {

struct LabeledExample {
    Vector x;
    int label = 0;  // -1 marks an unlabeled row (e.g. OOD dumps)
};

/// Where the OOD evaluation points live. The annulus is the default; the box
/// variant fills [-half_width, half_width]^d minus the union of the ID
/// classes' 6-sigma ellipsoids (useful for heatmap-aligned evaluation).
struct OodSpec {
    enum class Shape { Annulus, Box };
    Shape shape = Shape::Annulus;
    double r_min = 8.0;
    double r_max = 12.0;
    double box_half_width = 12.0;
    std::size_t n = 1000;
};

/// Gaussian-mixture ID data plus an OOD region, all in R^dim.
/// `covs` holds either one matrix (shared by all classes) or one per class.
struct DatasetSpec {
    std::size_t num_classes = 3;
    std::size_t dim = 2;
    std::vector<Vector> means;
    std::vector<Matrix> covs;
    std::size_t n_per_class = 500;
    std::uint64_t seed = 1;
    OodSpec ood;

    /// 3 classes with means on a radius-4 circle at 120 degree spacing,
    /// covariance 0.5*I, 500 points per class, annulus OOD in [8, 12].
    static DatasetSpec default_toy();

    const Matrix& cov_for(std::size_t class_id) const;

    /// Checks shape consistency, SPD-ness of the covariances, and that the
    /// annulus starts beyond every mean's 3-sigma reach (so OOD really is
    /// outside ID support). Throws std::invalid_argument.
    void validate() const;
};

/// Largest eigenvalue of a symmetric PSD matrix (power iteration).
double spectral_radius(const Matrix& S);

/// True when x lies outside the 6-sigma Mahalanobis ellipsoid of every class.
bool outside_six_sigma(const DatasetSpec& spec, const Vector& x);

/// n_per_class draws per class, class-major order, seeded by spec.seed.
std::vector<LabeledExample> make_gmm(const DatasetSpec& spec);

/// Uniform angles (uniform directions when dim > 2), radii uniform in
/// [r_min, r_max].
std::vector<Vector> make_ood_annulus(const DatasetSpec& spec, RngState& rng);

/// Uniform over the box, rejecting anything inside an ID 6-sigma ellipsoid.
std::vector<Vector> make_ood_box(const DatasetSpec& spec, RngState& rng);

/// Comma-separated text with header x0,...,x{d-1},y; values written with 17
/// significant digits so read(write(data)) is value-exact. Malformed rows
/// raise std::runtime_error naming the 1-based line number.
void write_dataset(const std::string& path, const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> read_dataset(const std::string& path);

}  // namespace vos
