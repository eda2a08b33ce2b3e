#include "vos/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vos {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Vector affine_sample(const Vector& mean, const Matrix& chol, const Vector& z) {
    const std::size_t d = mean.size();
    Vector x(d);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = mean[i];
        for (std::size_t j = 0; j <= i; ++j) acc += chol(i, j) * z[j];
        x[i] = acc;
    }
    return x;
}

bool outside_six_sigma_impl(const std::vector<Vector>& means,
                            const std::vector<Matrix>& chols, const Vector& x) {
    const std::size_t d = x.size();
    Vector diff(d);
    for (std::size_t k = 0; k < means.size(); ++k) {
        for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - means[k][i];
        Vector u = solve_lower(chols[k % chols.size()], diff);
        double m2 = dot(u, u);
        if (m2 <= 36.0) return false;
    }
    return true;
}

std::vector<Matrix> class_chols(const DatasetSpec& spec) {
    std::vector<Matrix> chols;
    chols.reserve(spec.covs.size());
    for (std::size_t c = 0; c < spec.covs.size(); ++c) {
        try {
            chols.push_back(cholesky(spec.covs[c]));
        } catch (const std::runtime_error& e) {
            throw std::invalid_argument("covariance " + std::to_string(c) +
                                        " is not SPD: " + e.what());
        }
    }
    return chols;
}

}  // namespace

DatasetSpec DatasetSpec::default_toy() {
    DatasetSpec spec;
    spec.num_classes = 3;
    spec.dim = 2;
    spec.means.clear();
    const double radius = 4.0;
    for (int k = 0; k < 3; ++k) {
        double angle = kTwoPi * k / 3.0;
        spec.means.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    }
    Matrix cov(2, 2);
    cov(0, 0) = cov(1, 1) = 0.5;
    spec.covs = {cov};
    spec.n_per_class = 500;
    return spec;
}

const Matrix& DatasetSpec::cov_for(std::size_t class_id) const {
    return covs.size() == 1 ? covs.front() : covs.at(class_id);
}

double spectral_radius(const Matrix& S) {
    if (S.rows() != S.cols()) throw std::invalid_argument("spectral_radius: square matrix required");
    const std::size_t d = S.rows();
    Vector v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        Vector w = matvec(S, v);
        double norm = std::sqrt(dot(w, w));
        if (norm == 0.0) return 0.0;
        for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / norm;
        lambda = norm;
    }
    return lambda;
}

void DatasetSpec::validate() const {
    if (num_classes < 1 || dim < 1) {
        throw std::invalid_argument("dataset spec: num_classes and dim must be >= 1");
    }
    if (means.size() != num_classes) {
        throw std::invalid_argument("dataset spec: need one mean per class");
    }
    for (const Vector& m : means) {
        if (m.size() != dim) throw std::invalid_argument("dataset spec: mean dimension mismatch");
    }
    if (covs.empty() || (covs.size() != 1 && covs.size() != num_classes)) {
        throw std::invalid_argument("dataset spec: covs must hold 1 (shared) or num_classes matrices");
    }
    for (const Matrix& c : covs) {
        if (c.rows() != dim || c.cols() != dim) {
            throw std::invalid_argument("dataset spec: covariance shape mismatch");
        }
    }
    class_chols(*this);  // SPD check
    if (n_per_class < 1 || ood.n < 1) {
        throw std::invalid_argument("dataset spec: counts must be >= 1");
    }
    if (ood.shape == OodSpec::Shape::Annulus) {
        if (ood.r_min > ood.r_max) {
            throw std::invalid_argument("dataset spec: annulus needs r_min <= r_max");
        }
        double reach = 0.0;
        for (std::size_t k = 0; k < num_classes; ++k) {
            double norm = std::sqrt(dot(means[k], means[k]));
            double sigma = std::sqrt(spectral_radius(cov_for(k)));
            reach = std::max(reach, norm + 3.0 * sigma);
        }
        if (!(ood.r_min > reach)) {
            throw std::invalid_argument(
                "dataset spec: annulus r_min must exceed every mean's 3-sigma reach (" +
                std::to_string(reach) + ")");
        }
    } else if (!(ood.box_half_width > 0.0)) {
        throw std::invalid_argument("dataset spec: box_half_width must be positive");
    }
}

bool outside_six_sigma(const DatasetSpec& spec, const Vector& x) {
    if (x.size() != spec.dim) throw std::invalid_argument("outside_six_sigma: dimension mismatch");
    return outside_six_sigma_impl(spec.means, class_chols(spec), x);
}

std::vector<LabeledExample> make_gmm(const DatasetSpec& spec) {
    spec.validate();
    std::vector<Matrix> chols = class_chols(spec);
    RngState rng(spec.seed);
    std::vector<LabeledExample> out;
    out.reserve(spec.num_classes * spec.n_per_class);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        const Matrix& chol = chols[k % chols.size()];
        for (std::size_t i = 0; i < spec.n_per_class; ++i) {
            Vector z = standard_normal(spec.dim, rng);
            out.push_back({affine_sample(spec.means[k], chol, z), static_cast<int>(k)});
        }
    }
    return out;
}

std::vector<Vector> make_ood_annulus(const DatasetSpec& spec, RngState& rng) {
    if (spec.ood.r_min > spec.ood.r_max) {
        throw std::invalid_argument("make_ood_annulus: r_min must be <= r_max");
    }
    std::vector<Vector> out;
    out.reserve(spec.ood.n);
    for (std::size_t i = 0; i < spec.ood.n; ++i) {
        double r = spec.ood.r_min + (spec.ood.r_max - spec.ood.r_min) * rng.next_uniform();
        if (spec.dim == 2) {
            double angle = kTwoPi * rng.next_uniform();
            out.push_back({r * std::cos(angle), r * std::sin(angle)});
        } else {
            Vector dir;
            double norm = 0.0;
            do {
                dir = standard_normal(spec.dim, rng);
                norm = std::sqrt(dot(dir, dir));
            } while (norm < 1e-12);
            for (double& v : dir) v = v / norm * r;
            out.push_back(std::move(dir));
        }
    }
    return out;
}

std::vector<Vector> make_ood_box(const DatasetSpec& spec, RngState& rng) {
    const double w = spec.ood.box_half_width;
    if (!(w > 0.0)) throw std::invalid_argument("make_ood_box: box_half_width must be positive");
    std::vector<Matrix> chols = class_chols(spec);
    std::vector<Vector> out;
    out.reserve(spec.ood.n);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 10000 * spec.ood.n;
    while (out.size() < spec.ood.n) {
        if (++attempts > max_attempts) {
            throw std::runtime_error(
                "make_ood_box: box appears to be covered by ID support (rejection cap hit)");
        }
        Vector x(spec.dim);
        for (double& v : x) v = -w + 2.0 * w * rng.next_uniform();
        if (outside_six_sigma_impl(spec.means, chols, x)) out.push_back(std::move(x));
    }
    return out;
}

void write_dataset(const std::string& path, const std::vector<LabeledExample>& examples) {
    if (examples.empty()) throw std::invalid_argument("write_dataset: no examples");
    const std::size_t d = examples.front().x.size();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dataset: cannot open " + path);
    for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
    out << "y\n";
    char buf[40];
    for (const LabeledExample& ex : examples) {
        if (ex.x.size() != d) {
            throw std::invalid_argument("write_dataset: inconsistent dimensions");
        }
        if (ex.label < -1) throw std::invalid_argument("write_dataset: label below -1");
        for (double v : ex.x) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << buf << ',';
        }
        out << ex.label << '\n';
    }
    if (!out) throw std::runtime_error("write_dataset: write failed for " + path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

[[noreturn]] void row_error(const std::string& path, std::size_t line_no,
                            const std::string& what) {
    throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<LabeledExample> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_dataset: " + path + " is empty");
    std::vector<std::string> header = split_csv(line);
    if (header.size() < 2 || header.back() != "y") {
        row_error(path, 1, "expected header x0,...,y");
    }
    const std::size_t d = header.size() - 1;
    for (std::size_t j = 0; j < d; ++j) {
        if (header[j] != "x" + std::to_string(j)) row_error(path, 1, "expected header x0,...,y");
    }

    std::vector<LabeledExample> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = split_csv(line);
        if (fields.size() != d + 1) {
            row_error(path, line_no,
                      "expected " + std::to_string(d + 1) + " fields, got " +
                          std::to_string(fields.size()));
        }
        LabeledExample ex;
        ex.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            const char* s = fields[j].c_str();
            char* end = nullptr;
            ex.x[j] = std::strtod(s, &end);
            if (end == s || *end != '\0') row_error(path, line_no, "bad number '" + fields[j] + "'");
        }
        const char* s = fields[d].c_str();
        char* end = nullptr;
        long y = std::strtol(s, &end, 10);
        if (end == s || *end != '\0' || y < -1) {
            row_error(path, line_no, "bad label '" + fields[d] + "'");
        }
        ex.label = static_cast<int>(y);
        out.push_back(std::move(ex));
    }
    if (out.empty()) throw std::runtime_error("read_dataset: " + path + " has no data rows");
    return out;
}

}  // namespace vos
