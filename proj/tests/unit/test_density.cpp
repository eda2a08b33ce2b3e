#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "vos/density.hpp"

using namespace vos;

namespace {

ClassQueue filled_queue(int cls, std::size_t cap, const std::vector<Vector>& contents) {
    ClassQueue q(cls, cap, contents.at(0).size());
    for (const auto& v : contents) q.enqueue(v);
    return q;
}

}  // namespace

TEST_SUITE("density") {

TEST_CASE("queue keeps FIFO order and evicts only when full") {
    ClassQueue q(0, 2, 1);
    q.enqueue({1.0});
    q.enqueue({2.0});
    q.enqueue({3.0});
    REQUIRE(q.size() == 2);
    CHECK(q.buffer()[0][0] == 2.0);
    CHECK(q.buffer()[1][0] == 3.0);

    ClassQueue under(0, 2, 1);
    under.enqueue({1.0});
    under.enqueue({3.0});
    CHECK(under.size() == 2);
    CHECK(under.buffer()[0][0] == 1.0);
}

TEST_CASE("queue holds exactly the last capacity inputs after churn") {
    ClassQueue q(1, 300, 1);
    for (int i = 0; i < 1000; ++i) q.enqueue({static_cast<double>(i)});
    REQUIRE(q.size() == 300);
    for (int i = 0; i < 300; ++i) CHECK(q.buffer()[i][0] == static_cast<double>(700 + i));
}

TEST_CASE("queue rejects a dimension mismatch") {
    ClassQueue q(0, 4, 2);
    CHECK_THROWS_AS(q.enqueue({1.0}), std::invalid_argument);
}

TEST_CASE("two tiny classes match the hand-computed pooled fit") {
    std::vector<ClassQueue> queues;
    queues.push_back(filled_queue(0, 8, {{0.0, 0.0}, {2.0, 0.0}}));
    queues.push_back(filled_queue(1, 8, {{0.0, 2.0}, {2.0, 2.0}}));
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    CHECK(m.means[0][0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.means[0][1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m.means[1][0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.means[1][1] == doctest::Approx(2.0).epsilon(1e-15));
    // pooled scatter is 1 along x, 0 along y; ridge shows up on the diagonal
    CHECK(m.tied_cov(0, 0) == doctest::Approx(1.0001).epsilon(1e-12));
    CHECK(m.tied_cov(1, 1) == doctest::Approx(0.0001).epsilon(1e-12));
    CHECK(m.tied_cov(0, 1) == 0.0);
}

TEST_CASE("zero scatter leaves exactly the ridge") {
    std::vector<ClassQueue> queues;
    queues.push_back(filled_queue(0, 4, {{3.0, -1.0}, {3.0, -1.0}, {3.0, -1.0}}));
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    CHECK(m.means[0][0] == 3.0);
    CHECK(m.means[0][1] == -1.0);
    CHECK(m.tied_cov(0, 0) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(m.tied_cov(1, 1) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(m.tied_cov(0, 1) == 0.0);
}

TEST_CASE("three 500-sample classes agree with the two-pass oracle to 1e-10") {
    RngState rng(33);
    std::vector<std::vector<Vector>> samples(3);
    std::vector<ClassQueue> queues;
    for (int k = 0; k < 3; ++k) {
        ClassQueue q(k, 600, 4);
        for (int i = 0; i < 500; ++i) {
            Vector v = oracles::random_vector(4, rng, -2.0 + k, 2.0 + k);
            samples[k].push_back(v);
            q.enqueue(v);
        }
        queues.push_back(q);
    }
    GaussianModel m = estimate_gaussian_model(queues, 0.0);
    auto fit = oracles::two_pass_fit(samples);
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 4; ++j)
            CHECK(std::fabs(m.means[k][j] - fit.means[k][j]) <= 1e-10);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(std::fabs(m.tied_cov(r, c) - fit.cov(r, c)) <= 1e-10);
}

TEST_CASE("estimate refuses a class with fewer than 2 samples, naming it") {
    std::vector<ClassQueue> queues;
    queues.push_back(filled_queue(0, 4, {{0.0}, {1.0}}));
    queues.push_back(filled_queue(1, 4, {{2.0}}));
    try {
        estimate_gaussian_model(queues, 1e-4);
        FAIL("expected an insufficient-samples error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("estimate is invariant to sample order within a class") {
    RngState rng(44);
    std::vector<Vector> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(oracles::random_vector(3, rng));
    std::vector<ClassQueue> fwd{filled_queue(0, 64, pts)};
    std::reverse(pts.begin(), pts.end());
    std::vector<ClassQueue> rev{filled_queue(0, 64, pts)};
    GaussianModel a = estimate_gaussian_model(fwd, 1e-6);
    GaussianModel b = estimate_gaussian_model(rev, 1e-6);
    for (int j = 0; j < 3; ++j) CHECK(a.means[0][j] == doctest::Approx(b.means[0][j]).epsilon(1e-12));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(a.tied_cov(r, c) == doctest::Approx(b.tied_cov(r, c)).epsilon(1e-12));
}

TEST_CASE("log density at the mean matches the closed form") {
    std::vector<ClassQueue> queues{filled_queue(0, 4, {{1.0, 1.0}, {-1.0, 3.0}, {2.0, 0.0},
                                                       {-2.0, 4.0}})};
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    // force the identity covariance by hand for the textbook value
    m.tied_cov = Matrix::identity(2);
    m.chol = Matrix::identity(2);
    m.log_det = 0.0;
    CHECK(m.log_density(0, m.means[0]) == doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("scalar log density matches the one-dimensional formula") {
    std::vector<ClassQueue> queues{filled_queue(0, 4, {{0.0}, {0.0}})};
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    m.tied_cov = Matrix(1, 1);
    m.tied_cov(0, 0) = 4.0;
    m.chol = Matrix(1, 1);
    m.chol(0, 0) = 2.0;
    m.log_det = std::log(4.0);
    // deviation 2, variance 4
    CHECK(m.log_density(0, {2.0}) ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI) - 0.5 * std::log(4.0) - 0.5)
              .epsilon(1e-12));
    CHECK(m.log_density(0, {2.0}) == doctest::Approx(-2.1120857137646181).epsilon(1e-12));
}

TEST_CASE("diagonal covariance factorizes into univariate normals") {
    RngState rng(55);
    std::vector<ClassQueue> queues{filled_queue(0, 4, {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}})};
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    Vector variances{0.7, 2.3, 0.05};
    m.tied_cov = Matrix(3, 3);
    m.chol = Matrix(3, 3);
    m.log_det = 0.0;
    for (int j = 0; j < 3; ++j) {
        m.tied_cov(j, j) = variances[j];
        m.chol(j, j) = std::sqrt(variances[j]);
        m.log_det += std::log(variances[j]);
    }
    for (int rep = 0; rep < 50; ++rep) {
        Vector v = oracles::random_vector(3, rng, -4.0, 4.0);
        CHECK(std::fabs(m.log_density(0, v) -
                        oracles::diag_normal_logpdf(v, m.means[0], variances)) <= 1e-10);
    }
}

TEST_CASE("log density rejects bad dimensions and class ids") {
    std::vector<ClassQueue> queues{filled_queue(0, 4, {{0.0, 0.0}, {1.0, 1.0}})};
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    CHECK_THROWS_AS(m.log_density(0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(m.log_density(5, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("sampling collapses onto the mean as covariance vanishes") {
    std::vector<ClassQueue> queues{filled_queue(0, 4, {{2.0, -3.0}, {2.0, -3.0}})};
    GaussianModel m = estimate_gaussian_model(queues, 1e-12);
    RngState rng(66);
    for (const auto& v : m.sample(0, 50, rng)) {
        CHECK(std::fabs(v[0] - 2.0) <= 1e-5);
        CHECK(std::fabs(v[1] + 3.0) <= 1e-5);
    }
}

TEST_CASE("sample moments recover the fitted parameters at n = 1e5") {
    RngState data_rng(77);
    std::vector<Vector> pts;
    for (int i = 0; i < 400; ++i) {
        Vector v = oracles::random_vector(2, data_rng, -1.0, 1.0);
        v[1] = 0.6 * v[0] + 0.5 * v[1];  // correlated on purpose
        pts.push_back(v);
    }
    std::vector<ClassQueue> queues{filled_queue(0, 512, pts)};
    GaussianModel m = estimate_gaussian_model(queues, 1e-6);
    RngState rng(78);
    auto draws = m.sample(0, 100000, rng);
    Vector mean(2, 0.0);
    for (const auto& v : draws)
        for (int j = 0; j < 2; ++j) mean[j] += v[j];
    for (int j = 0; j < 2; ++j) mean[j] /= static_cast<double>(draws.size());
    Matrix cov(2, 2);
    for (const auto& v : draws)
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) cov(r, c) += (v[r] - mean[r]) * (v[c] - mean[c]);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) cov(r, c) /= static_cast<double>(draws.size());

    for (int j = 0; j < 2; ++j) CHECK(std::fabs(mean[j] - m.means[0][j]) <= 0.02);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(std::fabs(cov(r, c) - m.tied_cov(r, c)) <= 0.05);
}

TEST_CASE("sampling is deterministic under the seed") {
    std::vector<ClassQueue> queues{filled_queue(0, 8, {{0.0, 0.0}, {1.0, 2.0}, {-1.0, 1.0}})};
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    RngState a(5), b(5);
    CHECK(m.sample(0, 20, a) == m.sample(0, 20, b));
}

TEST_CASE("density integrates to one over a wide grid") {
    RngState rng(88);
    std::vector<Vector> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(oracles::random_vector(2, rng, -1.5, 1.5));
    std::vector<ClassQueue> queues{filled_queue(0, 256, pts)};
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    const double sigma = std::sqrt(std::max(m.tied_cov(0, 0), m.tied_cov(1, 1)));
    const double half = 7.0 * sigma;
    const int n = 400;
    const double step = 2.0 * half / n;
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vector v{m.means[0][0] - half + (i + 0.5) * step,
                     m.means[0][1] - half + (j + 0.5) * step};
            mass += std::exp(m.log_density(0, v)) * step * step;
        }
    }
    CHECK(std::fabs(mass - 1.0) <= 1e-3);
}

TEST_CASE("log density peaks at the class mean") {
    RngState rng(99);
    std::vector<Vector> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(oracles::random_vector(3, rng, -2.0, 2.0));
    std::vector<ClassQueue> queues{filled_queue(0, 128, pts)};
    GaussianModel m = estimate_gaussian_model(queues, 1e-4);
    const double at_mean = m.log_density(0, m.means[0]);
    for (int rep = 0; rep < 200; ++rep) {
        Vector probe = oracles::random_vector(3, rng, -5.0, 5.0);
        CHECK(m.log_density(0, probe) <= at_mean + 1e-12);
    }
}

}  // TEST_SUITE
