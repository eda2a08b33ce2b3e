#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "support/oracles.hpp"
#include "vos/mathkit.hpp"

using namespace vos;

TEST_SUITE("mathkit") {

TEST_CASE("cholesky of the identity is the identity") {
    Matrix l = cholesky(Matrix::identity(3));
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(l(r, c) == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-15));
}

TEST_CASE("cholesky of a diagonal matrix takes square roots") {
    Matrix s(2, 2);
    s(0, 0) = 4.0;
    s(1, 1) = 9.0;
    Matrix l = cholesky(s);
    CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(l(1, 1) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(l(0, 1) == 0.0);
    CHECK(l(1, 0) == 0.0);
}

TEST_CASE("cholesky reconstructs random SPD matrices, dims 1 through 8") {
    RngState rng(11);
    for (std::size_t dim = 1; dim <= 8; ++dim) {
        for (int rep = 0; rep < 20; ++rep) {
            Matrix s = oracles::random_spd(dim, rng);
            Matrix l = cholesky(s);
            double worst = 0.0;
            for (std::size_t r = 0; r < dim; ++r) {
                for (std::size_t c = 0; c < dim; ++c) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < dim; ++k) acc += l(r, k) * l(c, k);
                    worst = std::max(worst, std::fabs(acc - s(r, c)));
                    if (c > r) CHECK(l(r, c) == 0.0);
                }
            }
            CHECK(worst <= 1e-10 * std::max(1.0, s.max_abs()));
        }
    }
}

TEST_CASE("cholesky rejects non-SPD input and names the pivot") {
    Matrix s = Matrix::identity(3);
    s(1, 1) = -2.0;
    try {
        cholesky(s);
        FAIL("expected a not-SPD error");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("SPD") != std::string::npos);
        CHECK(msg.find("1") != std::string::npos);
    }
}

TEST_CASE("cholesky rejects asymmetric and non-square input") {
    Matrix s = Matrix::identity(2);
    s(0, 1) = 0.5;  // asymmetric
    CHECK_THROWS_AS(cholesky(s), std::invalid_argument);
    CHECK_THROWS_AS(cholesky(Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("logsumexp_weighted symmetric case equals ln 3") {
    CHECK(logsumexp_weighted({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}) ==
          doctest::Approx(1.0986122886681098).epsilon(1e-15));
}

TEST_CASE("logsumexp_weighted survives large inputs via the max shift") {
    CHECK(logsumexp_weighted({1000.0, 1000.0}, {1.0, 1.0}) ==
          doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("logsumexp_weighted matches high-precision summation") {
    CHECK(logsumexp_weighted({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}) ==
          doctest::Approx(3.4076059644443806).epsilon(1e-15));
}

TEST_CASE("logsumexp_weighted rejects empty input and nonpositive weights") {
    CHECK_THROWS_AS(logsumexp_weighted({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(logsumexp_weighted({1.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(logsumexp_weighted({1.0}, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(logsumexp_weighted({1.0, 2.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("logsumexp_weighted with unit weights equals plain logsumexp exactly") {
    RngState rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        Vector v = oracles::random_vector(1 + rep % 7, rng, -20.0, 20.0);
        Vector w(v.size(), 1.0);
        CHECK(logsumexp_weighted(v, w) == logsumexp(v));
    }
}

TEST_CASE("logsumexp_weighted shift invariance and lower bound") {
    RngState rng(6);
    for (int rep = 0; rep < 30; ++rep) {
        Vector v = oracles::random_vector(4, rng, -5.0, 5.0);
        Vector w = oracles::random_vector(4, rng, 0.1, 3.0);
        const double c = -7.5 + 15.0 * rng.next_uniform();
        Vector shifted = v;
        for (auto& x : shifted) x += c;
        CHECK(logsumexp_weighted(shifted, w) ==
              doctest::Approx(c + logsumexp_weighted(v, w)).epsilon(1e-12));
        double bound = -1e300;
        for (std::size_t k = 0; k < v.size(); ++k)
            bound = std::max(bound, v[k] + std::log(w[k]));
        CHECK(logsumexp_weighted(v, w) >= bound - 1e-12);
    }
}

TEST_CASE("standard_normal is deterministic and rejects n = 0") {
    RngState a(7), b(7);
    Vector va = standard_normal(4, a);
    Vector vb = standard_normal(4, b);
    CHECK(va == vb);
    RngState c(7);
    CHECK_THROWS_AS(standard_normal(0, c), std::invalid_argument);
}

TEST_CASE("standard_normal moments at n = 1e5") {
    RngState rng(123);
    Vector draws = standard_normal(100000, rng);
    double mean = 0.0;
    for (double x : draws) mean += x;
    mean /= static_cast<double>(draws.size());
    double var = 0.0;
    for (double x : draws) var += (x - mean) * (x - mean);
    var /= static_cast<double>(draws.size());
    CHECK(std::fabs(mean) <= 0.02);
    CHECK(std::fabs(var - 1.0) <= 0.05);
}

TEST_CASE("rng streams replay exactly and split children diverge") {
    RngState a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngState parent(9);
    RngState child = parent.split();
    CHECK(child.next_u64() != parent.next_u64());
    // uniform draws stay inside [0, 1)
    RngState u(3);
    for (int i = 0; i < 1000; ++i) {
        double x = u.next_uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("scalar helpers hit their frozen reference values") {
    CHECK(softplus(1.0) == doctest::Approx(1.3132616875182228).epsilon(1e-15));
    CHECK(sigmoid(-2.0) == doctest::Approx(0.11920292202211755).epsilon(1e-15));
    CHECK(softplus_inverse(1.0) == doctest::Approx(0.5413248546129181).epsilon(1e-15));
    // softplus stays finite and linear for large inputs
    CHECK(softplus(1000.0) == doctest::Approx(1000.0).epsilon(1e-15));
    CHECK(softplus(-1000.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("softplus_inverse inverts softplus across magnitudes") {
    RngState rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        double y = 1e-3 + 20.0 * rng.next_uniform();
        CHECK(softplus(softplus_inverse(y)) == doctest::Approx(y).epsilon(1e-10));
    }
}

TEST_CASE("dense kernels agree with index loops") {
    RngState rng(14);
    Matrix a(3, 4);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c) a(r, c) = 2.0 * rng.next_uniform() - 1.0;
    Vector x = oracles::random_vector(4, rng);
    Vector y = oracles::random_vector(3, rng);

    Vector ax = matvec(a, x);
    for (std::size_t r = 0; r < 3; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < 4; ++c) acc += a(r, c) * x[c];
        CHECK(ax[r] == doctest::Approx(acc).epsilon(1e-15));
    }
    Vector aty = matvec_transposed(a, y);
    for (std::size_t c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < 3; ++r) acc += a(r, c) * y[r];
        CHECK(aty[c] == doctest::Approx(acc).epsilon(1e-15));
    }
    CHECK(dot(x, x) >= 0.0);
}

TEST_CASE("solve_lower inverts a lower-triangular product") {
    RngState rng(21);
    Matrix s = oracles::random_spd(5, rng);
    Matrix l = cholesky(s);
    Vector x = oracles::random_vector(5, rng);
    Vector b = matvec(l, x);
    Vector got = solve_lower(l, b);
    for (std::size_t i = 0; i < 5; ++i) CHECK(got[i] == doctest::Approx(x[i]).epsilon(1e-10));
}

}  // TEST_SUITE
