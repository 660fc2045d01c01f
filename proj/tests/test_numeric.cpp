#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "pwh/numeric.hpp"

using namespace pwh;
using oracles::reference_single_port;

TEST_CASE("cholesky_pd identity and indefinite verdicts") {
    CHECK(num::cholesky_pd(Mat::Identity(2, 2)).positive_definite);

    Mat indef = Mat::Zero(2, 2);
    indef.diagonal() << 1.0, -1.0;
    CHECK_FALSE(num::cholesky_pd(indef).positive_definite);
}

TEST_CASE("cholesky_pd accepts the single-port dissipation-plus-load block") {
    // diag(r_l, 1/r_p - C^2 P / q_s^2) at the stable operating charge; the
    // second entry is 10 - 4.287... > 0.
    const auto p = reference_single_port();
    const auto roots = oracles::single_port_voltage_roots(p);
    const double q_s = p.C * roots.v_s;
    Mat rz = Mat::Zero(2, 2);
    rz(0, 0) = p.r_l;
    rz(1, 1) = 1.0 / p.r_p - p.C * p.C * p.P / (q_s * q_s);
    CHECK(rz(1, 1) == doctest::Approx(10.0 - 4.2875).epsilon(1e-3));
    CHECK(num::cholesky_pd(rz).positive_definite);
}

TEST_CASE("cholesky_pd factor reproduces the matrix") {
    std::mt19937_64 gen(11);
    Mat b = oracles::random_symmetric(gen, 4);
    Mat spd = b * b.transpose() + 4.0 * Mat::Identity(4, 4);
    auto verdict = num::cholesky_pd(spd);
    REQUIRE(verdict.positive_definite);
    CHECK((verdict.factor * verdict.factor.transpose() - spd).norm() <= 1e-12 * spd.norm());
}

TEST_CASE("cholesky_pd rejects non-finite input") {
    Mat a = Mat::Identity(2, 2);
    a(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(num::cholesky_pd(a), InputError);
}

TEST_CASE("sym_eig_extremes on diagonal and analytic 2x2 cases") {
    Mat d = Mat::Zero(2, 2);
    d.diagonal() << 2.0, 5.0;
    auto ext = num::sym_eig_extremes(d);
    CHECK(ext.min == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ext.max == doctest::Approx(5.0).epsilon(1e-12));

    Mat a(2, 2);
    a << 2, 1, 1, 2;
    ext = num::sym_eig_extremes(a);
    CHECK(ext.min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ext.max == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sym_eig_extremes matches the characteristic-polynomial oracle") {
    std::mt19937_64 gen(2024);
    Mat a = oracles::random_symmetric(gen, 5, 2.0);
    const auto roots = oracles::charpoly_sym_eigenvalues(a);
    const auto ext = num::sym_eig_extremes(a);
    CHECK(std::abs(ext.min - roots.front()) <= 1e-9);
    CHECK(std::abs(ext.max - roots.back()) <= 1e-9);
}

TEST_CASE("positive definiteness agrees with the eigenvalue test") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 5);  // up to 6
        Mat a = oracles::random_symmetric(gen, n);
        a += oracles::uniform(gen, -0.5, 1.5) * Mat::Identity(n, n);
        const bool by_pivots = num::cholesky_pd(a).positive_definite;
        const bool by_eig = num::sym_eig_extremes(a).min > num::pd_tolerance(a);
        CHECK(by_pivots == by_eig);
    }
}

TEST_CASE("eigenvalue extremes shift exactly with the diagonal") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 20; ++trial) {
        Mat a = oracles::random_symmetric(gen, 4);
        const double c = oracles::uniform(gen, -3.0, 3.0);
        const auto base = num::sym_eig_extremes(a);
        const auto shifted = num::sym_eig_extremes(a + c * Mat::Identity(4, 4));
        CHECK(shifted.min == doctest::Approx(base.min + c).epsilon(1e-9));
        CHECK(shifted.max == doctest::Approx(base.max + c).epsilon(1e-9));
    }
}

TEST_CASE("solve_linear on trivial systems") {
    Vec b(2);
    b << 3.0, -1.0;
    CHECK((num::solve_linear(Mat::Identity(2, 2), b) - b).norm() == 0.0);

    Mat d = Mat::Zero(2, 2);
    d.diagonal() << 2.0, 4.0;
    Vec rhs(2);
    rhs << 2.0, 8.0;
    Vec x = num::solve_linear(d, rhs);
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(2.0));
}

TEST_CASE("solve_linear residual bound on a random well-conditioned system") {
    std::mt19937_64 gen(5);
    Mat a = oracles::random_symmetric(gen, 6) + 7.0 * Mat::Identity(6, 6);
    Vec b(6);
    for (int i = 0; i < 6; ++i) b(i) = oracles::uniform(gen, -2.0, 2.0);
    Vec x = num::solve_linear(a, b);
    CHECK((a * x - b).norm() <= 1e-10 * (a.norm() * x.norm() + b.norm()));
}

TEST_CASE("solve_linear rejects singular matrices") {
    Mat a(2, 2);
    a << 1, 2, 2, 4;
    Vec b(2);
    b << 1, 1;
    CHECK_THROWS_AS(num::solve_linear(a, b), SingularMatrixError);
}

TEST_CASE("spectral_abscissa on diagonal and rotation matrices") {
    Mat d = Mat::Zero(2, 2);
    d.diagonal() << -1.0, -2.0;
    CHECK(num::spectral_abscissa(d) == doctest::Approx(-1.0).epsilon(1e-10));

    Mat rot(2, 2);
    rot << 0, -1, 1, 0;
    CHECK(std::abs(num::spectral_abscissa(rot)) <= 1e-8);
}

TEST_CASE("spectral_abscissa sign at the low-voltage single-port point") {
    // 2x2 trace/determinant oracle: at the low-voltage root the Jacobian has
    // negative determinant, hence a real positive eigenvalue.
    const auto p = reference_single_port();
    const auto roots = oracles::single_port_voltage_roots(p);
    const double v_u = roots.v_u;
    Mat jac(2, 2);
    jac << -p.r_l / p.L, -1.0 / p.C, 1.0 / p.L, (-1.0 / p.r_p + p.P / (v_u * v_u)) / p.C;
    REQUIRE(jac.determinant() < 0.0);
    CHECK(num::spectral_abscissa(jac) > 0.0);
}

TEST_CASE("spectral_abscissa is similarity invariant") {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 3);  // up to 4
        Mat a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) a(i, j) = oracles::uniform(gen, -2.0, 2.0);
        }
        Mat t = Mat::Identity(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) t(i, j) += 0.3 * oracles::uniform(gen, -1.0, 1.0);
        }
        Mat sim = t * a * t.inverse();
        CHECK(num::spectral_abscissa(sim) ==
              doctest::Approx(num::spectral_abscissa(a)).epsilon(1e-6));
    }
}
