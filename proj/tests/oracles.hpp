#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they check: a characteristic-polynomial eigenvalue bracket based on a
// plain LU determinant, finite differences, and the shared fixtures.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "pwh/model.hpp"
#include "pwh/sim.hpp"

namespace oracles {

using pwh::Mat;
using pwh::Vec;

inline pwh::SinglePortParams reference_single_port() {
    return {24.0, 0.04, 0.1, 78e-6, 2e-3, 1000.0};
}

// Parameter set with a real equilibrium pair (discriminant 1.54e-4 > 0).
inline pwh::SgParams consistent_sg() {
    return {0.2, 1e-6, 1e-4, 0.0027, 100.0 * M_PI, 2.5};
}

// Two-bus DC chain: source - (Z1,L1) - bus1(C1,Y1,P1) - (Z2,L2) - bus2(C2,Y2,P2).
// Loads are mild so the equilibrium satisfies the gradient lower bounds of
// the general certificate.
inline pwh::MultiportParams multiport22() {
    pwh::MultiportParams p;
    p.L_mat = Mat::Zero(2, 2);
    p.L_mat.diagonal() << 1e-3, 1.5e-3;
    p.C_mat = Mat::Zero(2, 2);
    p.C_mat.diagonal() << 1e-3, 2e-3;
    p.Z_mat = Mat::Zero(2, 2);
    p.Z_mat.diagonal() << 0.1, 0.15;
    p.Y_mat = Mat::Zero(2, 2);
    p.Y_mat.diagonal() << 0.5, 0.4;
    p.Gamma = Mat(2, 2);
    p.Gamma << -1.0, 0.0, 1.0, -1.0;
    p.P_vec = Vec(2);
    p.P_vec << 2.0, 3.0;
    p.u_c = Vec::Zero(4);
    p.u_c(0) = 24.0;
    return p;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * pwh::uniform01(gen);
}

// det(A) by plain Gaussian elimination with partial pivoting; deliberately
// not Eigen's eigensolver path.
inline double lu_determinant(Mat a) {
    const Eigen::Index n = a.rows();
    double det = 1.0;
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index piv = col;
        for (Eigen::Index r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        }
        if (piv != col) {
            a.row(piv).swap(a.row(col));
            det = -det;
        }
        const double p = a(col, col);
        if (p == 0.0) return 0.0;
        det *= p;
        for (Eigen::Index r = col + 1; r < n; ++r) {
            const double f = a(r, col) / p;
            a.row(r).tail(n - col) -= f * a.row(col).tail(n - col);
        }
    }
    return det;
}

// All eigenvalues of a symmetric matrix from sign changes of the
// characteristic polynomial det(A - t I) on a Gershgorin-bounded grid,
// sharpened by bisection. Needs distinct eigenvalues (random matrices).
inline std::vector<double> charpoly_sym_eigenvalues(const Mat& a, double tol = 1e-11) {
    const Eigen::Index n = a.rows();
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double radius = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) radius += std::abs(a(i, j));
        }
        lo = std::min(lo, a(i, i) - radius);
        hi = std::max(hi, a(i, i) + radius);
    }
    lo -= 1.0;
    hi += 1.0;

    auto p = [&](double t) { return lu_determinant(a - t * Mat::Identity(n, n)); };

    const int grid = 4000;
    std::vector<double> roots;
    double prev_t = lo, prev_v = p(lo);
    for (int g = 1; g <= grid; ++g) {
        const double t = lo + (hi - lo) * g / grid;
        const double v = p(t);
        if ((prev_v < 0 && v > 0) || (prev_v > 0 && v < 0) || v == 0.0) {
            double bl = prev_t, bh = t, vl = prev_v;
            while (bh - bl > tol) {
                const double mid = 0.5 * (bl + bh);
                const double vm = p(mid);
                if ((vl < 0 && vm < 0) || (vl > 0 && vm > 0)) {
                    bl = mid;
                    vl = vm;
                } else {
                    bh = mid;
                }
            }
            roots.push_back(0.5 * (bl + bh));
        }
        prev_t = t;
        prev_v = v;
    }
    if (static_cast<Eigen::Index>(roots.size()) != n) {
        throw std::runtime_error("charpoly oracle: grid missed an eigenvalue");
    }
    return roots;
}

// Random symmetric matrix with entries in [-1, 1], scaled.
inline Mat random_symmetric(std::mt19937_64& gen, int n, double scale = 1.0) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            a(i, j) = a(j, i) = scale * uniform(gen, -1.0, 1.0);
        }
    }
    return a;
}

// Central-difference Jacobian of f at x, step 1e-6 * (1 + |x|).
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x) {
    const double h = 1e-6 * (1.0 + x.norm());
    const Eigen::Index n = x.size();
    const Eigen::Index m = f(x).size();
    Mat jac(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Vec xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return jac;
}

// Independently computed single-port stable/unstable capacitor voltages.
struct SinglePortRoots {
    double v_s, v_u, disc;
};
inline SinglePortRoots single_port_voltage_roots(const pwh::SinglePortParams& p) {
    const double a = 1.0 + p.r_l / p.r_p;
    const double disc = p.v_g * p.v_g - 4.0 * a * p.r_l * p.P;
    const double sq = std::sqrt(disc);
    return {(p.v_g + sq) / (2.0 * a), (p.v_g - sq) / (2.0 * a), disc};
}

}  // namespace oracles
