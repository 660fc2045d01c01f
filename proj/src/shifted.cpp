#include "pwh/shifted.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace pwh {

ShiftedContext::ShiftedContext(PwhSystem sys, Vec x_bar)
    : sys_(std::move(sys)), x_bar_(std::move(x_bar)) {
    if (x_bar_.size() != sys_.n()) throw InputError("x_bar has wrong length");
    if (!sys_.in_domain(x_bar_)) {
        throw InputError("x_bar is outside the admissible set");
    }
    const double residual = sys_.vector_field(x_bar_).norm();
    const double tol = 1e-8 * (1.0 + sys_.u_c().norm());
    if (residual > tol) {
        throw InputError("x_bar is not an equilibrium: residual " + std::to_string(residual) +
                         " exceeds " + std::to_string(tol));
    }
    grad_h_bar_ = sys_.grad_H(x_bar_);
    g_bar_ = sys_.input_diag_unchecked(x_bar_);
    h_bar_ = sys_.energy(x_bar_);

    const num::EigExtremes r_eig = num::sym_eig_extremes(sys_.dissipation());
    lambda_min_r_ = r_eig.min;
    r_pd_ = lambda_min_r_ > num::pd_tolerance(sys_.dissipation());
}

double ShiftedContext::shifted_hamiltonian(const Vec& x) const {
    const Vec dx = x - x_bar_;
    const double quadratic = 0.5 * dx.dot(sys_.energy_matrix() * dx);
#ifndef NDEBUG
    // General Bregman form; must agree with the quadratic one since H is
    // a quadratic form here.
    const double general = sys_.energy(x) - dx.dot(grad_h_bar_) - h_bar_;
    assert(std::abs(general - quadratic) <=
           1e-12 * std::max({1.0, std::abs(general), std::abs(quadratic)}));
#endif
    return quadratic;
}

Vec ShiftedContext::grad_S(const Vec& x) const {
    return sys_.energy_matrix() * (x - x_bar_);
}

Vec ShiftedContext::z_diag(const Vec& x) const {
    if (!sys_.in_domain(x)) throw DomainError("Z undefined: state outside the admissible set");
    const Vec g = sys_.input_diag_unchecked(x);
    Vec z = Vec::Zero(sys_.n());
    for (int i : sys_.power_channels()) {
        z(i) = g_bar_(i) * sys_.u_bar()(i) * g(i);
    }
    return z;
}

Mat ShiftedContext::z_matrix(const Vec& x) const {
    return z_diag(x).asDiagonal();
}

Mat ShiftedContext::r_plus_z(const Vec& x) const {
    Mat rz = sys_.dissipation();
    const Vec z = z_diag(x);
    rz.diagonal() += z;
    return rz;
}

Vec ShiftedContext::shifted_rhs(const Vec& x, const Vec& u) const {
    if (u.size() != sys_.n()) throw InputError("input has wrong length");
    if (!sys_.in_domain(x)) {
        throw DomainError("shifted dynamics undefined: state outside the admissible set");
    }
    const Vec grad_s = grad_S(x);
    const Vec z = z_diag(x);
    Vec f = (sys_.structure() - sys_.dissipation()) * grad_s - z.cwiseProduct(grad_s);
    const Vec g = sys_.input_diag_unchecked(x);
    for (int i : sys_.power_channels()) {
        f(i) += g(i) * (u(i) - sys_.u_bar()(i));
    }
    return f;
}

Vec ShiftedContext::output_y(const Vec& x) const {
    if (!sys_.in_domain(x)) throw DomainError("output undefined: state outside the admissible set");
    return sys_.input_diag_unchecked(x).cwiseProduct(grad_S(x));
}

bool ShiftedContext::in_omega_p(const Vec& x) const {
    if (!sys_.in_domain(x)) return false;
    return num::cholesky_pd(r_plus_z(x)).positive_definite;
}

bool ShiftedContext::in_omega_p_closure(const Vec& x) const {
    if (!sys_.in_domain(x)) return false;
    const Mat rz = r_plus_z(x);
    return num::sym_min_eig(rz) >= -num::pd_tolerance(rz);
}

Vec ShiftedContext::gamma_bounds() const {
    if (!r_pd_) throw PreconditionError("gamma bounds need a positive definite dissipation matrix");
    Vec gamma = Vec::Zero(sys_.n());
    for (int i : sys_.power_channels()) {
        gamma(i) = -g_bar_(i) * sys_.u_bar()(i) / lambda_min_r_;
    }
    return gamma;
}

bool ShiftedContext::in_omega_gamma(const Vec& x) const {
    const Vec gamma = gamma_bounds();  // throws if R is not positive definite
    if (!sys_.in_domain(x)) return false;
    const Vec g = sys_.grad_H(x);
    // Every coordinate is bounded, not just the power channels; off the
    // channels the bound degenerates to (M x)_i > 0.
    for (int i = 0; i < sys_.n(); ++i) {
        if (!(g(i) > gamma(i))) return false;
    }
    return true;
}

}  // namespace pwh
