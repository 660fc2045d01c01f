#pragma once

#include "pwh/model.hpp"

// Machinery around a fixed equilibrium x_bar: the shifted energy
// S(x) = H(x) - (x - x_bar)' grad H(x_bar) - H(x_bar), the diagonal
// correction Z(x) = G(x_bar) diag(u_bar) G(x), the rewritten dynamics
//
//     x' = (J - (R + Z(x))) grad S(x) + G(x) (u - u_bar),
//
// and membership tests for the sets where R + Z stays positive definite.

namespace pwh {

class ShiftedContext {
  public:
    /// Requires x_bar inside the admissible set with
    /// |vector_field(x_bar)| <= 1e-8 * (1 + |u_c|). The shifted rewrite is
    /// exact only at an equilibrium, so a reference that fails the residual
    /// check is rejected (InputError), never accepted with a warning.
    ShiftedContext(PwhSystem sys, Vec x_bar);

    const PwhSystem& system() const { return sys_; }
    const Vec& x_bar() const { return x_bar_; }
    const Vec& grad_h_bar() const { return grad_h_bar_; }
    /// Diagonal of the frozen input matrix G(x_bar).
    const Vec& g_bar_diag() const { return g_bar_; }

    /// Shifted energy, evaluated as the quadratic form
    /// (x - x_bar)' M (x - x_bar) / 2. Debug builds cross-check the general
    /// Bregman expression against the quadratic one.
    double shifted_hamiltonian(const Vec& x) const;

    Vec grad_S(const Vec& x) const;   // M (x - x_bar)

    /// Diagonal entries of Z(x): u_bar_i / ((M x_bar)_i (M x)_i) on power
    /// channels, zero elsewhere.
    Vec z_diag(const Vec& x) const;
    Mat z_matrix(const Vec& x) const;
    Mat r_plus_z(const Vec& x) const;

    /// Right-hand side in shifted form; equals vector_field(x) when
    /// u = u_bar and x_bar is an exact equilibrium.
    Vec shifted_rhs(const Vec& x, const Vec& u) const;

    /// Passivity output y = G(x)' grad S(x); vanishes at x_bar.
    Vec output_y(const Vec& x) const;

    /// x admissible and R + Z(x) positive definite.
    bool in_omega_p(const Vec& x) const;
    /// Closure variant: min eigenvalue of R + Z(x) >= -pd_tolerance.
    bool in_omega_p_closure(const Vec& x) const;

    /// Inner approximation by per-coordinate lower bounds: x admissible and
    /// (M x)_i > gamma_i for every coordinate, with
    /// gamma_i = -G(x_bar)_ii u_bar_i / lambda_min(R). Requires R positive
    /// definite.
    bool in_omega_gamma(const Vec& x) const;

    /// The gamma_i bounds above (zero off the power channels).
    Vec gamma_bounds() const;

    bool r_positive_definite() const { return r_pd_; }
    double lambda_min_r() const { return lambda_min_r_; }

  private:
    PwhSystem sys_;
    Vec x_bar_;
    Vec grad_h_bar_;
    Vec g_bar_;
    double h_bar_;
    double lambda_min_r_;
    bool r_pd_;
};

}  // namespace pwh
