#pragma once

#include <optional>

#include "pwh/model.hpp"

namespace pwh {

enum class Classification {
    ShiftedPassiveStable,  // R + Z(x_bar) > 0: certified by the shifted Lyapunov argument
    LinearlyStable,        // spectral abscissa < 0 but R + Z(x_bar) not positive definite
    Unstable,              // spectral abscissa > 0
    Inconclusive,          // margins inside the decision thresholds
};

const char* to_string(Classification c);

struct Equilibrium {
    Vec x_bar;
    double residual = 0.0;          // |vector_field(x_bar)|
    Classification classification = Classification::Inconclusive;
    double r_plus_z_min_eig = 0.0;  // smallest eigenvalue of R + Z(x_bar)
};

/// The two roots of the scalar load equation, when they exist. A candidate
/// is absent when its state falls outside the admissible set (e.g. zero
/// capacitor voltage at zero load). `discriminant` is the discriminant of
/// the defining quadratic; both candidates are absent when it is negative.
struct EquilibriumPair {
    std::optional<Equilibrium> stable;    // larger root (high-voltage / high-speed branch)
    std::optional<Equilibrium> unstable;  // smaller root
    double discriminant = 0.0;
};

/// Validate and classify a candidate equilibrium state. Throws InputError
/// when the residual exceeds 1e-8 * (1 + |u_c|).
Equilibrium make_equilibrium(const PwhSystem& sys, const Vec& x_bar);

/// Classification rules, with +-1e-8 abscissa thresholds so marginal cases
/// come back Inconclusive rather than mislabeled.
Classification classify(const PwhSystem& sys, const Equilibrium& eq);

/// Damped Newton iteration on the vector field. Steps are halved (up to 60
/// times) until the iterate stays in the admissible set and the residual
/// norm decreases. Convergence is declared at residual
/// <= 1e-10 * (1 + |u_c|); iterates keep polishing while cheap progress is
/// available. Throws DomainError when no admissible step exists and
/// ConvergenceError after 100 iterations.
Equilibrium solve_newton(const PwhSystem& sys, const Vec& x0);

/// Closed-form equilibria of the single-port circuit, from the capacitor
/// voltage quadratic (1 + r_l/r_p) v^2 - v_g v + r_l P = 0. Every root is
/// validated by substitution into the vector field (residual <= 1e-10).
EquilibriumPair single_port_equilibria(const SinglePortParams& p);

/// Closed-form equilibria of the generator, from
/// (D_d + D_m) w^2 - (D_d w* + tau_m) w + P_e = 0, substitution-validated.
EquilibriumPair sg_equilibria(const SgParams& p);

/// Largest load power for which the single-port equilibria are real:
/// r_p v_g^2 / (4 r_l (r_l + r_p)).
double p_max_existence(const SinglePortParams& p);

/// Closed-form threshold on the load power below which R + Z at the stable
/// equilibrium is positive definite: r_p v_g^2 / (r_p + 2 r_l)^2.
double p_max_stability_closed_form(const SinglePortParams& p);

struct StabilityBound {
    double p_max = 0.0;
    bool saturated = false;  // predicate held on all of (0, p_max_existence]
};

/// Independent numeric bound: bisection over P in (0, p_max_existence] on
/// the predicate "R + Z at the stable equilibrium is positive definite",
/// to 1e-6 relative.
StabilityBound p_max_stability_numeric(const SinglePortParams& p);

}  // namespace pwh
