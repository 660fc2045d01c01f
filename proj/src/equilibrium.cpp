#include "pwh/equilibrium.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace pwh {

const char* to_string(Classification c) {
    switch (c) {
        case Classification::ShiftedPassiveStable: return "shifted-passive stable";
        case Classification::LinearlyStable: return "linearly stable";
        case Classification::Unstable: return "unstable";
        case Classification::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

double r_plus_z_min_eig_at(const PwhSystem& sys, const Vec& x_bar) {
    Mat rz = sys.dissipation();
    const Vec g = sys.grad_H(x_bar);
    for (int i : sys.power_channels()) {
        rz(i, i) += sys.u_bar()(i) / (g(i) * g(i));
    }
    return num::sym_min_eig(rz);
}

constexpr double kAbscissaThreshold = 1e-8;

}  // namespace

Classification classify(const PwhSystem& sys, const Equilibrium& eq) {
    Mat rz = sys.dissipation();
    const Vec g = sys.grad_H(eq.x_bar);
    for (int i : sys.power_channels()) {
        rz(i, i) += sys.u_bar()(i) / (g(i) * g(i));
    }
    if (num::sym_min_eig(rz) > num::pd_tolerance(rz)) {
        return Classification::ShiftedPassiveStable;
    }
    const double abscissa = num::spectral_abscissa(sys.jacobian(eq.x_bar));
    if (abscissa > kAbscissaThreshold) return Classification::Unstable;
    if (abscissa < -kAbscissaThreshold) return Classification::LinearlyStable;
    return Classification::Inconclusive;
}

Equilibrium make_equilibrium(const PwhSystem& sys, const Vec& x_bar) {
    if (!sys.in_domain(x_bar)) throw InputError("equilibrium candidate outside the admissible set");
    Equilibrium eq;
    eq.x_bar = x_bar;
    eq.residual = sys.vector_field(x_bar).norm();
    const double tol = 1e-8 * (1.0 + sys.u_c().norm());
    if (eq.residual > tol) {
        throw InputError("equilibrium residual " + std::to_string(eq.residual) +
                         " exceeds tolerance " + std::to_string(tol));
    }
    eq.r_plus_z_min_eig = r_plus_z_min_eig_at(sys, x_bar);
    eq.classification = classify(sys, eq);
    return eq;
}

Equilibrium solve_newton(const PwhSystem& sys, const Vec& x0) {
    if (!sys.in_domain(x0)) throw DomainError("Newton start outside the admissible set");

    const double accept_tol = 1e-10 * (1.0 + sys.u_c().norm());
    const double polish_tol = 1e-13 * (1.0 + sys.u_c().norm());

    Vec x = x0;
    double fnorm = sys.vector_field(x).norm();
    for (int iter = 0; iter < 100; ++iter) {
        if (fnorm <= polish_tol) break;

        const Vec f = sys.vector_field(x);
        Vec step;
        try {
            step = num::solve_linear(sys.jacobian(x), f);
        } catch (const SingularMatrixError&) {
            if (fnorm <= accept_tol) break;  // stalled at an acceptable root
            throw ConvergenceError("Newton: singular Jacobian away from a root");
        }

        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 60; ++halving) {
            const Vec candidate = x - lambda * step;
            if (sys.in_domain(candidate)) {
                const double cnorm = sys.vector_field(candidate).norm();
                if (cnorm < fnorm) {
                    x = candidate;
                    fnorm = cnorm;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            if (fnorm <= accept_tol) break;
            // Even the shortest damped step either exits the set or fails to
            // reduce the residual.
            const Vec probe = x - std::ldexp(1.0, -60) * step;
            if (!sys.in_domain(probe)) {
                throw DomainError("Newton: iterate leaves the admissible set irrecoverably");
            }
            throw ConvergenceError("Newton: no residual decrease along the damped step");
        }
    }
    if (fnorm > accept_tol) {
        throw ConvergenceError("Newton: residual " + std::to_string(fnorm) +
                               " after 100 iterations");
    }
    return make_equilibrium(sys, x);
}

namespace {

// Shared quadratic-root driver for the two closed-form solvers. Builds the
// larger/smaller-root states via `state_of`, rejects states outside the
// admissible set, and substitution-validates the survivors.
EquilibriumPair pair_from_roots(const PwhSystem& sys, double a, double b, double c,
                                const std::function<Vec(double)>& state_of) {
    EquilibriumPair pair;
    pair.discriminant = b * b - 4.0 * a * c;
    if (pair.discriminant < 0.0) return pair;

    // Cancellation-free root pair: the large-magnitude root from the safe
    // branch of the formula, the small one from the product of roots.
    const double sq = std::sqrt(pair.discriminant);
    const double qq = -0.5 * (b + std::copysign(sq, b));
    const double r1 = qq / a;
    const double r2 = (qq != 0.0) ? c / qq : 0.0;
    const double root_hi = std::max(r1, r2);
    const double root_lo = std::min(r1, r2);

    auto admit = [&](double root) -> std::optional<Equilibrium> {
        // The quadratic came from multiplying the steady-state equation by
        // the (positive) load-channel gradient; nonpositive roots are
        // artifacts of that step, not equilibria.
        if (!(root > 0.0)) return std::nullopt;
        const Vec x = state_of(root);
        if (!sys.in_domain(x)) return std::nullopt;
        const double residual = sys.vector_field(x).norm();
        if (residual > 1e-10 * (1.0 + sys.u_c().norm())) {
            throw ConvergenceError("closed-form equilibrium failed substitution: residual " +
                                   std::to_string(residual));
        }
        return make_equilibrium(sys, x);
    };
    pair.stable = admit(root_hi);
    pair.unstable = admit(root_lo);
    return pair;
}

}  // namespace

EquilibriumPair single_port_equilibria(const SinglePortParams& p) {
    const PwhSystem sys = build_single_port(p);
    // Eliminating the inductor current from the steady-state equations gives
    // (1 + r_l/r_p) v^2 - v_g v + r_l P = 0 for the capacitor voltage.
    const double a = 1.0 + p.r_l / p.r_p;
    const double b = -p.v_g;
    const double c = p.r_l * p.P;
    auto state_of = [&p](double v) {
        Vec x(2);
        x << p.L * (p.v_g - v) / p.r_l, p.C * v;
        return x;
    };
    return pair_from_roots(sys, a, b, c, state_of);
}

EquilibriumPair sg_equilibria(const SgParams& p) {
    const PwhSystem sys = build_sg(p);
    const double a = p.D_d + p.D_m;
    const double b = -(p.D_d * p.omega_star + p.tau_m);
    const double c = p.P_e;
    auto state_of = [&p](double omega) {
        Vec x(1);
        x << p.M_inertia * omega;
        return x;
    };
    return pair_from_roots(sys, a, b, c, state_of);
}

double p_max_existence(const SinglePortParams& p) {
    return p.r_p * p.v_g * p.v_g / (4.0 * p.r_l * (p.r_l + p.r_p));
}

double p_max_stability_closed_form(const SinglePortParams& p) {
    const double d = p.r_p + 2.0 * p.r_l;
    return p.r_p * p.v_g * p.v_g / (d * d);
}

StabilityBound p_max_stability_numeric(const SinglePortParams& p) {
    const double p_exist = p_max_existence(p);

    auto stable_pd = [&](double load) {
        SinglePortParams q = p;
        q.P = load;
        EquilibriumPair pair = single_port_equilibria(q);
        if (!pair.stable) return false;
        return pair.stable->r_plus_z_min_eig > 0.0;
    };

    if (stable_pd(p_exist)) return {p_exist, true};

    double lo = 1e-9 * p_exist;
    double hi = p_exist;
    if (!stable_pd(lo)) return {0.0, false};
    while ((hi - lo) > 1e-6 * std::max(1.0, lo)) {
        const double mid = 0.5 * (lo + hi);
        (stable_pd(mid) ? lo : hi) = mid;
    }
    return {lo, false};
}

}  // namespace pwh
