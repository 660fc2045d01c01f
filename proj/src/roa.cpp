#include "pwh/roa.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pwh {

const char* to_string(RoaMode m) {
    switch (m) {
        case RoaMode::GeneralSublevel: return "general sublevel";
        case RoaMode::DiagonalSublevel: return "diagonal sublevel";
        case RoaMode::SgHalfLine: return "half-line";
    }
    return "?";
}

namespace {

Vec semi_axes_if_diagonal(const PwhSystem& sys, double k) {
    if (!sys.m_diagonal()) return Vec();
    Vec axes(sys.n());
    for (int i = 0; i < sys.n(); ++i) {
        axes(i) = std::sqrt(2.0 * k / sys.energy_matrix()(i, i));
    }
    return axes;
}

}  // namespace

RoaEstimate roa_general(const ShiftedContext& ctx, bool refined) {
    const PwhSystem& sys = ctx.system();
    if (!ctx.r_positive_definite()) {
        throw PreconditionError("general certificate needs a positive definite dissipation matrix");
    }

    const Vec gamma = ctx.gamma_bounds();
    const Vec grad_bar = ctx.grad_h_bar();
    const double lambda_max_m = num::sym_eig_extremes(sys.energy_matrix()).max;

    std::vector<int> indices;
    if (refined) {
        indices = sys.power_channels();
        if (indices.empty()) {
            throw CertificateUnavailable("no power channels: sublevel certificate not applicable");
        }
    } else {
        for (int i = 0; i < sys.n(); ++i) indices.push_back(i);
    }

    double k = std::numeric_limits<double>::infinity();
    for (int i : indices) {
        const double margin = grad_bar(i) - gamma(i);
        if (!(margin > 0.0)) {
            throw CertificateUnavailable(
                "equilibrium violates the gradient lower bound on coordinate " +
                std::to_string(i + 1) + ": (M x_bar)_i = " + std::to_string(grad_bar(i)) +
                " <= gamma_i = " + std::to_string(gamma(i)));
        }
        k = std::min(k, margin * margin / (2.0 * lambda_max_m));
    }

    RoaEstimate est;
    est.mode = RoaMode::GeneralSublevel;
    est.level_k = k;
    est.refined = refined;
    est.gamma = gamma;
    est.ellipsoid_semi_axes = semi_axes_if_diagonal(sys, k);
    return est;
}

RoaEstimate roa_diagonal(const ShiftedContext& ctx) {
    const PwhSystem& sys = ctx.system();
    if (!sys.m_diagonal() || !sys.r_diagonal()) {
        throw ModeUnavailable("diagonal certificate needs diagonal M and R; use the general estimate");
    }
    if (!ctx.r_positive_definite()) {
        throw PreconditionError("diagonal certificate needs a positive definite dissipation matrix");
    }
    if (sys.power_channels().empty()) {
        throw CertificateUnavailable("no power channels: sublevel certificate not applicable");
    }

    const Vec grad_bar = ctx.grad_h_bar();
    Vec eta = Vec::Zero(sys.n());
    double k = std::numeric_limits<double>::infinity();
    for (int i : sys.power_channels()) {
        eta(i) = -ctx.g_bar_diag()(i) * sys.u_bar()(i) / sys.dissipation()(i, i);
        const double margin = grad_bar(i) - eta(i);
        // With diagonal M and R this bound characterizes the positive
        // definite region exactly, so membership is tested against eta, not
        // the coarser eigenvalue bound.
        if (!(margin > 0.0)) {
            throw CertificateUnavailable(
                "equilibrium violates the gradient lower bound on power channel " +
                std::to_string(i + 1) + ": (M x_bar)_i = " + std::to_string(grad_bar(i)) +
                " <= eta_i = " + std::to_string(eta(i)));
        }
        // S at x_bar with coordinate i moved to eta_i / M_ii.
        const double m_ii = sys.energy_matrix()(i, i);
        k = std::min(k, margin * margin / (2.0 * m_ii));
    }

    RoaEstimate est;
    est.mode = RoaMode::DiagonalSublevel;
    est.level_k = k;
    est.eta = eta;
    est.ellipsoid_semi_axes = semi_axes_if_diagonal(sys, k);
    return est;
}

double q_min_single_port(const SinglePortParams& p, double q_bar_s) {
    if (!(q_bar_s > 0.0)) throw InputError("q_bar_s must be positive");
    const double q_min = p.P * p.r_p * p.C * p.C / q_bar_s;
    // Product identity of the formula; a violation would mean corrupted
    // arithmetic rather than bad input.
    if (std::abs(q_min * q_bar_s - p.P * p.r_p * p.C * p.C) >
        1e-9 * std::max(1.0, p.P * p.r_p * p.C * p.C)) {
        throw ConvergenceError("q_min identity check failed");
    }
    return q_min;
}

bool contains(const RoaEstimate& est, const ShiftedContext& ctx, const Vec& x) {
    if (est.mode == RoaMode::SgHalfLine) {
        return ctx.system().grad_H(x)(0) > est.threshold_omega;
    }
    return ctx.shifted_hamiltonian(x) < est.level_k;
}

RoaEstimate sg_roa(const SgParams& p, const EquilibriumPair& pair) {
    if (!pair.stable) {
        throw CertificateUnavailable("no stable equilibrium: half-line certificate unavailable");
    }
    RoaEstimate est;
    est.mode = RoaMode::SgHalfLine;
    est.threshold_omega = 0.0;
    if (pair.unstable) {
        est.threshold_omega = pair.unstable->x_bar(0) / p.M_inertia;
    }
    return est;
}

}  // namespace pwh
