#pragma once

#include "pwh/equilibrium.hpp"
#include "pwh/shifted.hpp"

// Region-of-attraction certificates. Sublevel certificates are sets
// {x : S(x) < k} of the shifted energy, sized so the whole set keeps
// R + Z(x) positive definite; the scalar generator instead gets the
// half-line above its unstable speed, which is forward invariant.

namespace pwh {

enum class RoaMode {
    GeneralSublevel,   // eigenvalue-bound estimate, any symmetric M and R > 0
    DiagonalSublevel,  // exact per-coordinate construction for diagonal M and R
    SgHalfLine,        // scalar generator: all speeds above the unstable root
};

const char* to_string(RoaMode m);

struct RoaEstimate {
    RoaMode mode = RoaMode::GeneralSublevel;
    double level_k = 0.0;  // J; sublevel modes only
    /// General mode: the per-coordinate minimum was restricted to the power
    /// channels instead of all coordinates (Z vanishes off the channels, so
    /// the restriction preserves soundness and enlarges the level).
    bool refined = false;
    Vec gamma;                 // general-mode lower bounds on grad H
    Vec eta;                   // diagonal-mode lower bounds on grad H
    Vec ellipsoid_semi_axes;   // sqrt(2 k / M_ii); empty unless M is diagonal
    double threshold_omega = 0.0;  // half-line mode only
};

/// Eigenvalue-bound sublevel certificate:
///   k = min_i (gamma_i - (M x_bar)_i)^2 / (2 lambda_max(M)),
/// with gamma_i = -G(x_bar)_ii u_bar_i / lambda_min(R). The default takes
/// the minimum over all coordinates; `refined` restricts it to the power
/// channels. Requires R > 0 and (M x_bar)_i > gamma_i on the ranged
/// coordinates (CertificateUnavailable otherwise).
RoaEstimate roa_general(const ShiftedContext& ctx, bool refined = false);

/// Exact construction for diagonal M and R: eta_i = -G(x_bar)_ii u_bar_i / R_ii,
/// k = min over power channels of S at x_bar with coordinate i moved to
/// eta_i / M_ii. Requires (M x_bar)_i > eta_i on every power channel.
/// ModeUnavailable when M or R has off-diagonal entries.
RoaEstimate roa_diagonal(const ShiftedContext& ctx);

/// Smallest admissible capacitor charge for the single-port circuit:
/// q_min = P r_p C^2 / q_bar_s.
double q_min_single_port(const SinglePortParams& p, double q_bar_s);

/// Strict membership: S(x) < k for sublevel modes, (M x)_1 > threshold for
/// the half-line.
bool contains(const RoaEstimate& est, const ShiftedContext& ctx, const Vec& x);

/// Half-line certificate for the generator: threshold at the unstable
/// speed, or 0 when the unstable root was rejected (zero-load case).
RoaEstimate sg_roa(const SgParams& p, const EquilibriumPair& pair);

}  // namespace pwh
