#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "pwh/roa.hpp"
#include "pwh/shifted.hpp"

namespace pwh {

enum class StopReason { ReachedTEnd, Converged, LeftDomain, StepUnderflow };
const char* to_string(StopReason r);

enum class IcClass { Converged, Diverged, Timeout };
const char* to_string(IcClass c);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<double> S_values;  // shifted energy about the chosen reference
    StopReason stop_reason = StopReason::ReachedTEnd;
    double t_stop = 0.0;
};

// Embedded Runge-Kutta integrator (Dormand-Prince 5(4)). Step control is
// error-per-unit-step: a step of size h is accepted when the scaled error
// estimate is at most h * tol, which keeps long oscillatory runs from
// accumulating drift. Near the admissible-set boundary the step is bisected
// to localize the exit time to 1e-9 * t_end.
struct IntegrateOptions {
    double t_end = 1.0;
    double rel_tol = 1e-8;   // per unit time; valid range [1e-12, 1e-3]
    double abs_tol = 1e-12;  // valid range [1e-12, 1e-3]

    /// Disable adaptivity and march with this step (convergence studies).
    std::optional<double> fixed_step;

    /// Thin the recorded samples: keep every k-th accepted step. Values < 1
    /// keep only the endpoints. The first and final states are always kept.
    int record_every = 1;

    /// Reference state for the recorded S column; the origin when absent
    /// (S then equals the plain energy H).
    std::optional<Vec> s_reference;

    /// Input override u(t) on the power channels; the system's constant
    /// u_bar when absent.
    std::function<Vec(double)> input;

    /// Stop early (reason Converged) once this returns true. Checked at the
    /// initial state and after every accepted step.
    std::function<bool(double, const Vec&)> stop_when;

    /// Called on every accepted step regardless of record_every.
    std::function<void(double, const Vec&)> observer;
};

Trajectory integrate(const PwhSystem& sys, const Vec& x0, const IntegrateOptions& opt);

struct IcOutcome {
    IcClass cls = IcClass::Timeout;
    double t_stop = 0.0;
};

/// Classify an initial condition against an equilibrium: Converged once
/// |x - x_bar| <= 1e-3 (1 + |x_bar|), Diverged when the trajectory leaves
/// the admissible set or |x - x_bar| exceeds 1e3 (1 + |x_bar|), Timeout
/// otherwise. When `traj_out` is given the full trajectory is kept there.
IcOutcome classify_ic(const PwhSystem& sys, const Equilibrium& eq, const Vec& x0, double t_max,
                      double rel_tol = 1e-7, Trajectory* traj_out = nullptr);

struct RoaValidationReport {
    int n_samples = 0;
    int n_converged = 0;
    int n_diverged = 0;
    int n_timeout = 0;
    std::vector<Vec> counterexamples;  // diverged initial states, in draw order
    /// Worst-case interior margin over the drawn samples: min of 1 - S/k for
    /// sublevel certificates, (omega_0 - threshold) / max(threshold, 1) for
    /// the half-line.
    double boundary_margin = 0.0;
    double t_max = 0.0;
};

/// Monte-Carlo check of a certificate: draw n_samples initial states
/// uniformly inside the certified set (rejection sampling in the bounding
/// box for sublevel sets; a uniform speed interval above the threshold for
/// the half-line) and classify each. Deterministic for a fixed seed.
RoaValidationReport validate_roa(const PwhSystem& sys, const Equilibrium& eq,
                                 const RoaEstimate& est, int n_samples, std::uint64_t seed,
                                 double t_max = 0.5);

struct PassivityCheck {
    /// max over monitored steps of dS/dt - y . (u - u_bar); a passive run
    /// keeps this below 1e-9 * max(1, max S).
    double max_violation = 0.0;
    double max_s = 0.0;
    int n_skipped = 0;        // recorded states outside the closure set
    int first_skipped = -1;   // step index of the first skipped state
};

/// Evaluate the supply-rate inequality pointwise along a recorded
/// trajectory: dS/dt computed exactly as grad S . f(x, u(t)) at each
/// recorded state. States outside the closure of the positive definite set
/// are reported and skipped.
PassivityCheck monitor_passivity(const ShiftedContext& ctx, const Trajectory& traj,
                                 const std::function<Vec(double)>& u_signal);

/// Platform-stable uniform double in [0, 1) from a mt19937_64 draw.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace pwh
