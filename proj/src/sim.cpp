#include "pwh/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pwh {

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::ReachedTEnd: return "reached t_end";
        case StopReason::Converged: return "converged";
        case StopReason::LeftDomain: return "left domain";
        case StopReason::StepUnderflow: return "step underflow";
    }
    return "?";
}

const char* to_string(IcClass c) {
    switch (c) {
        case IcClass::Converged: return "converged";
        case IcClass::Diverged: return "diverged";
        case IcClass::Timeout: return "timeout";
    }
    return "?";
}

namespace {

// Dormand-Prince 5(4) tableau (FSAL).
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,    0.0,        500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
// b5 - b4: weights of the embedded error estimate.
constexpr double kE[7] = {71.0 / 57600,       0.0,        -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

struct Stepper {
    const PwhSystem& sys;
    const std::function<Vec(double)>& input;
    const Vec& u_const;

    Vec u_at(double t) const { return input ? input(t) : u_const; }
    Vec rhs(double t, const Vec& x) const { return sys.rhs_unchecked(x, u_at(t)); }

    // One DOPRI step from (t, x) with derivative k1 already evaluated.
    // Returns the 5th-order state, the error estimate, and k at the new
    // state (FSAL).
    bool step(double t, const Vec& x, const Vec& k1, double h, Vec& x_new, Vec& err,
              Vec& k_new) const {
        Vec k[7];
        k[0] = k1;
        for (int s = 1; s < 7; ++s) {
            Vec xs = x;
            for (int j = 0; j < s; ++j) xs += (h * kA[s][j]) * k[j];
            if (!xs.allFinite()) return false;
            k[s] = rhs(t + kC[s] * h, xs);
            if (!k[s].allFinite()) return false;
        }
        x_new = x;
        for (int s = 0; s < 7; ++s) {
            if (kB5[s] != 0.0) x_new += (h * kB5[s]) * k[s];
        }
        err = Vec::Zero(x.size());
        for (int s = 0; s < 7; ++s) err += (h * kE[s]) * k[s];
        k_new = k[6];  // stage 7 is evaluated at (t + h, x_new)
        return x_new.allFinite();
    }
};

double error_norm(const Vec& err, const Vec& x, const Vec& x_new, double rel_tol, double abs_tol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = abs_tol + rel_tol * std::max(std::abs(x(i)), std::abs(x_new(i)));
        const double e = err(i) / scale;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

double initial_step(const Stepper& st, const Vec& x0, double t_end, double rel_tol,
                    double abs_tol) {
    const Vec f0 = st.rhs(0.0, x0);
    const double d0 = x0.norm() + abs_tol;
    const double d1 = f0.norm();
    double h = (d1 > 1e-12 * d0) ? 0.01 * d0 / d1 : 1e-6 * t_end;
    h = std::min(h, 0.1 * t_end);
    // Crude second-derivative probe, then keep the conservative guess.
    const Vec x1 = x0 + h * f0;
    if (x1.allFinite()) {
        const Vec f1 = st.rhs(h, x1);
        if (f1.allFinite()) {
            const double d2 = (f1 - f0).norm() / h;
            if (d2 > 1e-12) {
                h = std::min(h, std::sqrt(rel_tol * (d0 + 1.0) / d2));
            }
        }
    }
    return std::max(h, 1e-12 * t_end);
}

}  // namespace

Trajectory integrate(const PwhSystem& sys, const Vec& x0, const IntegrateOptions& opt) {
    if (!sys.in_domain(x0)) throw DomainError("initial state outside the admissible set");
    if (!(opt.t_end > 0.0)) throw InputError("t_end must be positive");
    if (opt.rel_tol < 1e-12 || opt.rel_tol > 1e-3) throw InputError("rel_tol outside [1e-12, 1e-3]");
    if (opt.abs_tol < 1e-12 || opt.abs_tol > 1e-3) throw InputError("abs_tol outside [1e-12, 1e-3]");

    const Vec s_ref = opt.s_reference.value_or(Vec::Zero(sys.n()));
    if (s_ref.size() != sys.n()) throw InputError("s_reference has wrong length");
    const Mat& m = sys.energy_matrix();
    auto s_of = [&](const Vec& x) {
        const Vec dx = x - s_ref;
        return 0.5 * dx.dot(m * dx);
    };

    // Exit thresholds per power channel, relative to the initial gradient.
    const Vec grad0 = sys.grad_H(x0);
    auto inside = [&](const Vec& x) {
        if (!x.allFinite()) return false;
        const Vec g = sys.grad_H(x);
        for (int i : sys.power_channels()) {
            if (!(g(i) > 1e-9 * grad0(i))) return false;
        }
        return true;
    };
    // Finite-time collapse guard. A load channel drives its own gradient to
    // zero with g g' ~ const, so no error-controlled step can reach the exit
    // threshold. Once the field predicts boundary contact within the exit
    // localization tolerance, the exit is considered localized.
    auto exit_imminent = [&](const Vec& x, const Vec& dxdt) {
        if (!x.allFinite() || !dxdt.allFinite()) return true;
        const Vec g = sys.grad_H(x);
        const Vec dg = sys.energy_matrix() * dxdt;
        for (int i : sys.power_channels()) {
            if (dg(i) < 0.0 && g(i) < -2e-9 * opt.t_end * dg(i)) return true;
        }
        return false;
    };

    Stepper st{sys, opt.input, sys.u_bar()};

    Trajectory traj;
    const int record_every = opt.record_every;
    long step_index = 0;
    auto record = [&](double t, const Vec& x) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.S_values.push_back(s_of(x));
    };
    auto maybe_record = [&](double t, const Vec& x) {
        if (opt.observer) opt.observer(t, x);
        if (record_every >= 1 && (step_index % record_every) == 0) record(t, x);
    };
    auto finish = [&](double t, const Vec& x, StopReason reason) {
        if (traj.times.empty() || traj.times.back() != t) record(t, x);
        traj.stop_reason = reason;
        traj.t_stop = t;
        return traj;
    };

    double t = 0.0;
    Vec x = x0;
    record(t, x);
    if (opt.observer) opt.observer(t, x);
    if (opt.stop_when && opt.stop_when(t, x)) return finish(t, x, StopReason::Converged);

    const bool fixed = opt.fixed_step.has_value();
    double h = fixed ? *opt.fixed_step : initial_step(st, x0, opt.t_end, opt.rel_tol, opt.abs_tol);
    if (fixed && !(h > 0.0)) throw InputError("fixed_step must be positive");
    const double h_min = 1e-15 * opt.t_end;
    const double h_max = opt.t_end;

    Vec k1 = st.rhs(t, x);
    Vec x_new, err, k_new;

    while (t < opt.t_end) {
        h = std::min(h, opt.t_end - t);

        const bool ok = st.step(t, x, k1, h, x_new, err, k_new);

        if (!fixed) {
            // Error per unit step: accept when the scaled estimate is at
            // most h * rel-scale. Estimate ~ h^5, so the controller exponent
            // is 1/4.
            const double e_norm =
                ok ? error_norm(err, x, x_new, opt.rel_tol, opt.abs_tol) : std::numeric_limits<double>::infinity();
            const double target = h;
            if (!(e_norm <= target)) {
                const double shrink =
                    std::isfinite(e_norm) ? std::max(0.2, 0.9 * std::pow(target / e_norm, 0.25)) : 0.2;
                h *= shrink;
                if (h < 1e-9 * opt.t_end && exit_imminent(x, k1)) {
                    ++step_index;
                    return finish(t, x, StopReason::LeftDomain);
                }
                if (h < h_min) return finish(t, x, StopReason::StepUnderflow);
                continue;
            }
            const double grow =
                (e_norm > 0.0) ? std::min(5.0, 0.9 * std::pow(target / e_norm, 0.25)) : 5.0;
            const double h_next = std::min(h * grow, h_max);

            if (!inside(x_new)) {
                // Bisect the accepted step to localize the exit time.
                double lo = 0.0, hi = h;
                Vec x_probe = x_new;
                while (hi - lo > 1e-9 * opt.t_end) {
                    const double mid = 0.5 * (lo + hi);
                    Vec xm, em, km;
                    const bool probe_ok = st.step(t, x, k1, mid, xm, em, km);
                    if (probe_ok && inside(xm)) {
                        lo = mid;
                    } else {
                        hi = mid;
                        if (probe_ok) x_probe = xm;
                    }
                }
                ++step_index;
                // The final sample documents the exit; it may sit outside.
                return finish(t + hi, x_probe, StopReason::LeftDomain);
            }

            t += h;
            x = x_new;
            k1 = k_new;
            h = h_next;
        } else {
            if (!ok) return finish(t, x, StopReason::StepUnderflow);
            if (!inside(x_new)) {
                ++step_index;
                return finish(t + h, x_new, StopReason::LeftDomain);
            }
            t += h;
            x = x_new;
            k1 = k_new;
        }

        ++step_index;
        maybe_record(t, x);
        if (opt.stop_when && opt.stop_when(t, x)) return finish(t, x, StopReason::Converged);
    }
    return finish(t, x, StopReason::ReachedTEnd);
}

IcOutcome classify_ic(const PwhSystem& sys, const Equilibrium& eq, const Vec& x0, double t_max,
                      double rel_tol, Trajectory* traj_out) {
    if (!sys.in_domain(x0)) throw DomainError("initial state outside the admissible set");
    const double conv_radius = 1e-3 * (1.0 + eq.x_bar.norm());
    const double div_radius = 1e3 * (1.0 + eq.x_bar.norm());

    IntegrateOptions opt;
    opt.t_end = t_max;
    opt.rel_tol = rel_tol;
    opt.record_every = traj_out ? 1 : 0;  // endpoints only unless the caller wants the path
    opt.s_reference = eq.x_bar;
    opt.stop_when = [&](double, const Vec& x) {
        const double d = (x - eq.x_bar).norm();
        return d <= conv_radius || d >= div_radius;
    };

    const Trajectory traj = integrate(sys, x0, opt);
    if (traj_out) *traj_out = traj;
    const double d_final = (traj.states.back() - eq.x_bar).norm();
    switch (traj.stop_reason) {
        case StopReason::Converged:
            return {d_final <= conv_radius ? IcClass::Converged : IcClass::Diverged, traj.t_stop};
        case StopReason::LeftDomain:
            return {IcClass::Diverged, traj.t_stop};
        case StopReason::ReachedTEnd:
        case StopReason::StepUnderflow:
            return {IcClass::Timeout, traj.t_stop};
    }
    return {IcClass::Timeout, traj.t_stop};
}

RoaValidationReport validate_roa(const PwhSystem& sys, const Equilibrium& eq,
                                 const RoaEstimate& est, int n_samples, std::uint64_t seed,
                                 double t_max) {
    if (n_samples < 1) throw InputError("n_samples must be positive");
    std::mt19937_64 gen(seed);

    RoaValidationReport report;
    report.n_samples = n_samples;
    report.t_max = t_max;
    report.boundary_margin = std::numeric_limits<double>::infinity();

    ShiftedContext ctx(sys, eq.x_bar);

    std::function<Vec()> draw;
    std::function<double(const Vec&)> margin_of;
    if (est.mode == RoaMode::SgHalfLine) {
        const double omega_bar = sys.grad_H(eq.x_bar)(0);
        const double lo = est.threshold_omega;
        const double span = 2.0 * std::max(omega_bar - lo, 0.1 * std::max(omega_bar, 1.0));
        const double m11 = sys.energy_matrix()(0, 0);
        draw = [&gen, lo, span, m11]() {
            Vec x(1);
            x(0) = (lo + uniform01(gen) * span) / m11;
            return x;
        };
        margin_of = [&sys, lo](const Vec& x) {
            return (sys.grad_H(x)(0) - lo) / std::max(lo, 1.0);
        };
    } else {
        // Rejection sampling in the bounding box of {S < k}; the box
        // half-width along coordinate i is sqrt(2 k inv(M)_ii) for any
        // symmetric positive definite M.
        const Mat m_inv = sys.energy_matrix().llt().solve(Mat::Identity(sys.n(), sys.n()));
        Vec half(sys.n());
        for (int i = 0; i < sys.n(); ++i) half(i) = std::sqrt(2.0 * est.level_k * m_inv(i, i));
        draw = [&gen, &ctx, &eq, half, k = est.level_k]() {
            while (true) {
                Vec x = eq.x_bar;
                for (Eigen::Index i = 0; i < x.size(); ++i) {
                    x(i) += (2.0 * uniform01(gen) - 1.0) * half(i);
                }
                if (ctx.shifted_hamiltonian(x) < k) return x;
            }
        };
        margin_of = [&ctx, k = est.level_k](const Vec& x) {
            return 1.0 - ctx.shifted_hamiltonian(x) / k;
        };
    }

    for (int s = 0; s < n_samples; ++s) {
        const Vec x0 = draw();
        report.boundary_margin = std::min(report.boundary_margin, margin_of(x0));
        const IcOutcome outcome = classify_ic(sys, eq, x0, t_max);
        switch (outcome.cls) {
            case IcClass::Converged: ++report.n_converged; break;
            case IcClass::Diverged:
                ++report.n_diverged;
                report.counterexamples.push_back(x0);
                break;
            case IcClass::Timeout: ++report.n_timeout; break;
        }
    }
    return report;
}

PassivityCheck monitor_passivity(const ShiftedContext& ctx, const Trajectory& traj,
                                 const std::function<Vec(double)>& u_signal) {
    PassivityCheck check;
    check.max_violation = -std::numeric_limits<double>::infinity();
    const Vec& u_bar = ctx.system().u_bar();
    for (size_t i = 0; i < traj.states.size(); ++i) {
        const Vec& x = traj.states[i];
        if (!ctx.in_omega_p_closure(x)) {
            if (check.first_skipped < 0) check.first_skipped = static_cast<int>(i);
            ++check.n_skipped;
            continue;
        }
        const double t = traj.times[i];
        const Vec u = u_signal ? u_signal(t) : u_bar;
        const Vec f = ctx.system().vector_field(x, u);
        const double s_dot = ctx.grad_S(x).dot(f);
        const double supply = ctx.output_y(x).dot(u - u_bar);
        check.max_violation = std::max(check.max_violation, s_dot - supply);
        check.max_s = std::max(check.max_s, ctx.shifted_hamiltonian(x));
    }
    return check;
}

}  // namespace pwh
