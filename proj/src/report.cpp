#include "pwh/report.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace pwh {

namespace {

std::string fmt(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string fmt_vec(const Vec& v, const char* spec = "%.10g") {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v(i), spec);
    }
    return out + "]";
}

EquilibriumSummary summarize_equilibrium(const PwhSystem& sys, const Equilibrium& eq,
                                         std::string label) {
    EquilibriumSummary s;
    s.label = std::move(label);
    s.eq = eq;
    s.grad_h = sys.grad_H(eq.x_bar);
    s.abscissa = num::spectral_abscissa(sys.jacobian(eq.x_bar));
    return s;
}

CertificateSummary try_certificate(const std::string& label,
                                   const std::function<RoaEstimate()>& make) {
    CertificateSummary s;
    s.label = label;
    try {
        s.est = make();
    } catch (const CertificateUnavailable& e) {
        s.unavailable_reason = e.what();
    } catch (const ModeUnavailable& e) {
        s.unavailable_reason = e.what();
    } catch (const PreconditionError& e) {
        s.unavailable_reason = e.what();
    }
    return s;
}

const char* kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::SinglePort: return "single_port";
        case ModelKind::Sg: return "sg";
        case ModelKind::Multiport: return "multiport";
        case ModelKind::Raw: return "raw";
    }
    return "?";
}

// Newton with load continuation: solve the zero-load linear network first,
// then ramp the power channels up in quarters.
Equilibrium solve_general_equilibrium(const PwhSystem& sys) {
    Vec x = num::solve_linear((sys.structure() - sys.dissipation()) * sys.energy_matrix(),
                              -sys.u_c());
    if (!sys.in_domain(x)) {
        throw NoEquilibriumError("zero-load operating point is outside the admissible set");
    }
    for (double scale : {0.25, 0.5, 0.75, 1.0}) {
        PwhSystem scaled(sys.structure(), sys.dissipation(), sys.energy_matrix(),
                         sys.power_channels(), scale * sys.u_bar(), sys.u_c());
        try {
            x = solve_newton(scaled, x).x_bar;
        } catch (const std::runtime_error& e) {
            throw NoEquilibriumError(std::string("continuation failed at load scale ") +
                                     fmt(scale, "%.2g") + ": " + e.what());
        }
    }
    return make_equilibrium(sys, x);
}

void add_validation(AnalysisReport& report, const PwhSystem& sys, const AnalyzeOptions& opt,
                    double t_max) {
    if (opt.validate_samples <= 0) return;
    const Equilibrium* stable = nullptr;
    for (const auto& s : report.equilibria) {
        if (s.eq.classification == Classification::ShiftedPassiveStable) {
            stable = &s.eq;
            break;
        }
    }
    if (!stable) {
        report.notes.push_back("validation skipped: no certified stable equilibrium");
        return;
    }
    for (const auto& cert : report.certificates) {
        if (!cert.available()) continue;
        report.validation =
            validate_roa(sys, *stable, cert.est, opt.validate_samples, opt.seed, t_max);
        report.validated_certificate = cert.label;
        return;
    }
    report.notes.push_back("validation skipped: no certificate available");
}

}  // namespace

Equilibrium find_operating_point(const ModelDocument& doc) {
    if (doc.kind == ModelKind::SinglePort) {
        EquilibriumPair pair = single_port_equilibria(*doc.single_port);
        if (!pair.stable) {
            throw NoEquilibriumError("no stable equilibrium",
                                     p_max_existence(*doc.single_port));
        }
        return *pair.stable;
    }
    if (doc.kind == ModelKind::Sg) {
        EquilibriumPair pair = sg_equilibria(*doc.sg);
        if (!pair.stable) throw NoEquilibriumError("no stable equilibrium");
        return *pair.stable;
    }
    return solve_general_equilibrium(doc.system);
}

AnalysisReport analyze_model(const ModelDocument& doc, const AnalyzeOptions& opt) {
    AnalysisReport report;
    report.kind = kind_name(doc.kind);
    report.n = doc.system.n();
    report.units_note = doc.units_note;
    report.seed = opt.seed;
    const PwhSystem& sys = doc.system;

    if (doc.kind == ModelKind::SinglePort) {
        const SinglePortParams& p = *doc.single_port;
        EquilibriumPair pair = single_port_equilibria(p);
        if (!pair.stable && !pair.unstable) {
            throw NoEquilibriumError(
                "no real equilibrium: load " + fmt(p.P) + " W exceeds the existence bound " +
                    fmt(p_max_existence(p)) + " W",
                p_max_existence(p));
        }

        PowerLimitSummary limits;
        limits.existence = p_max_existence(p);
        limits.stability_closed_form = p_max_stability_closed_form(p);
        const StabilityBound numeric = p_max_stability_numeric(p);
        limits.stability_numeric = numeric.p_max;
        limits.numeric_saturated = numeric.saturated;
        limits.load = p.P;

        if (pair.stable) {
            report.equilibria.push_back(
                summarize_equilibrium(sys, *pair.stable, "stable branch (high voltage)"));
            const double v_s = sys.grad_H(pair.stable->x_bar)(1);
            limits.margin_at_load = v_s * v_s / p.r_p;
        }
        if (pair.unstable) {
            report.equilibria.push_back(
                summarize_equilibrium(sys, *pair.unstable, "unstable branch (low voltage)"));
        }
        report.limits = limits;

        if (std::abs(limits.stability_closed_form - limits.stability_numeric) >
            0.01 * limits.stability_closed_form) {
            report.notes.push_back("discrepancy: closed-form stability threshold " +
                                   fmt(limits.stability_closed_form, "%.6g") +
                                   " W vs numeric bisection " +
                                   fmt(limits.stability_numeric, "%.6g") + " W");
        }
        if (pair.stable && std::abs(limits.margin_at_load - limits.stability_closed_form) >
                               0.01 * limits.stability_closed_form) {
            const double pct = 100.0 *
                               std::abs(limits.margin_at_load - limits.stability_closed_form) /
                               limits.stability_closed_form;
            report.notes.push_back(
                "note: operating-point margin " + fmt(limits.margin_at_load, "%.6g") +
                " W differs from the closed-form threshold " +
                fmt(limits.stability_closed_form, "%.6g") + " W by " + fmt(pct, "%.1f") +
                "%; the closed form is the self-consistent limit, the margin holds the present "
                "operating voltage fixed");
        }

        if (pair.stable && pair.stable->classification == Classification::ShiftedPassiveStable) {
            ShiftedContext ctx(sys, pair.stable->x_bar);
            report.certificates.push_back(
                try_certificate("diagonal sublevel", [&] { return roa_diagonal(ctx); }));
            report.certificates.push_back(try_certificate(
                opt.refined_roa ? "general sublevel (refined)" : "general sublevel",
                [&] { return roa_general(ctx, opt.refined_roa); }));
        }
        add_validation(report, sys, opt, 0.5);
        return report;
    }

    if (doc.kind == ModelKind::Sg) {
        const SgParams& p = *doc.sg;
        EquilibriumPair pair = sg_equilibria(p);
        if (!pair.stable && !pair.unstable) {
            const double bound =
                std::pow(p.D_d * p.omega_star + p.tau_m, 2) / (4.0 * (p.D_d + p.D_m));
            throw NoEquilibriumError("no real equilibrium: electrical load " + fmt(p.P_e) +
                                         " exceeds the existence bound " + fmt(bound),
                                     bound);
        }
        if (pair.stable) {
            report.equilibria.push_back(
                summarize_equilibrium(sys, *pair.stable, "stable branch (high speed)"));
        }
        if (pair.unstable) {
            report.equilibria.push_back(
                summarize_equilibrium(sys, *pair.unstable, "unstable branch (low speed)"));
        }
        report.certificates.push_back(
            try_certificate("half-line", [&] { return sg_roa(p, pair); }));
        add_validation(report, sys, opt, 60000.0);
        return report;
    }

    // multiport / raw: general-matrix path through Newton.
    Equilibrium eq = solve_general_equilibrium(sys);
    report.equilibria.push_back(summarize_equilibrium(sys, eq, "operating point (Newton)"));
    if (eq.classification == Classification::ShiftedPassiveStable) {
        ShiftedContext ctx(sys, eq.x_bar);
        if (sys.m_diagonal() && sys.r_diagonal()) {
            report.certificates.push_back(
                try_certificate("diagonal sublevel", [&] { return roa_diagonal(ctx); }));
        }
        report.certificates.push_back(try_certificate(
            opt.refined_roa ? "general sublevel (refined)" : "general sublevel",
            [&] { return roa_general(ctx, opt.refined_roa); }));
    }
    add_validation(report, sys, opt, 0.5);
    return report;
}

std::string render_text(const AnalysisReport& r) {
    std::ostringstream out;
    out << "model: " << r.kind << ", n = " << r.n;
    if (!r.units_note.empty()) out << ", units: " << r.units_note;
    out << "\n\n";

    out << "equilibria:\n";
    for (const auto& s : r.equilibria) {
        out << "  " << s.label << ":\n";
        out << "    x_bar    = " << fmt_vec(s.eq.x_bar) << "\n";
        out << "    grad H   = " << fmt_vec(s.grad_h) << "\n";
        out << "    residual = " << fmt(s.eq.residual, "%.3g")
            << ", class = " << to_string(s.eq.classification)
            << ", min eig(R+Z) = " << fmt(s.eq.r_plus_z_min_eig, "%.6g")
            << ", abscissa = " << fmt(s.abscissa, "%.6g") << "\n";
    }

    if (r.limits) {
        const auto& l = *r.limits;
        out << "\nload power limits [W]:\n";
        out << "  existence bound:                    " << fmt(l.existence) << "\n";
        out << "  stability threshold (closed form):  " << fmt(l.stability_closed_form) << "\n";
        out << "  stability threshold (numeric):      " << fmt(l.stability_numeric)
            << (l.numeric_saturated ? "  [saturated at the existence bound]" : "") << "\n";
        out << "  margin at operating point:          " << fmt(l.margin_at_load) << "  (at P = "
            << fmt(l.load) << ")\n";
    }

    if (!r.certificates.empty()) {
        out << "\ncertificates:\n";
        for (const auto& c : r.certificates) {
            out << "  " << c.label << ": ";
            if (!c.available()) {
                out << "unavailable (" << c.unavailable_reason << ")\n";
                continue;
            }
            if (c.est.mode == RoaMode::SgHalfLine) {
                out << "speeds above " << fmt(c.est.threshold_omega) << "\n";
            } else {
                out << "k = " << fmt(c.est.level_k) << " J";
                if (c.est.ellipsoid_semi_axes.size() > 0) {
                    out << ", semi-axes = " << fmt_vec(c.est.ellipsoid_semi_axes, "%.6g");
                }
                if (c.est.refined) out << ", index set: power channels";
                out << "\n";
            }
        }
    }

    if (r.validation) {
        const auto& v = *r.validation;
        out << "\nvalidation of " << r.validated_certificate << " (seed " << r.seed << ", "
            << v.n_samples << " samples, t_max " << fmt(v.t_max, "%.6g") << " s):\n";
        out << "  converged " << v.n_converged << ", diverged " << v.n_diverged << ", timeout "
            << v.n_timeout << "; worst interior margin " << fmt(v.boundary_margin, "%.3g")
            << "\n";
        if (!v.counterexamples.empty()) {
            out << "  counterexamples:\n";
            for (const auto& x : v.counterexamples) out << "    " << fmt_vec(x) << "\n";
        }
    }

    if (!r.notes.empty()) {
        out << "\n";
        for (const auto& n : r.notes) out << n << "\n";
    }
    return out.str();
}

std::string render_json(const AnalysisReport& r) {
    using nlohmann::json;
    json j;
    j["kind"] = r.kind;
    j["n"] = r.n;
    if (!r.units_note.empty()) j["units"] = r.units_note;

    j["equilibria"] = json::array();
    for (const auto& s : r.equilibria) {
        json e;
        e["label"] = s.label;
        e["x_bar"] = std::vector<double>(s.eq.x_bar.data(), s.eq.x_bar.data() + s.eq.x_bar.size());
        e["grad_H"] = std::vector<double>(s.grad_h.data(), s.grad_h.data() + s.grad_h.size());
        e["residual"] = s.eq.residual;
        e["class"] = to_string(s.eq.classification);
        e["r_plus_z_min_eig"] = s.eq.r_plus_z_min_eig;
        e["spectral_abscissa"] = s.abscissa;
        j["equilibria"].push_back(e);
    }

    if (r.limits) {
        json l;
        l["existence"] = r.limits->existence;
        l["stability_closed_form"] = r.limits->stability_closed_form;
        l["stability_numeric"] = r.limits->stability_numeric;
        l["numeric_saturated"] = r.limits->numeric_saturated;
        l["margin_at_operating_point"] = r.limits->margin_at_load;
        l["load"] = r.limits->load;
        j["power_limits"] = l;
    }

    j["certificates"] = json::array();
    for (const auto& c : r.certificates) {
        json e;
        e["label"] = c.label;
        if (!c.available()) {
            e["unavailable"] = c.unavailable_reason;
        } else {
            e["mode"] = to_string(c.est.mode);
            if (c.est.mode == RoaMode::SgHalfLine) {
                e["threshold_omega"] = c.est.threshold_omega;
            } else {
                e["level_k"] = c.est.level_k;
                e["refined"] = c.est.refined;
                if (c.est.ellipsoid_semi_axes.size() > 0) {
                    e["semi_axes"] = std::vector<double>(
                        c.est.ellipsoid_semi_axes.data(),
                        c.est.ellipsoid_semi_axes.data() + c.est.ellipsoid_semi_axes.size());
                }
            }
        }
        j["certificates"].push_back(e);
    }

    if (r.validation) {
        const auto& v = *r.validation;
        json e;
        e["certificate"] = r.validated_certificate;
        e["seed"] = r.seed;
        e["n_samples"] = v.n_samples;
        e["n_converged"] = v.n_converged;
        e["n_diverged"] = v.n_diverged;
        e["n_timeout"] = v.n_timeout;
        e["boundary_margin"] = v.boundary_margin;
        e["t_max"] = v.t_max;
        j["validation"] = e;
    }

    j["notes"] = r.notes;
    return j.dump(2) + "\n";
}

}  // namespace pwh
