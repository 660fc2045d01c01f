#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pwh/sim.hpp"

// End-to-end analysis of a loaded model: equilibria, classification, load
// power limits (single-port), certificates, and optional Monte-Carlo
// validation. The text rendering is deterministic for fixed inputs and seed.

namespace pwh {

struct AnalyzeOptions {
    int validate_samples = 0;   // 0: skip validation
    std::uint64_t seed = 0;
    bool refined_roa = false;   // general certificate over power channels only
};

struct EquilibriumSummary {
    std::string label;
    Equilibrium eq;
    Vec grad_h;        // operating point in flow coordinates
    double abscissa;   // spectral abscissa of the Jacobian
};

struct PowerLimitSummary {
    double existence = 0.0;
    double stability_closed_form = 0.0;
    double stability_numeric = 0.0;
    bool numeric_saturated = false;
    /// Power at which R + Z at the present stable voltage would lose
    /// definiteness: v_s^2 / r_p. Unlike the closed-form threshold it holds
    /// the operating voltage fixed, so the two differ away from the limit.
    double margin_at_load = 0.0;
    double load = 0.0;
};

struct CertificateSummary {
    std::string label;
    RoaEstimate est;
    std::string unavailable_reason;  // nonempty when no certificate could be issued
    bool available() const { return unavailable_reason.empty(); }
};

struct AnalysisReport {
    std::string kind;
    int n = 0;
    std::string units_note;
    std::vector<EquilibriumSummary> equilibria;
    std::optional<PowerLimitSummary> limits;
    std::vector<CertificateSummary> certificates;
    std::optional<RoaValidationReport> validation;
    std::string validated_certificate;
    std::vector<std::string> notes;
    std::uint64_t seed = 0;
};

/// Runs the full analysis. Throws NoEquilibriumError when the model has no
/// admissible equilibrium (the message carries the existence bound when one
/// is known in closed form).
AnalysisReport analyze_model(const ModelDocument& doc, const AnalyzeOptions& opt);

/// The model's certified operating point: the stable closed-form branch for
/// the single-port and generator kinds, a Newton solve with load
/// continuation otherwise. Throws NoEquilibriumError when none exists.
Equilibrium find_operating_point(const ModelDocument& doc);

std::string render_text(const AnalysisReport& r);
std::string render_json(const AnalysisReport& r);

}  // namespace pwh
