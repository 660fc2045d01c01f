#pragma once

#include <stdexcept>
#include <string>

namespace pwh {

/// Invalid caller-supplied data (bad dimensions, non-finite entries,
/// violated construction invariants).
struct InputError : std::invalid_argument {
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Model-file parse failure. `path` is the JSON field path of the offending
/// entry, e.g. "/L/1".
struct ParseError : InputError {
    ParseError(const std::string& path, const std::string& what)
        : InputError("parse error at " + path + ": " + what), field_path(path) {}
    std::string field_path;
};

/// State outside the admissible operating set.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative method hit its iteration cap without meeting tolerance.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// No equilibrium exists for the given parameters (e.g. load above the
/// existence limit). Carries the limit when known.
struct NoEquilibriumError : std::runtime_error {
    explicit NoEquilibriumError(const std::string& what, double existence_limit = 0.0)
        : std::runtime_error(what), existence_limit(existence_limit) {}
    double existence_limit;
};

/// The requested certificate cannot be issued for this equilibrium
/// (membership precondition fails or stability margin is nonpositive).
struct CertificateUnavailable : std::runtime_error {
    explicit CertificateUnavailable(const std::string& what) : std::runtime_error(what) {}
};

/// The requested analysis mode does not apply to this system structure.
struct ModeUnavailable : std::runtime_error {
    explicit ModeUnavailable(const std::string& what) : std::runtime_error(what) {}
};

struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pwh
