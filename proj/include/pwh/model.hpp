#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pwh/numeric.hpp"

// System class: dynamics of the form
//
//     x' = (J - R) M x + G(x) u_bar + u_c
//
// with constant skew J, constant dissipation R >= 0, quadratic energy
// H(x) = x' M x / 2 (M > 0), and a diagonal input matrix G(x) that carries
// 1/(M x)_i on the designated power channels and 0 elsewhere. Each power
// channel injects or extracts the fixed power u_bar_i; u_c is an ordinary
// constant input on the flow side. The admissible set keeps (M x)_i > 0 on
// every power channel so G stays well defined.

namespace pwh {

/// Quadratic energy H(x) = x' M x / 2 with M positive definite.
class QuadraticHamiltonian {
  public:
    explicit QuadraticHamiltonian(Mat m);

    const Mat& m() const { return m_; }
    double value(const Vec& x) const;
    Vec grad(const Vec& x) const;   // M x
    bool diagonal() const { return diagonal_; }

  private:
    Mat m_;
    bool diagonal_;
};

/// Single-port DC source feeding a parallel RC bus with a constant power
/// load through a series RL branch. SI units.
struct SinglePortParams {
    double v_g;   // source voltage, V
    double r_l;   // series (line) resistance, ohm
    double r_p;   // parallel load resistance, ohm
    double L;     // line inductance, H
    double C;     // bus capacitance, F
    double P;     // constant power load, W
};

/// First-order synchronous generator (swing dynamics with damper winding)
/// loaded by constant electrical power. Per-unit quantities.
struct SgParams {
    double M_inertia;   // rotor inertia
    double D_m;         // mechanical damping
    double D_d;         // damper-winding damping
    double tau_m;       // constant mechanical torque
    double omega_star;  // nominal angular velocity
    double P_e;         // constant electrical power load
};

/// Multi-port DC network: l inductive branches and c capacitive buses with
/// per-bus constant power loads. Gamma encodes which branches feed which
/// buses (l x c incidence-style matrix).
struct MultiportParams {
    Mat L_mat;   // l x l, positive definite
    Mat C_mat;   // c x c, positive definite
    Mat Z_mat;   // l x l branch resistances, positive definite
    Mat Y_mat;   // c x c bus conductances, positive definite
    Mat Gamma;   // l x c topology block
    Vec P_vec;   // c loads, W
    Vec u_c;     // l + c constant input
};

class PwhSystem {
  public:
    /// Validates: J skew, R symmetric with min eigenvalue >= -1e-12,
    /// M positive definite, u_bar zero off the power channels.
    PwhSystem(Mat j, Mat r, Mat m, std::vector<int> power_channels, Vec u_bar, Vec u_c);

    int n() const { return n_; }
    const Mat& structure() const { return j_; }
    const Mat& dissipation() const { return r_; }
    const Mat& energy_matrix() const { return hamiltonian_.m(); }
    const QuadraticHamiltonian& hamiltonian() const { return hamiltonian_; }
    const std::vector<int>& power_channels() const { return power_channels_; }
    bool is_power_channel(int i) const { return channel_mask_[static_cast<size_t>(i)]; }
    const Vec& u_bar() const { return u_bar_; }
    const Vec& u_c() const { return u_c_; }
    bool m_diagonal() const { return hamiltonian_.diagonal(); }
    bool r_diagonal() const { return r_diagonal_; }

    double energy(const Vec& x) const { return hamiltonian_.value(x); }
    Vec grad_H(const Vec& x) const;

    /// True iff (M x)_i > 0 on every power channel.
    bool in_domain(const Vec& x) const;

    /// Diagonal input matrix G(x); requires x in the admissible set.
    Mat input_matrix_G(const Vec& x) const;

    /// Diagonal entries of G(x) without the domain check (used by the
    /// integrator, whose trial stages may momentarily leave the set).
    Vec input_diag_unchecked(const Vec& x) const;

    /// Right-hand side with the built-in constant input u_bar.
    Vec vector_field(const Vec& x) const;
    /// Right-hand side with a caller-supplied input on the power channels.
    Vec vector_field(const Vec& x, const Vec& u) const;
    Vec rhs_unchecked(const Vec& x, const Vec& u) const;

    /// Exact Jacobian of vector_field: (J - R) M - D(x) M with
    /// D(x) = diag(u_bar_i / (M x)_i^2) on the power channels.
    Mat jacobian(const Vec& x) const;

  private:
    void check_state(const Vec& x) const;

    int n_;
    Mat j_;
    Mat r_;
    QuadraticHamiltonian hamiltonian_;
    std::vector<int> power_channels_;
    std::vector<bool> channel_mask_;
    Vec u_bar_;
    Vec u_c_;
    bool r_diagonal_;
};

PwhSystem build_single_port(const SinglePortParams& p);
PwhSystem build_multiport(const MultiportParams& p);
PwhSystem build_sg(const SgParams& p);

enum class ModelKind { SinglePort, Sg, Multiport, Raw };

/// A loaded model file: the system plus whichever parameter struct the file
/// carried, so closed-form analyses can run when they apply.
struct ModelDocument {
    ModelKind kind;
    PwhSystem system;
    std::optional<SinglePortParams> single_port;
    std::optional<SgParams> sg;
    std::optional<MultiportParams> multiport;
    std::string units_note;
};

/// Parse a JSON model document. Top-level "kind" selects the builder
/// ("single_port", "sg", "multiport") or the raw-matrix path ("raw").
/// Indices in raw "power_channels" are 1-based. Schema violations raise
/// ParseError with the offending field path; invariant violations raise
/// InputError.
ModelDocument load_model(const std::string& json_text);
ModelDocument load_model_file(const std::string& path);

}  // namespace pwh
