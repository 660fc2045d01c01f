#include "pwh/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pwh {

using nlohmann::json;

QuadraticHamiltonian::QuadraticHamiltonian(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
        throw InputError("energy matrix must be square and nonempty");
    }
    if (!num::is_symmetric(m_)) throw InputError("energy matrix must be symmetric");
    if (!num::cholesky_pd(m_).positive_definite) {
        throw InputError("energy matrix must be positive definite");
    }
    diagonal_ = num::is_diagonal(m_);
}

double QuadraticHamiltonian::value(const Vec& x) const {
    return 0.5 * x.dot(m_ * x);
}

Vec QuadraticHamiltonian::grad(const Vec& x) const {
    return m_ * x;
}

PwhSystem::PwhSystem(Mat j, Mat r, Mat m, std::vector<int> power_channels, Vec u_bar, Vec u_c)
    : n_(static_cast<int>(m.rows())),
      j_(std::move(j)),
      r_(std::move(r)),
      hamiltonian_(std::move(m)),
      power_channels_(std::move(power_channels)),
      u_bar_(std::move(u_bar)),
      u_c_(std::move(u_c)) {
    if (j_.rows() != n_ || j_.cols() != n_) throw InputError("J has wrong dimensions");
    if (r_.rows() != n_ || r_.cols() != n_) throw InputError("R has wrong dimensions");
    if (u_bar_.size() != n_) throw InputError("u_bar has wrong length");
    if (u_c_.size() != n_) throw InputError("u_c has wrong length");
    if (!num::is_finite(j_) || !num::is_finite(r_) || !u_bar_.allFinite() || !u_c_.allFinite()) {
        throw InputError("system matrices must be finite");
    }

    const double j_scale = std::max(1.0, j_.cwiseAbs().maxCoeff());
    if ((j_ + j_.transpose()).cwiseAbs().maxCoeff() > 1e-14 * j_scale) {
        throw InputError("J must be skew-symmetric");
    }
    if (!num::is_symmetric(r_)) throw InputError("R must be symmetric");
    if (num::sym_min_eig(r_) < -1e-12) {
        throw InputError("R must be positive semidefinite");
    }

    std::sort(power_channels_.begin(), power_channels_.end());
    channel_mask_.assign(static_cast<size_t>(n_), false);
    for (int i : power_channels_) {
        if (i < 0 || i >= n_) throw InputError("power channel index out of range");
        if (channel_mask_[static_cast<size_t>(i)]) throw InputError("duplicate power channel index");
        channel_mask_[static_cast<size_t>(i)] = true;
    }
    for (int i = 0; i < n_; ++i) {
        if (!channel_mask_[static_cast<size_t>(i)] && u_bar_(i) != 0.0) {
            throw InputError("u_bar must be zero off the power channels (index " +
                             std::to_string(i + 1) + ")");
        }
    }
    r_diagonal_ = num::is_diagonal(r_);
}

void PwhSystem::check_state(const Vec& x) const {
    if (x.size() != n_) throw InputError("state has wrong length");
    if (!x.allFinite()) throw InputError("state has non-finite entries");
}

Vec PwhSystem::grad_H(const Vec& x) const {
    check_state(x);
    return hamiltonian_.grad(x);
}

bool PwhSystem::in_domain(const Vec& x) const {
    check_state(x);
    const Vec g = hamiltonian_.grad(x);
    for (int i : power_channels_) {
        if (!(g(i) > 0.0)) return false;
    }
    return true;
}

Vec PwhSystem::input_diag_unchecked(const Vec& x) const {
    const Vec g = hamiltonian_.grad(x);
    Vec d = Vec::Zero(n_);
    for (int i : power_channels_) d(i) = 1.0 / g(i);
    return d;
}

Mat PwhSystem::input_matrix_G(const Vec& x) const {
    check_state(x);
    if (!in_domain(x)) throw DomainError("input matrix undefined: state outside the admissible set");
    return input_diag_unchecked(x).asDiagonal();
}

Vec PwhSystem::rhs_unchecked(const Vec& x, const Vec& u) const {
    const Vec g = hamiltonian_.grad(x);
    Vec f = (j_ - r_) * g + u_c_;
    for (int i : power_channels_) f(i) += u(i) / g(i);
    return f;
}

Vec PwhSystem::vector_field(const Vec& x) const {
    return vector_field(x, u_bar_);
}

Vec PwhSystem::vector_field(const Vec& x, const Vec& u) const {
    check_state(x);
    if (u.size() != n_) throw InputError("input has wrong length");
    if (!in_domain(x)) throw DomainError("vector field undefined: state outside the admissible set");
    return rhs_unchecked(x, u);
}

Mat PwhSystem::jacobian(const Vec& x) const {
    check_state(x);
    if (!in_domain(x)) throw DomainError("Jacobian undefined: state outside the admissible set");
    const Vec g = hamiltonian_.grad(x);
    Mat a = (j_ - r_) * hamiltonian_.m();
    for (int i : power_channels_) {
        a.row(i) -= (u_bar_(i) / (g(i) * g(i))) * hamiltonian_.m().row(i);
    }
    return a;
}

PwhSystem build_single_port(const SinglePortParams& p) {
    if (!(p.v_g > 0 && p.r_l > 0 && p.r_p > 0 && p.L > 0 && p.C > 0) || !(p.P >= 0)) {
        throw InputError("single-port parameters must be positive (P may be zero)");
    }
    Mat j(2, 2), r(2, 2), m(2, 2);
    j << 0, -1, 1, 0;
    r << p.r_l, 0, 0, 1.0 / p.r_p;
    m << 1.0 / p.L, 0, 0, 1.0 / p.C;
    Vec u_bar(2), u_c(2);
    u_bar << 0, -p.P;
    u_c << p.v_g, 0;
    // The capacitor channel stays a power channel even at P = 0, so the
    // operating domain q > 0 is stable under load sweeps.
    return PwhSystem(j, r, m, {1}, u_bar, u_c);
}

PwhSystem build_multiport(const MultiportParams& p) {
    const Eigen::Index l = p.L_mat.rows();
    const Eigen::Index c = p.C_mat.rows();
    if (l < 1 || c < 1) throw InputError("multiport needs at least one inductor and one capacitor");

    auto require_pd = [](const Mat& a, const char* name) {
        if (a.rows() != a.cols()) throw InputError(std::string(name) + " must be square");
        if (!num::is_symmetric(a)) throw InputError(std::string(name) + " must be symmetric");
        if (!num::cholesky_pd(a).positive_definite) {
            throw InputError(std::string(name) + " must be positive definite");
        }
    };
    require_pd(p.L_mat, "L");
    require_pd(p.C_mat, "C");
    require_pd(p.Z_mat, "Z");
    require_pd(p.Y_mat, "Y");
    if (p.Z_mat.rows() != l) throw InputError("Z must match the inductor count");
    if (p.Y_mat.rows() != c) throw InputError("Y must match the capacitor count");
    if (p.Gamma.rows() != l || p.Gamma.cols() != c) throw InputError("Gamma must be l x c");
    if (p.P_vec.size() != c) throw InputError("P must have one entry per capacitor");
    if (p.u_c.size() != l + c) throw InputError("u_c must have length l + c");

    auto inverse_checked = [](const Mat& a, const char* name) {
        Mat inv = a.llt().solve(Mat::Identity(a.rows(), a.cols()));
        if ((a * inv - Mat::Identity(a.rows(), a.cols())).norm() > 1e-10) {
            throw InputError(std::string(name) + " is too ill-conditioned to invert");
        }
        // Solve-based inverses of symmetric blocks carry rounding asymmetry.
        return Mat(0.5 * (inv + inv.transpose()));
    };

    const Eigen::Index n = l + c;
    Mat m = Mat::Zero(n, n);
    m.topLeftCorner(l, l) = inverse_checked(p.L_mat, "L");
    m.bottomRightCorner(c, c) = inverse_checked(p.C_mat, "C");

    Mat j = Mat::Zero(n, n);
    j.topRightCorner(l, c) = p.Gamma;
    j.bottomLeftCorner(c, l) = -p.Gamma.transpose();

    Mat r = Mat::Zero(n, n);
    r.topLeftCorner(l, l) = p.Z_mat;
    r.bottomRightCorner(c, c) = p.Y_mat;

    Vec u_bar = Vec::Zero(n);
    std::vector<int> channels;
    for (Eigen::Index i = 0; i < c; ++i) {
        if (p.P_vec(i) != 0.0) {
            u_bar(l + i) = -p.P_vec(i);
            channels.push_back(static_cast<int>(l + i));
        }
    }
    return PwhSystem(j, r, m, channels, u_bar, p.u_c);
}

PwhSystem build_sg(const SgParams& p) {
    if (!(p.M_inertia > 0 && p.D_m > 0 && p.D_d > 0 && p.tau_m > 0 && p.omega_star > 0)) {
        throw InputError("generator parameters must be positive");
    }
    if (p.P_e < 0) throw InputError("electrical power must be nonnegative");
    Mat j(1, 1), r(1, 1), m(1, 1);
    j << 0;
    r << p.D_m + p.D_d;
    m << 1.0 / p.M_inertia;
    Vec u_bar(1), u_c(1);
    u_bar << -p.P_e;
    u_c << p.tau_m + p.D_d * p.omega_star;
    std::vector<int> channels;
    if (p.P_e != 0.0) channels.push_back(0);
    return PwhSystem(j, r, m, channels, u_bar, u_c);
}

namespace {

double get_number(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ParseError(path + "/" + key, "missing field");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError(path + "/" + key, "expected a number");
    return v.get<double>();
}

Mat get_matrix(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ParseError(path + "/" + key, "missing field");
    const auto& v = j.at(key);
    if (!v.is_array() || v.empty()) throw ParseError(path + "/" + key, "expected an array of rows");
    const size_t rows = v.size();
    size_t cols = 0;
    Mat m;
    for (size_t i = 0; i < rows; ++i) {
        const auto& row = v.at(i);
        const std::string row_path = path + "/" + key + "/" + std::to_string(i);
        if (!row.is_array() || row.empty()) throw ParseError(row_path, "expected a row array");
        if (i == 0) {
            cols = row.size();
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            throw ParseError(row_path, "ragged matrix rows");
        }
        for (size_t k = 0; k < cols; ++k) {
            if (!row.at(k).is_number()) {
                throw ParseError(row_path + "/" + std::to_string(k), "expected a number");
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row.at(k).get<double>();
        }
    }
    return m;
}

Vec get_vector(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ParseError(path + "/" + key, "missing field");
    const auto& v = j.at(key);
    if (!v.is_array()) throw ParseError(path + "/" + key, "expected an array");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v.at(i).is_number()) {
            throw ParseError(path + "/" + key + "/" + std::to_string(i), "expected a number");
        }
        out(static_cast<Eigen::Index>(i)) = v.at(i).get<double>();
    }
    return out;
}

}  // namespace

ModelDocument load_model(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError("/", e.what());
    }
    if (!doc.is_object()) throw ParseError("/", "expected a JSON object");
    if (!doc.contains("kind") || !doc.at("kind").is_string()) {
        throw ParseError("/kind", "missing or non-string");
    }
    const std::string kind = doc.at("kind").get<std::string>();
    std::string units;
    if (doc.contains("units") && doc.at("units").is_string()) {
        units = doc.at("units").get<std::string>();
    }

    if (kind == "single_port") {
        SinglePortParams p{};
        p.v_g = get_number(doc, "", "v_g");
        p.r_l = get_number(doc, "", "r_l");
        p.r_p = get_number(doc, "", "r_p");
        p.L = get_number(doc, "", "L");
        p.C = get_number(doc, "", "C");
        p.P = get_number(doc, "", "P");
        return {ModelKind::SinglePort, build_single_port(p), p, std::nullopt, std::nullopt, units};
    }
    if (kind == "sg") {
        SgParams p{};
        p.M_inertia = get_number(doc, "", "M");
        p.D_m = get_number(doc, "", "D_m");
        p.D_d = get_number(doc, "", "D_d");
        p.tau_m = get_number(doc, "", "tau_m");
        p.omega_star = get_number(doc, "", "omega_star");
        p.P_e = get_number(doc, "", "P_e");
        return {ModelKind::Sg, build_sg(p), std::nullopt, p, std::nullopt, units};
    }
    if (kind == "multiport") {
        MultiportParams p;
        p.L_mat = get_matrix(doc, "", "L");
        p.C_mat = get_matrix(doc, "", "C");
        p.Z_mat = get_matrix(doc, "", "Z");
        p.Y_mat = get_matrix(doc, "", "Y");
        p.Gamma = get_matrix(doc, "", "Gamma");
        p.P_vec = get_vector(doc, "", "P");
        p.u_c = get_vector(doc, "", "u_c");
        return {ModelKind::Multiport, build_multiport(p), std::nullopt, std::nullopt, p, units};
    }
    if (kind == "raw") {
        Mat j = get_matrix(doc, "", "J");
        Mat r = get_matrix(doc, "", "R");
        Mat m = get_matrix(doc, "", "M");
        Vec u_bar = get_vector(doc, "", "u_bar");
        Vec u_c = get_vector(doc, "", "u_c");
        if (!doc.contains("power_channels") || !doc.at("power_channels").is_array()) {
            throw ParseError("/power_channels", "expected an array of 1-based indices");
        }
        std::vector<int> channels;
        const auto& pc = doc.at("power_channels");
        for (size_t i = 0; i < pc.size(); ++i) {
            if (!pc.at(i).is_number_integer()) {
                throw ParseError("/power_channels/" + std::to_string(i), "expected an integer");
            }
            const int idx = pc.at(i).get<int>();
            if (idx < 1 || idx > m.rows()) {
                throw ParseError("/power_channels/" + std::to_string(i), "index out of range (1-based)");
            }
            channels.push_back(idx - 1);
        }
        return {ModelKind::Raw, PwhSystem(j, r, m, channels, u_bar, u_c),
                std::nullopt, std::nullopt, std::nullopt, units};
    }
    throw ParseError("/kind", "unknown kind \"" + kind + "\"");
}

ModelDocument load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_model(buf.str());
}

}  // namespace pwh
