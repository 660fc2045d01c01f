#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "pwh/equilibrium.hpp"
#include "pwh/model.hpp"

using namespace pwh;
using oracles::consistent_sg;
using oracles::multiport22;
using oracles::reference_single_port;

namespace {

// Random admissible state around a reference point (diagonal-M systems keep
// channel states positive).
Vec random_domain_state(std::mt19937_64& gen, const PwhSystem& sys, const Vec& center) {
    while (true) {
        Vec x = center;
        for (int i = 0; i < sys.n(); ++i) {
            x(i) = center(i) * oracles::uniform(gen, 0.3, 2.5) +
                   0.01 * oracles::uniform(gen, -1.0, 1.0);
        }
        if (sys.in_domain(x)) return x;
    }
}

}  // namespace

TEST_CASE("grad_H basics") {
    PwhSystem sys(Mat::Zero(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), {}, Vec::Zero(2),
                  Vec::Zero(2));
    Vec x(2);
    x << 1.0, 2.0;
    CHECK((sys.grad_H(x) - x).norm() == 0.0);

    const PwhSystem sp = build_single_port(reference_single_port());
    Vec y(2);
    y << 0.0156, 0.03;
    const Vec g = sp.grad_H(y);
    CHECK(g(0) == doctest::Approx(0.0156 / 78e-6).epsilon(1e-14));
    CHECK(g(1) == doctest::Approx(0.03 / 2e-3).epsilon(1e-14));
}

TEST_CASE("grad_H at the stable operating point gives the branch current and bus voltage") {
    const auto pair = single_port_equilibria(reference_single_port());
    REQUIRE(pair.stable);
    const PwhSystem sys = build_single_port(reference_single_port());
    const Vec g = sys.grad_H(pair.stable->x_bar);
    CHECK(g(0) == doctest::Approx(218.1994).epsilon(1e-5));
    CHECK(g(1) == doctest::Approx(15.2720).epsilon(1e-5));
    CHECK(pair.stable->residual < 1e-9);
}

TEST_CASE("in_domain constrains only the power channels") {
    const PwhSystem sp = build_single_port(reference_single_port());
    Vec x(2);
    x << -5.0, 1e-6;  // any flux, positive charge
    CHECK(sp.in_domain(x));
    x << 0.01, 0.0;
    CHECK_FALSE(sp.in_domain(x));  // boundary excluded
    x << 0.01, -1e-9;
    CHECK_FALSE(sp.in_domain(x));

    const PwhSystem sg = build_sg(consistent_sg());
    Vec w(1);
    w << 0.2 * 50.0;  // p = M omega, omega > 0
    CHECK(sg.in_domain(w));
    w << -0.1;
    CHECK_FALSE(sg.in_domain(w));
}

TEST_CASE("input matrix is diagonal with inverse gradients on the power channels") {
    PwhSystem none(Mat::Zero(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), {}, Vec::Zero(2),
                   Vec::Zero(2));
    Vec x(2);
    x << 0.3, -0.7;
    CHECK(none.input_matrix_G(x).norm() == 0.0);

    const PwhSystem sp = build_single_port(reference_single_port());
    Vec y(2);
    y << 0.01, 0.004;
    const Mat g = sp.input_matrix_G(y);
    CHECK(g(0, 0) == 0.0);
    CHECK(g(0, 1) == 0.0);
    CHECK(g(1, 0) == 0.0);
    CHECK(g(1, 1) == doctest::Approx(2e-3 / 0.004).epsilon(1e-14));  // C / q

    const PwhSystem sg = build_sg(consistent_sg());
    Vec w(1);
    w << 0.2 * 120.0;
    CHECK(sg.input_matrix_G(w)(0, 0) == doctest::Approx(1.0 / 120.0).epsilon(1e-12));

    Vec outside(2);
    outside << 0.01, -0.004;
    CHECK_THROWS_AS(sp.input_matrix_G(outside), DomainError);
}

TEST_CASE("vector_field vanishes on the kernel of the lossy part") {
    // J = 0, R = diag(0, 1), M = I: the first coordinate is invariant.
    Mat r = Mat::Zero(2, 2);
    r(1, 1) = 1.0;
    PwhSystem sys(Mat::Zero(2, 2), r, Mat::Identity(2, 2), {}, Vec::Zero(2), Vec::Zero(2));
    Vec x(2);
    x << 3.0, 0.0;
    CHECK(sys.vector_field(x).norm() == 0.0);
}

TEST_CASE("closed-form equilibria satisfy the vector field") {
    const auto pair = single_port_equilibria(reference_single_port());
    REQUIRE(pair.stable);
    REQUIRE(pair.unstable);
    const PwhSystem sys = build_single_port(reference_single_port());
    CHECK(sys.vector_field(pair.stable->x_bar).norm() < 1e-9);
    CHECK(sys.vector_field(pair.unstable->x_bar).norm() < 1e-9);

    const auto sg_pair = sg_equilibria(consistent_sg());
    REQUIRE(sg_pair.stable);
    const PwhSystem sg = build_sg(consistent_sg());
    CHECK(sg.vector_field(sg_pair.stable->x_bar).norm() <= 1e-12);
}

TEST_CASE("jacobian reduces to (J-R)M without loads") {
    auto p = reference_single_port();
    p.P = 0.0;
    const PwhSystem sys = build_single_port(p);
    Vec x(2);
    x << 0.01, 0.02;
    const Mat expected = (sys.structure() - sys.dissipation()) * sys.energy_matrix();
    CHECK((sys.jacobian(x) - expected).norm() == 0.0);
}

TEST_CASE("jacobian matches central finite differences on all three builders") {
    std::mt19937_64 gen(42);
    const PwhSystem systems[] = {build_single_port(reference_single_port()), build_sg(consistent_sg()),
                                 build_multiport(multiport22())};
    Vec centers[3];
    centers[0] = single_port_equilibria(reference_single_port()).stable->x_bar;
    centers[1] = sg_equilibria(consistent_sg()).stable->x_bar;
    {
        Vec x0 = num::solve_linear(
            (systems[2].structure() - systems[2].dissipation()) * systems[2].energy_matrix(),
            -systems[2].u_c());
        centers[2] = solve_newton(systems[2], x0).x_bar;
    }
    for (int k = 0; k < 3; ++k) {
        const PwhSystem& sys = systems[k];
        for (int trial = 0; trial < 20; ++trial) {
            const Vec x = random_domain_state(gen, sys, centers[k]);
            const Mat jac = sys.jacobian(x);
            const Mat fd = oracles::fd_jacobian(
                [&sys](const Vec& y) { return sys.rhs_unchecked(y, sys.u_bar()); }, x);
            CHECK((jac - fd).norm() <= 1e-5 * jac.norm());
        }
    }
}

TEST_CASE("jacobian spectral abscissa separates the two single-port branches") {
    const auto pair = single_port_equilibria(reference_single_port());
    const PwhSystem sys = build_single_port(reference_single_port());
    CHECK(num::spectral_abscissa(sys.jacobian(pair.unstable->x_bar)) > 0.0);
    CHECK(num::spectral_abscissa(sys.jacobian(pair.stable->x_bar)) < 0.0);
}

TEST_CASE("build_single_port lays out the fixed blocks") {
    const PwhSystem sys = build_single_port(reference_single_port());
    CHECK(sys.n() == 2);
    CHECK(sys.dissipation()(0, 0) == doctest::Approx(0.04));
    CHECK(sys.dissipation()(1, 1) == doctest::Approx(10.0));
    CHECK(sys.structure()(0, 1) == -1.0);
    CHECK(sys.structure()(1, 0) == 1.0);
    CHECK(sys.u_bar()(1) == -1000.0);
    CHECK(sys.u_c()(0) == 24.0);
    CHECK(sys.power_channels() == std::vector<int>{1});

    auto p = reference_single_port();
    p.P = 0.0;
    const PwhSystem linear = build_single_port(p);
    CHECK(linear.u_bar().norm() == 0.0);
    CHECK(linear.power_channels() == std::vector<int>{1});  // structure survives sweeps

    p.r_p = -1.0;
    CHECK_THROWS_AS(build_single_port(p), InputError);
}

TEST_CASE("multiport with one inductor and one capacitor equals the single-port builder") {
    const auto sp = reference_single_port();
    MultiportParams mp;
    mp.L_mat = Mat::Constant(1, 1, sp.L);
    mp.C_mat = Mat::Constant(1, 1, sp.C);
    mp.Z_mat = Mat::Constant(1, 1, sp.r_l);
    mp.Y_mat = Mat::Constant(1, 1, 1.0 / sp.r_p);
    mp.Gamma = Mat::Constant(1, 1, -1.0);  // branch feeds the bus against its voltage
    mp.P_vec = Vec::Constant(1, sp.P);
    mp.u_c = Vec::Zero(2);
    mp.u_c(0) = sp.v_g;
    const PwhSystem a = build_multiport(mp);
    const PwhSystem b = build_single_port(sp);

    CHECK((a.dissipation() - b.dissipation()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.energy_matrix() - b.energy_matrix()).cwiseAbs().maxCoeff() <=
          1e-12 * b.energy_matrix().norm());
    CHECK((a.structure() - b.structure()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.u_bar() - b.u_bar()).norm() == 0.0);
    CHECK((a.u_c() - b.u_c()).norm() == 0.0);
    CHECK(a.power_channels() == b.power_channels());
}

TEST_CASE("multiport structural properties") {
    auto mp = multiport22();
    const PwhSystem sys = build_multiport(mp);
    CHECK(sys.n() == 4);
    CHECK(sys.m_diagonal());
    CHECK(sys.r_diagonal());
    CHECK(sys.power_channels() == std::vector<int>{2, 3});

    mp.P_vec = Vec::Zero(2);
    const PwhSystem linear = build_multiport(mp);
    CHECK(linear.power_channels().empty());
    CHECK(linear.u_bar().norm() == 0.0);

    auto bad = multiport22();
    bad.C_mat(0, 0) = -1e-3;
    try {
        build_multiport(bad);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("C") != std::string::npos);
    }
}

TEST_CASE("builders reject violated invariants at construction") {
    Mat j(2, 2);
    j << 0, -1, 0.5, 0;  // not skew
    CHECK_THROWS_AS(PwhSystem(j, Mat::Identity(2, 2), Mat::Identity(2, 2), {}, Vec::Zero(2),
                              Vec::Zero(2)),
                    InputError);

    Mat r = Mat::Zero(2, 2);
    r.diagonal() << -1.0, 1.0;  // negative dissipation
    CHECK_THROWS_AS(PwhSystem(Mat::Zero(2, 2), r, Mat::Identity(2, 2), {}, Vec::Zero(2),
                              Vec::Zero(2)),
                    InputError);

    Vec u_bar(2);
    u_bar << 0.5, 0.0;  // nonzero off the power channels
    CHECK_THROWS_AS(PwhSystem(Mat::Zero(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), {1},
                              u_bar, Vec::Zero(2)),
                    InputError);
}

TEST_CASE("build_sg scalars and zero-load degeneration") {
    SgParams p{0.2, 1e-6, 1e-4, 0.0027, 100.0 * M_PI, 3.0};
    const PwhSystem sys = build_sg(p);
    CHECK(sys.n() == 1);
    CHECK(sys.dissipation()(0, 0) == doctest::Approx(1.01e-4).epsilon(1e-12));
    CHECK(sys.energy_matrix()(0, 0) == doctest::Approx(5.0));
    CHECK(sys.u_bar()(0) == -3.0);
    CHECK(sys.u_c()(0) == doctest::Approx(0.0027 + 1e-4 * 100.0 * M_PI).epsilon(1e-14));

    p.P_e = 0.0;
    const PwhSystem lin = build_sg(p);
    CHECK(lin.power_channels().empty());  // first-order linear decay

    p.tau_m = 0.0;
    CHECK_THROWS_AS(build_sg(p), InputError);
}

TEST_CASE("sg consistent parameter set admits two equilibria") {
    const auto pair = sg_equilibria(consistent_sg());
    CHECK(pair.discriminant > 0.0);
    CHECK(pair.stable);
    CHECK(pair.unstable);
}

TEST_CASE("model files load through the builders") {
    const std::string dir = PWH_TEST_DATA_DIR;
    const ModelDocument doc = load_model_file(dir + "/single_port.json");
    CHECK(doc.kind == ModelKind::SinglePort);
    const PwhSystem direct = build_single_port(reference_single_port());
    CHECK((doc.system.dissipation() - direct.dissipation()).norm() == 0.0);
    CHECK((doc.system.energy_matrix() - direct.energy_matrix()).norm() == 0.0);
    CHECK((doc.system.u_bar() - direct.u_bar()).norm() == 0.0);

    const ModelDocument mp = load_model_file(dir + "/multiport22.json");
    CHECK(mp.kind == ModelKind::Multiport);
    const PwhSystem direct_mp = build_multiport(multiport22());
    CHECK((mp.system.structure() - direct_mp.structure()).norm() == 0.0);
    CHECK((mp.system.energy_matrix() - direct_mp.energy_matrix()).norm() <=
          1e-12 * direct_mp.energy_matrix().norm());
}

TEST_CASE("raw model files reject invariant violations") {
    const std::string dir = PWH_TEST_DATA_DIR;
    CHECK_THROWS_AS(load_model_file(dir + "/raw_bad_skew.json"), InputError);
}

TEST_CASE("parse errors carry the field path") {
    try {
        load_model("{\"kind\":\"single_port\",\"v_g\":24.0}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.field_path == "/r_l");
    }
    try {
        load_model("{\"kind\":\"multiport\",\"L\":[[1.0],[2.0,3.0]]}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.field_path.find("/L/") == 0);
    }
    CHECK_THROWS_AS(load_model("{\"kind\":\"nope\"}"), ParseError);
    CHECK_THROWS_AS(load_model("not json at all"), ParseError);
}

TEST_CASE("single-port round-trips through serialization") {
    const auto p = reference_single_port();
    std::ostringstream doc;
    doc << "{\"kind\":\"single_port\",\"v_g\":" << p.v_g << ",\"r_l\":" << p.r_l
        << ",\"r_p\":" << p.r_p << ",\"L\":" << p.L << ",\"C\":" << p.C << ",\"P\":" << p.P
        << "}";
    const ModelDocument loaded = load_model(doc.str());
    const PwhSystem direct = build_single_port(p);
    CHECK((loaded.system.structure() - direct.structure()).norm() == 0.0);
    CHECK((loaded.system.dissipation() - direct.dissipation()).norm() == 0.0);
    CHECK((loaded.system.energy_matrix() - direct.energy_matrix()).norm() == 0.0);
    CHECK((loaded.system.u_bar() - direct.u_bar()).norm() == 0.0);
    CHECK((loaded.system.u_c() - direct.u_c()).norm() == 0.0);
}

TEST_CASE("built systems keep the structural invariants") {
    const PwhSystem systems[] = {build_single_port(reference_single_port()), build_sg(consistent_sg()),
                                 build_multiport(multiport22())};
    for (const auto& sys : systems) {
        CHECK((sys.structure() + sys.structure().transpose()).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK(num::sym_min_eig(sys.dissipation()) >= -1e-12);
        CHECK(num::cholesky_pd(sys.energy_matrix()).positive_definite);
    }
}
