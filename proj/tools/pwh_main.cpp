// Command-line front end: analyze a model file, simulate trajectories,
// classify phase-plane grids, and sweep a parameter.
//
// Exit codes: 0 success, 2 input/parse error, 3 no equilibrium,
// 4 inadmissible state, 5 unsupported rendering.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pwh/io.hpp"
#include "pwh/report.hpp"

namespace {

struct RenderUnsupported : std::runtime_error {
    using std::runtime_error::runtime_error;
};

pwh::Vec parse_state(const std::string& csv, int n) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            values.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw pwh::InputError("cannot parse state component \"" + tok + "\"");
        }
    }
    if (static_cast<int>(values.size()) != n) {
        throw pwh::InputError("state has " + std::to_string(values.size()) +
                              " components, model needs " + std::to_string(n));
    }
    pwh::Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = values[static_cast<size_t>(i)];
    return x;
}

double default_t_max(const pwh::ModelDocument& doc) {
    // The generator settles on a thousands-of-seconds timescale; circuits
    // are done within a fraction of a second.
    return doc.kind == pwh::ModelKind::Sg ? 60000.0 : 0.5;
}

struct PhaseBox {
    pwh::Vec lo;
    pwh::Vec hi;
};

PhaseBox phase_box(const pwh::ModelDocument& doc, const pwh::Equilibrium& eq) {
    const pwh::PwhSystem& sys = doc.system;
    const int n = sys.n();
    pwh::Vec half(n);
    bool have_cert = false;
    if (eq.classification == pwh::Classification::ShiftedPassiveStable) {
        try {
            pwh::ShiftedContext ctx(sys, eq.x_bar);
            const pwh::RoaEstimate est = pwh::roa_diagonal(ctx);
            half = 2.2 * est.ellipsoid_semi_axes;
            have_cert = true;
        } catch (const std::runtime_error&) {
        }
    }
    if (!have_cert) {
        for (int i = 0; i < n; ++i) half(i) = 0.6 * (1.0 + std::abs(eq.x_bar(i)));
    }
    PhaseBox box{eq.x_bar - half, eq.x_bar + half};
    // Keep power-channel coordinates inside the admissible set (diagonal
    // energy matrices tie the state sign to the gradient sign).
    if (sys.m_diagonal()) {
        for (int i : sys.power_channels()) {
            box.lo(i) = std::max(box.lo(i), 0.05 * eq.x_bar(i));
        }
    }
    return box;
}

int run_analyze(const std::string& model_path, int validate, std::uint64_t seed,
                const std::string& roa_mode, const std::string& json_path) {
    const pwh::ModelDocument doc = pwh::load_model_file(model_path);
    pwh::AnalyzeOptions opt;
    opt.validate_samples = validate;
    opt.seed = seed;
    if (roa_mode == "refined") {
        opt.refined_roa = true;
    } else if (roa_mode != "full") {
        throw pwh::InputError("unknown --roa-mode \"" + roa_mode + "\" (full|refined)");
    }
    const pwh::AnalysisReport report = pwh::analyze_model(doc, opt);
    std::cout << pwh::render_text(report);
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw pwh::InputError("cannot open output file: " + json_path);
        out << pwh::render_json(report);
    }
    return 0;
}

int run_simulate(const std::string& model_path, const std::string& x0_csv, double t_end,
                 double rel_tol, const std::string& out_path) {
    const pwh::ModelDocument doc = pwh::load_model_file(model_path);
    const pwh::Vec x0 = parse_state(x0_csv, doc.system.n());

    pwh::IntegrateOptions opt;
    opt.t_end = t_end;
    opt.rel_tol = rel_tol;

    bool have_reference = false;
    pwh::Vec x_bar;
    try {
        x_bar = pwh::find_operating_point(doc).x_bar;
        have_reference = true;
    } catch (const std::runtime_error&) {
        // No equilibrium: simulate anyway, S falls back to the plain energy.
    }
    if (have_reference) {
        opt.s_reference = x_bar;
        const double conv_radius = 1e-3 * (1.0 + x_bar.norm());
        opt.stop_when = [x_bar, conv_radius](double, const pwh::Vec& x) {
            return (x - x_bar).norm() <= conv_radius;
        };
    }

    const pwh::Trajectory traj = pwh::integrate(doc.system, x0, opt);
    pwh::io::write_trajectory_csv(out_path, traj);
    std::cout << "stop reason: " << pwh::to_string(traj.stop_reason) << "\n";
    std::cout << "t_stop: " << traj.t_stop << "\n";
    std::cout << "steps recorded: " << traj.times.size() << "\n";
    return 0;
}

int run_phase(const std::string& model_path, const std::string& grid_spec, int samples,
              double t_max_arg, const std::string& out_path, const std::string& svg_path,
              std::uint64_t seed) {
    const pwh::ModelDocument doc = pwh::load_model_file(model_path);
    const pwh::PwhSystem& sys = doc.system;
    const int n = sys.n();
    if (!svg_path.empty() && n != 2) {
        throw RenderUnsupported("phase SVG needs a 2-dimensional state, model has n = " +
                                std::to_string(n));
    }

    const pwh::Equilibrium eq = pwh::find_operating_point(doc);
    const PhaseBox box = phase_box(doc, eq);
    const double t_max = t_max_arg > 0 ? t_max_arg : default_t_max(doc);

    std::vector<pwh::Vec> initial_states;
    if (!grid_spec.empty()) {
        const auto xpos = grid_spec.find('x');
        if (xpos == std::string::npos) {
            throw pwh::InputError("--grid expects ROWSxCOLS, e.g. 8x8");
        }
        int rows = 0, cols = 0;
        try {
            rows = std::stoi(grid_spec.substr(0, xpos));
            cols = std::stoi(grid_spec.substr(xpos + 1));
        } catch (const std::exception&) {
            throw pwh::InputError("cannot parse --grid \"" + grid_spec + "\"");
        }
        if (rows < 1 || cols < 1) throw pwh::InputError("empty grid");
        if (n == 1) cols = 1;
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                pwh::Vec x = eq.x_bar;
                x(0) = box.lo(0) + (box.hi(0) - box.lo(0)) * (rows == 1 ? 0.5 : double(i) / (rows - 1));
                if (n >= 2) {
                    x(1) = box.lo(1) +
                           (box.hi(1) - box.lo(1)) * (cols == 1 ? 0.5 : double(j) / (cols - 1));
                }
                if (sys.in_domain(x)) initial_states.push_back(x);
            }
        }
    } else {
        if (samples < 1) throw pwh::InputError("--samples must be positive");
        std::mt19937_64 gen(seed);
        while (static_cast<int>(initial_states.size()) < samples) {
            pwh::Vec x(n);
            for (int i = 0; i < n; ++i) {
                x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * pwh::uniform01(gen);
            }
            if (sys.in_domain(x)) initial_states.push_back(x);
        }
    }
    if (initial_states.empty()) throw pwh::InputError("no admissible initial states in the box");

    std::vector<pwh::io::PhasePoint> points;
    points.reserve(initial_states.size());
    const bool want_svg = !svg_path.empty();
    for (const auto& x0 : initial_states) {
        pwh::io::PhasePoint p;
        p.x0 = x0;
        pwh::Trajectory traj;
        const pwh::IcOutcome outcome =
            pwh::classify_ic(sys, eq, x0, t_max, 1e-7, want_svg ? &traj : nullptr);
        p.cls = outcome.cls;
        p.t_stop = outcome.t_stop;
        if (want_svg) p.polyline = std::move(traj.states);
        points.push_back(std::move(p));
    }

    pwh::io::write_phase_csv(out_path, points, n);
    std::cout << "classified " << points.size() << " initial states (t_max " << t_max << " s)\n";

    if (want_svg) {
        pwh::io::SvgOptions svg;
        svg.x_min = box.lo(0);
        svg.x_max = box.hi(0);
        svg.y_min = box.lo(1);
        svg.y_max = box.hi(1);
        svg.marker = {eq.x_bar(0), eq.x_bar(1)};
        if (eq.classification == pwh::Classification::ShiftedPassiveStable) {
            try {
                pwh::ShiftedContext ctx(sys, eq.x_bar);
                const pwh::RoaEstimate est = pwh::roa_diagonal(ctx);
                svg.ellipse = pwh::io::SvgEllipse{eq.x_bar(0), eq.x_bar(1),
                                                  est.ellipsoid_semi_axes(0),
                                                  est.ellipsoid_semi_axes(1)};
            } catch (const std::runtime_error&) {
            }
        }
        pwh::io::write_phase_svg(svg_path, points, svg);
    }
    return 0;
}

int run_sweep(const std::string& model_path, const std::string& param, double from, double to,
              int steps, const std::string& out_path) {
    const pwh::ModelDocument doc = pwh::load_model_file(model_path);
    if (doc.kind != pwh::ModelKind::SinglePort && doc.kind != pwh::ModelKind::Sg) {
        throw pwh::InputError("sweep supports single_port and sg models");
    }
    if (steps < 1) throw pwh::InputError("--steps must be positive");

    std::ofstream out(out_path);
    if (!out) throw pwh::InputError("cannot open output file: " + out_path);
    out << param << ",exists,rz_min_eig,k_d\n";

    auto g17 = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };

    for (int step = 0; step < steps; ++step) {
        const double value =
            steps == 1 ? from : from + (to - from) * double(step) / double(steps - 1);

        pwh::EquilibriumPair pair;
        pwh::PwhSystem* sys_ptr = nullptr;
        std::optional<pwh::PwhSystem> sys_storage;
        if (doc.kind == pwh::ModelKind::SinglePort) {
            pwh::SinglePortParams p = *doc.single_port;
            if (param == "P") p.P = value;
            else if (param == "v_g") p.v_g = value;
            else if (param == "r_l") p.r_l = value;
            else if (param == "r_p") p.r_p = value;
            else if (param == "L") p.L = value;
            else if (param == "C") p.C = value;
            else throw pwh::InputError("unknown parameter \"" + param + "\" for single_port");
            pair = pwh::single_port_equilibria(p);
            sys_storage.emplace(pwh::build_single_port(p));
            sys_ptr = &*sys_storage;
        } else {
            pwh::SgParams p = *doc.sg;
            if (param == "P_e") p.P_e = value;
            else if (param == "M") p.M_inertia = value;
            else if (param == "D_m") p.D_m = value;
            else if (param == "D_d") p.D_d = value;
            else if (param == "tau_m") p.tau_m = value;
            else if (param == "omega_star") p.omega_star = value;
            else throw pwh::InputError("unknown parameter \"" + param + "\" for sg");
            pair = pwh::sg_equilibria(p);
            sys_storage.emplace(pwh::build_sg(p));
            sys_ptr = &*sys_storage;
        }

        const bool exists = pair.stable.has_value() || pair.unstable.has_value();
        out << g17(value) << "," << (exists ? 1 : 0) << ",";
        if (pair.stable) out << g17(pair.stable->r_plus_z_min_eig);
        out << ",";
        if (pair.stable &&
            pair.stable->classification == pwh::Classification::ShiftedPassiveStable) {
            try {
                pwh::ShiftedContext ctx(*sys_ptr, pair.stable->x_bar);
                out << g17(pwh::roa_diagonal(ctx).level_k);
            } catch (const std::runtime_error&) {
            }
        }
        out << "\n";
    }
    std::cout << "wrote " << steps << " rows to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analysis toolkit for power-loaded Hamiltonian network models"};
    app.require_subcommand(1);

    std::string model_path, x0_csv, out_path, svg_path, json_path, grid_spec, param;
    std::string roa_mode = "full";
    int validate = 0, samples = 0, steps = 0;
    std::uint64_t seed = 0;
    double t_end = 0, rel_tol = 1e-8, t_max = 0, from = 0, to = 0;

    auto* analyze = app.add_subcommand("analyze", "equilibria, limits, certificates");
    analyze->add_option("model", model_path)->required();
    analyze->add_option("--validate", validate, "Monte-Carlo samples for certificate validation");
    analyze->add_option("--seed", seed);
    analyze->add_option("--roa-mode", roa_mode, "full|refined index set for the general estimate");
    analyze->add_option("--json", json_path, "also write the report as JSON");

    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory to CSV");
    simulate->add_option("model", model_path)->required();
    simulate->add_option("--x0", x0_csv, "initial state, comma separated")->required();
    simulate->add_option("--t-end", t_end)->required();
    simulate->add_option("--rel-tol", rel_tol);
    simulate->add_option("--out", out_path)->required();

    auto* phase = app.add_subcommand("phase", "classify a set of initial states");
    phase->add_option("model", model_path)->required();
    auto* grid_opt = phase->add_option("--grid", grid_spec, "ROWSxCOLS grid of initial states");
    phase->add_option("--samples", samples, "random initial states")->excludes(grid_opt);
    phase->add_option("--t-max", t_max);
    phase->add_option("--out", out_path)->required();
    phase->add_option("--svg", svg_path, "phase-plane figure (2-D models)");
    phase->add_option("--seed", seed);

    auto* sweep = app.add_subcommand("sweep", "closed-form analysis along a parameter range");
    sweep->add_option("model", model_path)->required();
    sweep->add_option("--param", param)->required();
    sweep->add_option("--from", from)->required();
    sweep->add_option("--to", to)->required();
    sweep->add_option("--steps", steps)->required();
    sweep->add_option("--out", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(analyze)) {
            return run_analyze(model_path, validate, seed, roa_mode, json_path);
        }
        if (app.got_subcommand(simulate)) {
            return run_simulate(model_path, x0_csv, t_end, rel_tol, out_path);
        }
        if (app.got_subcommand(phase)) {
            if (grid_spec.empty() && samples == 0) {
                throw pwh::InputError("phase needs --grid or --samples");
            }
            return run_phase(model_path, grid_spec, samples, t_max, out_path, svg_path, seed);
        }
        if (app.got_subcommand(sweep)) {
            return run_sweep(model_path, param, from, to, steps, out_path);
        }
    } catch (const RenderUnsupported& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const pwh::NoEquilibriumError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.existence_limit > 0) {
            std::cerr << "existence bound: " << e.existence_limit << "\n";
        }
        return 3;
    } catch (const pwh::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const pwh::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
