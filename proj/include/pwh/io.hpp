#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pwh/sim.hpp"

namespace pwh::io {

/// Trajectory CSV: header "t,x1,...,xn,S", one row per recorded step,
/// values printed with 17 significant digits so a reload is lossless.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);
Trajectory read_trajectory_csv_file(const std::string& path);

struct PhasePoint {
    Vec x0;
    IcClass cls = IcClass::Timeout;
    double t_stop = 0.0;
    std::vector<Vec> polyline;  // only collected when an SVG is requested
};

/// Phase CSV: header "x0_1,...,x0_n,class,t_stop",
/// class in {converged, diverged, timeout}.
void write_phase_csv(std::ostream& out, const std::vector<PhasePoint>& points, int n);
void write_phase_csv(const std::string& path, const std::vector<PhasePoint>& points, int n);

struct SvgEllipse {
    double cx = 0.0, cy = 0.0;  // state-space center
    double rx = 0.0, ry = 0.0;  // state-space semi-axes
};

struct SvgOptions {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    int width = 800, height = 600;
    std::optional<SvgEllipse> ellipse;   // certificate boundary overlay
    std::optional<std::pair<double, double>> marker;  // equilibrium dot
    std::string x_label = "x1";
    std::string y_label = "x2";
};

/// Hand-emitted phase-plane figure: trajectory polylines colored by class,
/// axis ticks, and the certificate ellipse when present. 2-D states only.
void write_phase_svg(std::ostream& out, const std::vector<PhasePoint>& points,
                     const SvgOptions& opt);
void write_phase_svg(const std::string& path, const std::vector<PhasePoint>& points,
                     const SvgOptions& opt);

}  // namespace pwh::io
