#include "pwh/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pwh::io {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
    out << "t";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
    out << ",S\n";
    for (size_t k = 0; k < traj.times.size(); ++k) {
        out << g17(traj.times[k]);
        for (Eigen::Index i = 0; i < n; ++i) out << "," << g17(traj.states[k](i));
        out << "," << g17(traj.S_values[k]) << "\n";
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto out = open_out(path);
    write_trajectory_csv(out, traj);
}

Trajectory read_trajectory_csv(std::istream& in) {
    Trajectory traj;
    std::string line;
    if (!std::getline(in, line)) throw InputError("trajectory CSV is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header.front() != "t" || header.back() != "S") {
        throw InputError("trajectory CSV has an unexpected header");
    }
    const size_t n = header.size() - 2;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != n + 2) throw InputError("trajectory CSV row has wrong arity");
        traj.times.push_back(std::stod(fields[0]));
        Vec x(static_cast<Eigen::Index>(n));
        for (size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = std::stod(fields[1 + i]);
        traj.states.push_back(std::move(x));
        traj.S_values.push_back(std::stod(fields[n + 1]));
    }
    if (!traj.times.empty()) traj.t_stop = traj.times.back();
    return traj;
}

Trajectory read_trajectory_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trajectory CSV: " + path);
    return read_trajectory_csv(in);
}

void write_phase_csv(std::ostream& out, const std::vector<PhasePoint>& points, int n) {
    for (int i = 1; i <= n; ++i) out << "x0_" << i << ",";
    out << "class,t_stop\n";
    for (const auto& p : points) {
        for (int i = 0; i < n; ++i) out << g17(p.x0(i)) << ",";
        out << to_string(p.cls) << "," << g17(p.t_stop) << "\n";
    }
}

void write_phase_csv(const std::string& path, const std::vector<PhasePoint>& points, int n) {
    auto out = open_out(path);
    write_phase_csv(out, points, n);
}

namespace {

struct Mapper {
    const SvgOptions& o;
    static constexpr double kMargin = 60.0;
    double px(double x) const {
        return kMargin + (x - o.x_min) / (o.x_max - o.x_min) * (o.width - 2 * kMargin);
    }
    double py(double y) const {
        return o.height - kMargin - (y - o.y_min) / (o.y_max - o.y_min) * (o.height - 2 * kMargin);
    }
};

const char* class_color(IcClass c) {
    switch (c) {
        case IcClass::Converged: return "#9aa7b0";
        case IcClass::Diverged: return "#30343a";
        case IcClass::Timeout: return "#d97d26";
    }
    return "#000000";
}

std::string g4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

void write_phase_svg(std::ostream& out, const std::vector<PhasePoint>& points,
                     const SvgOptions& o) {
    if (!(o.x_max > o.x_min) || !(o.y_max > o.y_min)) {
        throw InputError("svg: empty plot ranges");
    }
    const Mapper m{o};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\""
        << o.height << "\" viewBox=\"0 0 " << o.width << " " << o.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // plot frame and ticks
    out << "<rect x=\"" << Mapper::kMargin << "\" y=\"" << Mapper::kMargin << "\" width=\""
        << o.width - 2 * Mapper::kMargin << "\" height=\"" << o.height - 2 * Mapper::kMargin
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double fx = o.x_min + (o.x_max - o.x_min) * i / kTicks;
        const double fy = o.y_min + (o.y_max - o.y_min) * i / kTicks;
        out << "<line x1=\"" << m.px(fx) << "\" y1=\"" << o.height - Mapper::kMargin
            << "\" x2=\"" << m.px(fx) << "\" y2=\"" << o.height - Mapper::kMargin + 6
            << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << m.px(fx) << "\" y=\"" << o.height - Mapper::kMargin + 20
            << "\" font-size=\"11\" text-anchor=\"middle\">" << g4(fx) << "</text>\n";
        out << "<line x1=\"" << Mapper::kMargin - 6 << "\" y1=\"" << m.py(fy) << "\" x2=\""
            << Mapper::kMargin << "\" y2=\"" << m.py(fy) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << Mapper::kMargin - 9 << "\" y=\"" << m.py(fy) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << g4(fy) << "</text>\n";
    }
    out << "<text x=\"" << o.width / 2.0 << "\" y=\"" << o.height - 12
        << "\" font-size=\"13\" text-anchor=\"middle\">" << o.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << o.height / 2.0
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << o.height / 2.0 << ")\">" << o.y_label << "</text>\n";

    // trajectories, decimated to keep the file small
    for (const auto& p : points) {
        if (p.polyline.size() < 2) continue;
        const size_t stride = std::max<size_t>(1, p.polyline.size() / 400);
        out << "<polyline fill=\"none\" stroke=\"" << class_color(p.cls)
            << "\" stroke-width=\"1\" points=\"";
        for (size_t i = 0; i < p.polyline.size(); i += stride) {
            out << g4(m.px(p.polyline[i](0))) << "," << g4(m.py(p.polyline[i](1))) << " ";
        }
        const auto& last = p.polyline.back();
        out << g4(m.px(last(0))) << "," << g4(m.py(last(1)));
        out << "\"/>\n";
    }

    if (o.ellipse) {
        const auto& e = *o.ellipse;
        out << "<ellipse cx=\"" << g4(m.px(e.cx)) << "\" cy=\"" << g4(m.py(e.cy)) << "\" rx=\""
            << g4(std::abs(m.px(e.cx + e.rx) - m.px(e.cx))) << "\" ry=\""
            << g4(std::abs(m.py(e.cy + e.ry) - m.py(e.cy)))
            << "\" fill=\"#2b6cb0\" fill-opacity=\"0.15\" stroke=\"#2b6cb0\" "
               "stroke-width=\"1.5\"/>\n";
    }
    if (o.marker) {
        out << "<circle cx=\"" << g4(m.px(o.marker->first)) << "\" cy=\""
            << g4(m.py(o.marker->second)) << "\" r=\"3\" fill=\"#c53030\"/>\n";
    }
    out << "</svg>\n";
}

void write_phase_svg(const std::string& path, const std::vector<PhasePoint>& points,
                     const SvgOptions& opt) {
    auto out = open_out(path);
    write_phase_svg(out, points, opt);
}

}  // namespace pwh::io
