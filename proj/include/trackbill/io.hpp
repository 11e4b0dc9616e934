#ifndef TRACKBILL_IO_HPP
#define TRACKBILL_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "trackbill/dynamics.hpp"
#include "trackbill/errors.hpp"
#include "trackbill/track.hpp"
#include "trackbill/trackfile.hpp"

namespace trackbill {

/// Atomic file write: temp file in the same directory, then rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw TrackError(ErrorCode::io_error, "cannot open " + tmp);
        out << content;
        if (!out) throw TrackError(ErrorCode::io_error, "write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw TrackError(ErrorCode::io_error, "rename failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TrackError(ErrorCode::io_error, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline const char* termination_label(StepStatus s) {
    // A run that exhausts its step budget terminates by the step limit.
    if (s == StepStatus::ok) return "step-limit";
    return to_string(s);
}

/// Orbit trace: step,wall,s,theta,x,y,t_flight,vstar with the termination
/// reason in a footer comment. Floats are shortest round-trip decimals.
inline std::string orbit_csv(const OrbitTrace& tr) {
    std::ostringstream os;
    os << "step,wall,s,theta,x,y,t_flight,vstar\n";
    for (size_t i = 0; i < tr.rows.size(); ++i) {
        const TraceRow& r = tr.rows[i];
        os << i << ',' << r.state.wall << ',' << format_double(r.state.s) << ','
           << format_double(r.state.theta) << ',' << format_double(r.state.q.x) << ','
           << format_double(r.state.q.y) << ',' << format_double(r.flight) << ','
           << format_double(r.vstar) << '\n';
    }
    os << "# termination: " << termination_label(tr.termination) << '\n';
    return os.str();
}

/// Minimal SVG 1.1 rendering: the two boundary loops as paths and the
/// trajectory as a polyline; viewBox from the bounding box plus 5% padding.
inline std::string track_svg(const TrackGeometry& geo, const OrbitTrace* trace = nullptr) {
    Vec2 lo, hi;
    geo.bounding_box(lo, hi);
    double pad_x = 0.05 * (hi.x - lo.x), pad_y = 0.05 * (hi.y - lo.y);
    lo.x -= pad_x;
    lo.y -= pad_y;
    hi.x += pad_x;
    hi.y += pad_y;

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\""
       << format_double(lo.x) << " " << format_double(lo.y) << " "
       << format_double(hi.x - lo.x) << " " << format_double(hi.y - lo.y) << "\">\n";

    // One path per loop, walls in atlas order.
    for (int loop = 0; loop < 2; ++loop) {
        std::vector<const Wall*> in_loop;
        for (const Wall& w : geo.walls)
            if (w.loop == loop) in_loop.push_back(&w);
        if (in_loop.empty()) continue;
        std::sort(in_loop.begin(), in_loop.end(),
                  [](const Wall* a, const Wall* b) { return a->s_begin < b->s_begin; });
        os << "<path fill=\"none\" stroke=\"black\" stroke-width=\""
           << format_double(0.004 * (hi.x - lo.x)) << "\" d=\"";
        Vec2 start = in_loop.front()->start();
        os << "M " << format_double(start.x) << " " << format_double(start.y) << " ";
        for (const Wall* w : in_loop) {
            Vec2 e = w->end();
            if (w->kind == WallKind::segment) {
                os << "L " << format_double(e.x) << " " << format_double(e.y) << " ";
            } else {
                // Full circles need two arc commands.
                int pieces = w->arc.span > pi ? 2 : 1;
                double step_angle = (w->arc_ccw ? 1.0 : -1.0) * w->arc.span / pieces;
                double a = w->arc_psi_start;
                for (int k = 0; k < pieces; ++k) {
                    a += step_angle;
                    Vec2 q = w->arc.point_at(a);
                    os << "A " << format_double(w->arc.radius) << " "
                       << format_double(w->arc.radius) << " 0 0 " << (w->arc_ccw ? 1 : 0)
                       << " " << format_double(q.x) << " " << format_double(q.y) << " ";
                }
            }
        }
        os << "Z\"/>\n";
    }

    if (trace && trace->rows.size() > 1) {
        os << "<polyline fill=\"none\" stroke=\"#c22\" stroke-width=\""
           << format_double(0.002 * (hi.x - lo.x)) << "\" points=\"";
        for (const TraceRow& r : trace->rows)
            os << format_double(r.state.q.x) << "," << format_double(r.state.q.y) << " ";
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace trackbill

#endif
