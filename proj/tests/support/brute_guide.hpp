#ifndef TRACKBILL_TESTS_BRUTE_GUIDE_HPP
#define TRACKBILL_TESTS_BRUTE_GUIDE_HPP

// Independent Cartesian ray tracer for a normalized annular-sector guide
// (outer radius 1, inner radius r, angular span [0, alpha]). Used as the
// oracle for the closed-form chord arithmetic; it shares no code path with
// the library implementation (its circle intersection is the naive
// closest-approach construction).

#include <cmath>
#include <optional>

namespace brute {

struct V {
    double x, y;
};
inline V operator+(V a, V b) { return {a.x + b.x, a.y + b.y}; }
inline V operator-(V a, V b) { return {a.x - b.x, a.y - b.y}; }
inline V operator*(double s, V a) { return {s * a.x, s * a.y}; }
inline double dot(V a, V b) { return a.x * b.x + a.y * b.y; }
inline double crs(V a, V b) { return a.x * b.y - a.y * b.x; }
inline double nrm(V a) { return std::sqrt(dot(a, a)); }

struct BruteResult {
    bool ok = false;          // left the sector through a gate
    int outer_after = 0;      // outer-circle collisions after the entry one
    int inner_after = 0;      // inner-circle collisions after the entry one
    int last_circle = 0;      // 0 outer, 1 inner (circle of the last collision)
    double last_angle = 0.0;  // polar angle of the last collision
    int exit_side = 0;        // +1 exited at alpha, -1 at 0
    V exit_point{0.0, 0.0};   // gate crossing point
};

// Smallest t > eps with |p + t d| = R (closest-approach construction).
inline std::optional<double> circle_first(V p, V d, double R, double eps) {
    double tca = -dot(p, d);
    double h2 = dot(p, p) - tca * tca;
    double q = R * R - h2;
    if (q < 0.0) return std::nullopt;
    double dt = std::sqrt(q);
    for (double t : {tca - dt, tca + dt}) {
        if (t > eps) return t;
    }
    return std::nullopt;
}

// Crossing of the radial gate at polar angle a, restricted to radius (rin, 1).
inline std::optional<double> gate_first(V p, V d, double a, double rin, double eps) {
    V g{std::cos(a), std::sin(a)};
    double den = crs(g, d);
    if (std::abs(den) < 1e-300) return std::nullopt;
    double t = -crs(g, p) / den;
    if (t <= eps) return std::nullopt;
    V q = p + t * d;
    if (dot(g, q) <= 0.0) return std::nullopt; // wrong half-line
    double rad = nrm(q);
    if (rad < rin - 1e-9 || rad > 1.0 + 1e-9) return std::nullopt;
    return t;
}

// Trace from a post-collision state on one of the circles until a gate
// crossing. entry_circle: 0 outer, 1 inner. theta is the outer-circle
// collision angle of the passage (conserved).
inline BruteResult trace(double r, double alpha, int entry_circle, double entry_pos,
                         double theta, int max_events = 200000) {
    constexpr double eps = 1e-10;
    BruteResult res;
    V p, v;
    if (entry_circle == 0) {
        p = {std::cos(entry_pos), std::sin(entry_pos)};
        V tan{-p.y, p.x};
        V nin{-p.x, -p.y};
        v = std::cos(theta) * tan + std::sin(theta) * nin;
    } else {
        p = {r * std::cos(entry_pos), r * std::sin(entry_pos)};
        V tan{-std::sin(entry_pos), std::cos(entry_pos)};
        V nout{std::cos(entry_pos), std::sin(entry_pos)};
        double tangential = std::cos(theta) / r;
        double radial = std::sqrt(std::max(0.0, 1.0 - tangential * tangential));
        v = tangential * tan + radial * nout;
    }
    res.last_circle = entry_circle;
    res.last_angle = entry_pos;

    for (int k = 0; k < max_events; ++k) {
        double t_outer = circle_first(p, v, 1.0, eps).value_or(1e300);
        double t_inner = circle_first(p, v, r, eps).value_or(1e300);
        double t_gate0 = gate_first(p, v, 0.0, r, eps).value_or(1e300);
        double t_gatea = gate_first(p, v, alpha, r, eps).value_or(1e300);
        double tmin = std::min(std::min(t_outer, t_inner), std::min(t_gate0, t_gatea));
        if (tmin >= 1e300) return res; // leaked
        V q = p + tmin * v;
        if (tmin == t_gate0 || tmin == t_gatea) {
            res.ok = true;
            res.exit_side = (tmin == t_gatea) ? +1 : -1;
            res.exit_point = q;
            return res;
        }
        double rad = nrm(q);
        V n = (tmin == t_outer) ? V{-q.x / rad, -q.y / rad} : V{q.x / rad, q.y / rad};
        v = v - (2.0 * dot(v, n)) * n;
        p = q;
        if (tmin == t_outer)
            ++res.outer_after;
        else
            ++res.inner_after;
        res.last_circle = (tmin == t_outer) ? 0 : 1;
        res.last_angle = std::atan2(q.y, q.x);
        if (res.last_angle < -1e-9) res.last_angle += 2.0 * 3.14159265358979323846;
    }
    return res;
}

} // namespace brute

#endif
