#ifndef TRACKBILL_GEOM_HPP
#define TRACKBILL_GEOM_HPP

#include <cmath>
#include <optional>
#include <numbers>

namespace trackbill {

inline constexpr double pi = std::numbers::pi;

/// Acceptance threshold for the next intersection parameter; keeps a ray from
/// re-hitting the wall it just left at unit speed and O(1) geometry.
inline constexpr double t_min_default = 1e-10;

/// Width of the discriminant band treated as a tangential (grazing) hit;
/// corresponds to a closest-approach distance within about 1e-12 of the
/// radius for O(1) circles.
inline constexpr double grazing_band = 1e-11;

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double a) const { return {x * a, y * a}; }
    Vec2 operator-() const { return {-x, -y}; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double a, Vec2 v) { return v * a; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
/// Rotation by +90 degrees (left normal of a direction).
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline Vec2 normalized(Vec2 v) {
    double n = v.norm();
    return {v.x / n, v.y / n};
}
inline Vec2 rotate(Vec2 v, double a) {
    double c = std::cos(a), s = std::sin(a);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Carrier of a unit-speed straight flight.
struct Ray {
    Vec2 origin;
    Vec2 dir; // unit

    Vec2 at(double t) const { return origin + t * dir; }
};

/// Circular boundary wall: the portion of a circle inside the angular span
/// [psi0, psi0 + span] (span in (0, 2*pi]). `inward_radial` tells which side
/// the billiard domain lies on: +1 means the inward normal points away from
/// the center (domain outside the circle), -1 toward the center.
struct ArcWall {
    Vec2 center;
    double radius = 1.0;
    double psi0 = 0.0;
    double span = 2.0 * pi;
    int inward_radial = -1;

    bool full_circle() const { return span >= 2.0 * pi - 1e-12; }

    /// Reduce the polar angle of `p` into [psi0, psi0 + 2*pi).
    double angle_of(Vec2 p) const {
        double a = std::atan2(p.y - center.y, p.x - center.x);
        while (a < psi0) a += 2.0 * pi;
        while (a >= psi0 + 2.0 * pi) a -= 2.0 * pi;
        return a;
    }

    bool contains_angle(double a) const {
        if (full_circle()) return true;
        double rel = a - psi0;
        while (rel < 0) rel += 2.0 * pi;
        while (rel >= 2.0 * pi) rel -= 2.0 * pi;
        return rel <= span + 1e-12;
    }

    Vec2 point_at(double psi) const {
        return {center.x + radius * std::cos(psi), center.y + radius * std::sin(psi)};
    }

    Vec2 inward_normal_at(Vec2 p) const {
        return normalized(p - center) * static_cast<double>(inward_radial);
    }
};

/// Straight boundary wall with a fixed inward normal.
struct SegmentWall {
    Vec2 p0, p1;
    Vec2 inward; // unit, perpendicular to p1 - p0

    double length() const { return (p1 - p0).norm(); }
    Vec2 tangent() const { return normalized(p1 - p0); }
};

enum class HitKind { miss, hit, grazing, endpoint };

struct Hit {
    HitKind kind = HitKind::miss;
    double t = 0.0;
    Vec2 point;
    Vec2 normal; // inward unit normal at the hit point

    explicit operator bool() const { return kind == HitKind::hit; }
};

/// Both roots of t^2 + b t + c = 0 computed without cancellation:
/// q = -(b + sign(b) sqrt(disc)) / 2, roots q and c/q.
struct QuadRoots {
    int count = 0;
    double t0 = 0.0, t1 = 0.0; // sorted ascending when count == 2
};

inline QuadRoots solve_quadratic_stable(double b, double c, double disc) {
    QuadRoots roots;
    if (disc < 0.0) return roots;
    double s = std::sqrt(disc);
    double q = (b >= 0.0) ? -0.5 * (b + s) : -0.5 * (b - s);
    double r0, r1;
    if (q == 0.0) {
        r0 = r1 = 0.0;
    } else {
        r0 = q;
        r1 = c / q;
    }
    if (r0 > r1) std::swap(r0, r1);
    roots.count = 2;
    roots.t0 = r0;
    roots.t1 = r1;
    return roots;
}

/// First intersection of a ray with an arc wall after t_min. A discriminant
/// inside the grazing band is reported as HitKind::grazing when the tangency
/// would otherwise be the accepted hit; the caller decides how to proceed.
inline Hit intersect_ray_arc(const Ray& ray, const ArcWall& wall, double t_min = t_min_default) {
    Hit out;
    Vec2 oc = ray.origin - wall.center;
    double b = 2.0 * dot(ray.dir, oc);
    double c = oc.norm2() - wall.radius * wall.radius;
    double disc = b * b - 4.0 * c;
    double band = grazing_band * std::max(1.0, wall.radius * wall.radius);
    if (disc < -band) return out;
    bool grazing = disc <= band;
    QuadRoots roots = solve_quadratic_stable(b, c, std::max(disc, 0.0));
    for (double t : {roots.t0, roots.t1}) {
        if (t <= t_min) continue;
        Vec2 p = ray.at(t);
        if (!wall.contains_angle(wall.angle_of(p))) continue;
        out.kind = grazing ? HitKind::grazing : HitKind::hit;
        out.t = t;
        out.point = p;
        out.normal = wall.inward_normal_at(p);
        return out;
    }
    return out;
}

/// First intersection of a ray with a segment wall after t_min. Hits within
/// 1e-12 of an endpoint are reported as HitKind::endpoint (the excluded set
/// where the billiard map is undefined).
inline Hit intersect_ray_segment(const Ray& ray, const SegmentWall& wall, double t_min = t_min_default) {
    Hit out;
    Vec2 e = wall.p1 - wall.p0;
    double denom = cross(ray.dir, e);
    double len = e.norm();
    if (std::abs(denom) < 1e-14 * len) return out; // parallel
    Vec2 w = wall.p0 - ray.origin;
    double t = cross(w, e) / denom;
    if (t <= t_min) return out;
    double u = cross(w, ray.dir) / denom;
    if (u < -1e-12 || u > 1.0 + 1e-12) return out;
    double edge_dist = std::min(u, 1.0 - u) * len;
    out.t = t;
    out.point = ray.at(t);
    out.normal = wall.inward;
    out.kind = (edge_dist <= 1e-12) ? HitKind::endpoint : HitKind::hit;
    return out;
}

/// Specular reflection of an incoming unit direction at a unit inward normal.
inline Vec2 reflect(Vec2 v, Vec2 n) {
    double vn = dot(v, n);
    return v - 2.0 * vn * n;
}

} // namespace trackbill

#endif
