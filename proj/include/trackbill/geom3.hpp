#ifndef TRACKBILL_GEOM3_HPP
#define TRACKBILL_GEOM3_HPP

#include <cmath>

#include "trackbill/geom.hpp" // pi, solve_quadratic_stable, HitKind

namespace trackbill {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double a) const { return {x * a, y * a, z * a}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double a, Vec3 v) { return v * a; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 normalized3(Vec3 v) {
    double n = v.norm();
    return {v.x / n, v.y / n, v.z / n};
}

/// Rodrigues rotation of v about the unit axis w by angle a.
inline Vec3 rotate_about(Vec3 v, Vec3 w, double a) {
    double c = std::cos(a), s = std::sin(a);
    return c * v + s * cross(w, v) + (1.0 - c) * dot(w, v) * w;
}

inline Vec3 reflect3(Vec3 v, Vec3 n) { return v - 2.0 * dot(v, n) * n; }

struct Ray3 {
    Vec3 origin;
    Vec3 dir; // unit
    Vec3 at(double t) const { return origin + t * dir; }
};

struct Hit3 {
    HitKind kind = HitKind::miss;
    double t = 0.0;
    Vec3 point;
    Vec3 normal; // inward unit normal

    explicit operator bool() const { return kind == HitKind::hit; }
};

/// Boundary wall of a 3-D track. Three kinds:
///  - plane_rect: flat rectangle (straight-guide walls, gates),
///  - plane_annulus: flat annular sector (side strips of a cylindrical guide
///    whose generator edge is radial),
///  - revolution: surface of revolution x^2 + y^2 = q(z) about an axis,
///    swept by one rectangle edge (cylinder when the edge is parallel to the
///    bend axis, a one-sheet quadric for slanted rolls).
struct Wall3 {
    enum class Kind { plane_rect, plane_annulus, revolution };
    Kind kind = Kind::plane_rect;
    int id = -1;
    int guide = 0;

    // planar kinds
    Vec3 p0;     // reference point (rect center / annulus center)
    Vec3 n;      // inward unit normal
    Vec3 e1, e2; // in-plane orthonormal axes
    double h1 = 0.0, h2 = 0.0; // rect half-extents along e1/e2
    double rin = 0.0, rout = 0.0, span = 0.0; // annulus: radii and angle from e1

    // revolution kind: the patch swept by rotating the generator edge
    // (edge_lp + s * edge_ld in local coordinates, s in [0, edge_len])
    // about the axis by the angle `sweep`.
    Vec3 axis_point, axis_dir; // A, W (unit)
    Vec3 ex, ey;               // axis-perpendicular basis; phi measured from ex
    double c0 = 0.0, c1 = 0.0, c2 = 0.0; // q(z) = c0 + c1 z + c2 z^2
    double z_lo = 0.0, z_hi = 0.0;
    Vec3 edge_lp, edge_ld; // generator in local coordinates (edge_ld.z != 0)
    double edge_len = 0.0;
    double sweep = 0.0;
    double n_sign = +1.0; // inward orientation of the implicit gradient

    Vec3 local(Vec3 q) const {
        Vec3 d = q - axis_point;
        return {dot(d, ex), dot(d, ey), dot(d, axis_dir)};
    }
    Vec3 world_dir(Vec3 l) const { return l.x * ex + l.y * ey + l.z * axis_dir; }

    double qz(double z) const { return c0 + z * (c1 + c2 * z); }

    /// Membership of a local point already known to satisfy the quadric:
    /// its z must come from a generator parameter in range, and its angle
    /// from the generator's own angle at that z must lie within the sweep.
    bool on_patch(Vec3 l) const {
        double s = (l.z - edge_lp.z) / edge_ld.z;
        if (s < -1e-9 || s > edge_len + 1e-9) return false;
        double gx = edge_lp.x + s * edge_ld.x;
        double gy = edge_lp.y + s * edge_ld.y;
        double dphi = std::atan2(l.y, l.x) - std::atan2(gy, gx);
        while (dphi < 0.0) dphi += 2.0 * pi;
        while (dphi >= 2.0 * pi) dphi -= 2.0 * pi;
        return dphi <= sweep + 1e-12 || dphi >= 2.0 * pi - 1e-12;
    }

    Vec3 revolution_normal(Vec3 q) const {
        Vec3 l = local(q);
        Vec3 g{2.0 * l.x, 2.0 * l.y, -(c1 + 2.0 * c2 * l.z)};
        return normalized3(world_dir(g)) * n_sign;
    }
};

/// First intersection of a ray with a 3-D wall after t_min.
inline Hit3 intersect_ray_wall3(const Ray3& ray, const Wall3& w, double t_min = t_min_default) {
    Hit3 out;
    if (w.kind != Wall3::Kind::revolution) {
        double denom = dot(ray.dir, w.n);
        if (std::abs(denom) < 1e-14) return out;
        double t = dot(w.p0 - ray.origin, w.n) / denom;
        if (t <= t_min) return out;
        Vec3 p = ray.at(t);
        Vec3 d = p - w.p0;
        double u1 = dot(d, w.e1), u2 = dot(d, w.e2);
        if (w.kind == Wall3::Kind::plane_rect) {
            if (std::abs(u1) > w.h1 + 1e-12 || std::abs(u2) > w.h2 + 1e-12) return out;
        } else {
            double r = std::hypot(u1, u2);
            if (r < w.rin - 1e-12 || r > w.rout + 1e-12) return out;
            double phi = std::atan2(u2, u1);
            while (phi < 0.0) phi += 2.0 * pi;
            if (phi > w.span + 1e-12) return out;
        }
        out.kind = HitKind::hit;
        out.t = t;
        out.point = p;
        out.normal = w.n;
        return out;
    }

    // Revolution surface in its local frame.
    Vec3 o = w.local(ray.origin);
    Vec3 d{dot(ray.dir, w.ex), dot(ray.dir, w.ey), dot(ray.dir, w.axis_dir)};
    double qa = d.x * d.x + d.y * d.y - w.c2 * d.z * d.z;
    double qb = 2.0 * (o.x * d.x + o.y * d.y) - d.z * (w.c1 + 2.0 * w.c2 * o.z);
    double qc = o.x * o.x + o.y * o.y - w.qz(o.z);
    double t0, t1;
    int roots = 0;
    if (std::abs(qa) < 1e-14) {
        if (std::abs(qb) < 1e-14) return out;
        t0 = -qc / qb;
        roots = 1;
        t1 = t0;
    } else {
        double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) return out;
        QuadRoots qr = solve_quadratic_stable(qb / qa, qc / qa, disc / (qa * qa));
        t0 = qr.t0;
        t1 = qr.t1;
        roots = 2;
    }
    for (int i = 0; i < roots; ++i) {
        double t = (i == 0) ? t0 : t1;
        if (t <= t_min) continue;
        Vec3 p = ray.at(t);
        Vec3 l = w.local(p);
        if (l.z < w.z_lo - 1e-9 || l.z > w.z_hi + 1e-9) continue;
        if (!w.on_patch(l)) continue;
        out.kind = HitKind::hit;
        out.t = t;
        out.point = p;
        out.normal = w.revolution_normal(p);
        return out;
    }
    return out;
}

} // namespace trackbill

#endif
