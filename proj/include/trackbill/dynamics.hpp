#ifndef TRACKBILL_DYNAMICS_HPP
#define TRACKBILL_DYNAMICS_HPP

#include <cmath>
#include <vector>

#include "trackbill/geom.hpp"
#include "trackbill/rng.hpp"
#include "trackbill/track.hpp"

namespace trackbill {

/// Post-collision phase point: boundary wall, arclength coordinate on its
/// loop, angle to the oriented tangent, and the Cartesian shadow.
struct CollisionState {
    int wall = -1;
    double s = 0.0;
    double theta = 0.0;
    Vec2 q, v;
    int guide = 0;
    int loop = 0;
};

enum class StepStatus { ok, singular, grazing, endpoint, no_hit, step_limit };

inline const char* to_string(StepStatus s) {
    switch (s) {
        case StepStatus::ok: return "ok";
        case StepStatus::singular: return "singular";
        case StepStatus::grazing: return "grazing";
        case StepStatus::endpoint: return "endpoint";
        case StepStatus::no_hit: return "no-hit";
        default: return "step-limit";
    }
}

struct StepResult {
    StepStatus status = StepStatus::no_hit;
    CollisionState next;
    double flight = 0.0;
    double renorm = 0.0; // |1 - |v|| correction applied after reflection
};

/// Construct the post-collision state at local arclength `sl` on wall `w`.
inline CollisionState make_state(const TrackGeometry& geo, int wall_id, double sl, double theta) {
    const Wall& w = geo.walls[wall_id];
    CollisionState x;
    x.wall = wall_id;
    x.s = w.s_begin + sl;
    x.theta = theta;
    x.q = w.point_at_local(sl);
    Vec2 t = w.tangent_at(x.q);
    Vec2 n = w.inward_at(x.q);
    x.v = std::cos(theta) * t + std::sin(theta) * n;
    x.guide = w.guide;
    x.loop = w.loop;
    return x;
}

/// Locate the wall containing global arclength s on the given loop.
inline const Wall& locate_wall(const TrackGeometry& geo, int loop, double s) {
    const Wall* best = nullptr;
    for (const Wall& w : geo.walls) {
        if (w.loop != loop) continue;
        if (s >= w.s_begin - 1e-12 && s <= w.s_begin + w.length + 1e-12) {
            best = &w;
            if (s < w.s_begin + w.length) break;
        }
    }
    if (!best) throw TrackError(ErrorCode::parse_error, "arclength outside the atlas");
    return *best;
}

/// Time reversal J: same point, angle pi - theta.
inline CollisionState time_reverse(const TrackGeometry& geo, const CollisionState& x) {
    const Wall& w = geo.walls[x.wall];
    return make_state(geo, x.wall, x.s - w.s_begin, pi - x.theta);
}

namespace detail {

/// Conservative broad-phase rejection: can the ray meet the wall's bounding
/// circle at all?
inline bool may_hit(const Ray& ray, Vec2 center, double radius) {
    Vec2 oc = center - ray.origin;
    double b = dot(ray.dir, oc);
    double d2 = oc.norm2();
    double r2 = (radius + 1e-9) * (radius + 1e-9);
    if (d2 <= r2) return true;
    if (b <= 0.0) return false;
    return d2 - b * b <= r2;
}

} // namespace detail

/// One application of the billiard map. The smallest-parameter wall event
/// wins; tangential or endpoint events terminate the orbit with a reason.
inline StepResult step(const TrackGeometry& geo, const CollisionState& x) {
    StepResult out;
    Ray ray{x.q, x.v};

    Hit best;
    const Wall* best_wall = nullptr;
    for (const Wall& w : geo.walls) {
        Hit h;
        if (w.kind == WallKind::arc) {
            if (!detail::may_hit(ray, w.arc.center, w.arc.radius)) continue;
            h = intersect_ray_arc(ray, w.arc);
        } else {
            Vec2 mid = 0.5 * (w.seg.p0 + w.seg.p1);
            if (!detail::may_hit(ray, mid, 0.5 * w.length)) continue;
            h = intersect_ray_segment(ray, w.seg);
        }
        if (h.kind == HitKind::miss) continue;
        if (!best_wall || h.t < best.t) {
            best = h;
            best_wall = &w;
        }
    }
    if (!best_wall) {
        out.status = StepStatus::no_hit;
        return out;
    }
    if (best.kind == HitKind::grazing) {
        out.status = StepStatus::grazing;
        return out;
    }
    if (best.kind == HitKind::endpoint) {
        out.status = StepStatus::endpoint;
        return out;
    }
    // Leak guard: the hit must genuinely lie on the wall.
    if (best_wall->kind == WallKind::arc) {
        if (std::abs((best.point - best_wall->arc.center).norm() - best_wall->arc.radius) > 1e-9) {
            out.status = StepStatus::no_hit;
            return out;
        }
    }

    Vec2 v1 = reflect(x.v, best.normal);
    double nv = v1.norm();
    out.renorm = std::abs(1.0 - nv);
    v1 = {v1.x / nv, v1.y / nv};

    Vec2 t = best_wall->tangent_at(best.point);
    Vec2 n = best_wall->inward_at(best.point);
    double ct = dot(v1, t);
    double st = dot(v1, n);
    double theta1 = std::atan2(st, ct);
    if (theta1 < 1e-10 || theta1 > pi - 1e-10) {
        out.status = StepStatus::singular;
        return out;
    }

    out.status = StepStatus::ok;
    out.flight = best.t;
    out.next.wall = best_wall->id;
    out.next.s = best_wall->s_global(best.point);
    out.next.theta = theta1;
    out.next.q = best.point;
    out.next.v = v1;
    out.next.guide = best_wall->guide;
    out.next.loop = best_wall->loop;
    return out;
}

/// Tangential component of the velocity along the travel-oriented centerline
/// at the foot point of the collision (signed speed in [-1, 1]).
inline double v_star(const TrackGeometry& geo, const CollisionState& x) {
    return dot(x.v, geo.centerline_tangent(x.guide, x.q));
}

enum class Rotation { L, R, N };

/// Invariant rotation class by the collision angle, with a 1e-12 tie band.
inline Rotation classify(const CollisionState& x) {
    if (std::abs(x.theta - 0.5 * pi) < 1e-12) return Rotation::N;
    return (x.theta > 0.5 * pi) ? Rotation::L : Rotation::R;
}

struct TraceRow {
    CollisionState state;
    double flight = 0.0; // from the previous collision (0 for the seed row)
    double vstar = 0.0;
};

struct OrbitTrace {
    std::vector<TraceRow> rows;
    StepStatus termination = StepStatus::ok; // ok == completed all steps
    long steps_completed = 0;
    double max_renorm = 0.0;
};

inline OrbitTrace run_orbit(const TrackGeometry& geo, const CollisionState& x0, long steps,
                            bool record = true) {
    OrbitTrace tr;
    if (record) tr.rows.push_back({x0, 0.0, v_star(geo, x0)});
    CollisionState x = x0;
    for (long i = 0; i < steps; ++i) {
        StepResult r = step(geo, x);
        if (r.status != StepStatus::ok) {
            tr.termination = r.status;
            return tr;
        }
        tr.max_renorm = std::max(tr.max_renorm, r.renorm);
        x = r.next;
        ++tr.steps_completed;
        if (record) tr.rows.push_back({x, r.flight, v_star(geo, x)});
    }
    return tr;
}

/// Draw a post-collision state from the invariant measure (uniform arclength
/// over both loops, uniform cos(theta)), restricted to one rotation class.
inline CollisionState sample_state(const TrackGeometry& geo, SplitMix64& rng, Rotation side) {
    for (;;) {
        double s = rng.uniform(0.0, geo.boundary_length());
        int loop = 0;
        if (s >= geo.loop_length[0]) {
            s -= geo.loop_length[0];
            loop = 1;
        }
        double u = rng.next_double(); // cos(theta) magnitude
        if (u < 1e-9 || u > 1.0 - 1e-9) continue;
        double theta = (side == Rotation::L) ? std::acos(-u) : std::acos(u);
        const Wall& w = locate_wall(geo, loop, s);
        double sl = std::clamp(s - w.s_begin, 1e-9, w.length - 1e-9);
        return make_state(geo, w.id, sl, theta);
    }
}

/// An entering collision: the first collision with a circular guide's own
/// boundary after the orbit crossed into that guide.
inline bool is_entering(const TrackGeometry& geo, int previous_guide,
                        const CollisionState& x) {
    if (geo.spec.guides[x.guide].kind != GuideSpec::Kind::circular) return false;
    return x.guide != previous_guide;
}

struct ReturnToEntering {
    StepStatus status = StepStatus::ok;
    CollisionState entry;        // the next entering collision
    CollisionState guide_exit;   // last collision inside the starting guide
    int collisions_in_guide = 0; // after the starting entering collision
    double path_after_exit = 0.0; // flight length from guide_exit to entry
    long steps = 0;
};

/// Iterate the billiard map from an entering collision until the next
/// entering collision of any circular guide.
inline ReturnToEntering first_return_to_entering(const TrackGeometry& geo,
                                                 const CollisionState& x0,
                                                 long step_limit = 1000000) {
    ReturnToEntering out;
    out.guide_exit = x0;
    CollisionState x = x0;
    bool inside_start = true;
    for (long i = 0; i < step_limit; ++i) {
        StepResult r = step(geo, x);
        if (r.status != StepStatus::ok) {
            out.status = r.status;
            return out;
        }
        ++out.steps;
        if (inside_start && r.next.guide == x0.guide) {
            ++out.collisions_in_guide;
            out.guide_exit = r.next;
        } else {
            inside_start = false;
        }
        if (!inside_start) out.path_after_exit += r.flight;
        if (is_entering(geo, x.guide, r.next)) {
            out.entry = r.next;
            return out;
        }
        x = r.next;
    }
    out.status = StepStatus::step_limit;
    return out;
}

} // namespace trackbill

#endif
