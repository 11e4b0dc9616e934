#ifndef TRACKBILL_TRACK_HPP
#define TRACKBILL_TRACK_HPP

#include <cmath>
#include <string>
#include <vector>

#include "trackbill/errors.hpp"
#include "trackbill/geom.hpp"
#include "trackbill/guide.hpp"

namespace trackbill {

struct GuideSpec {
    enum class Kind { circular, straight };
    Kind kind = Kind::straight;
    // circular guides
    double radius = 0.0; // centerline radius
    double angle = 0.0;  // central angle in (0, 2*pi)
    int turn = +1;       // +1 left, -1 right
    double roll = 0.0;   // 3-D only: bending-direction angle about the axis
    // straight guides
    double length = 0.0;

    static GuideSpec arc(double radius, double angle, int turn, double roll = 0.0) {
        GuideSpec g;
        g.kind = Kind::circular;
        g.radius = radius;
        g.angle = angle;
        g.turn = turn;
        g.roll = roll;
        return g;
    }
    static GuideSpec straight(double length) {
        GuideSpec g;
        g.kind = Kind::straight;
        g.length = length;
        return g;
    }
};

struct TrackSpec {
    int dimension = 2;
    double halfwidth = 0.0;                // 2-D tube half-width
    double section_a = 0.0, section_b = 0.0; // 3-D section rectangle
    std::vector<GuideSpec> guides;         // cyclic order
};

// ---------------------------------------------------------------------------
// Walls with an oriented arclength atlas.
// ---------------------------------------------------------------------------

enum class WallKind { arc, segment };

/// One boundary wall together with its place in the arclength atlas. Both
/// boundary loops are oriented counterclockwise, so every wall's oriented
/// tangent has a positive component along one fixed sense of circulation.
/// This makes the rotation classes {theta < pi/2} and {theta > pi/2}
/// invariant under the dynamics: a circulating particle meets every wall of
/// either loop on the same side of its tangent. The billiard domain lies to
/// the left of the outer loop and to the right of the inner loop; the
/// handedness of the (tangent, inward normal) frame therefore differs
/// between the loops, which shows up as a sign in cross-loop tangent maps
/// (see step_jacobian) but cancels in every projective quantity.
struct Wall {
    WallKind kind = WallKind::segment;
    ArcWall arc;
    SegmentWall seg; // p0 -> p1 oriented along increasing s
    bool arc_ccw = true;      // +s direction is counterclockwise on the arc
    double arc_psi_start = 0; // polar angle at the oriented start
    int id = -1;
    int guide = 0;
    int loop = 0; // 0 outer, 1 inner
    double s_begin = 0.0;
    double length = 0.0;
    double curvature = 0.0; // + on a guide's outer circle, - on its inner circle

    Vec2 start() const {
        if (kind == WallKind::segment) return seg.p0;
        return arc.point_at(arc_psi_start);
    }
    Vec2 end() const {
        if (kind == WallKind::segment) return seg.p1;
        return arc.point_at(arc_psi_start + (arc_ccw ? arc.span : -arc.span));
    }
    Vec2 tangent_at(Vec2 q) const {
        if (kind == WallKind::segment) return seg.tangent();
        Vec2 u = normalized(q - arc.center);
        return arc_ccw ? perp(u) : -perp(u);
    }
    Vec2 inward_at(Vec2 q) const {
        if (kind == WallKind::segment) return seg.inward;
        return arc.inward_normal_at(q);
    }
    /// Local arclength of a point on the wall, in [0, length].
    double s_local(Vec2 q) const {
        if (kind == WallKind::segment) {
            return dot(q - seg.p0, seg.tangent());
        }
        double a = std::atan2(q.y - arc.center.y, q.x - arc.center.x);
        double rel = arc_ccw ? a - arc_psi_start : arc_psi_start - a;
        while (rel < -1e-9) rel += 2.0 * pi;
        while (rel > 2.0 * pi - 1e-9 && rel > arc.span + 1e-9) rel -= 2.0 * pi;
        return std::clamp(rel, 0.0, arc.span) * arc.radius;
    }
    double s_global(Vec2 q) const { return s_begin + s_local(q); }
    Vec2 point_at_local(double sl) const {
        if (kind == WallKind::segment) return seg.p0 + sl * seg.tangent();
        double a = arc_psi_start + (arc_ccw ? sl : -sl) / arc.radius;
        return arc.point_at(a);
    }
};

/// Centerline piece of one guide, used for the tangential-velocity
/// projection and for the 2-D <-> 3-D correspondence.
struct CenterlinePiece {
    bool circular = false;
    Vec2 p0, dir0; // entry point and direction
    double length = 0.0;
    // circular pieces
    Vec2 center;
    double radius = 0.0;
    int turn = +1;
};

/// Virtual transverse section between consecutive guides; bookkeeping only,
/// never reflecting.
struct Gate {
    Vec2 pos;  // centerline junction
    Vec2 dir;  // travel direction at the junction
    double halfwidth = 0.0;
    int guide_before = 0;
    int guide_after = 0;
};

struct TrackGeometry {
    TrackSpec spec;
    std::vector<Wall> walls;
    std::vector<CenterlinePiece> centerline;
    std::vector<Gate> gates;
    double loop_length[2] = {0.0, 0.0};
    int turning_sign = +1; // +1: guide order travels counterclockwise
    bool annulus = false;

    double boundary_length() const { return loop_length[0] + loop_length[1]; }

    /// Travel-oriented unit tangent of the centerline at the foot point of q
    /// within guide `gi` (q projected along the transverse section).
    Vec2 centerline_tangent(int gi, Vec2 q) const {
        const CenterlinePiece& c = centerline[gi];
        if (!c.circular) return c.dir0;
        Vec2 u = normalized(q - c.center);
        Vec2 t = perp(u);
        return (c.turn > 0) ? t : -t;
    }

    /// Bounding box of all walls (for rendering).
    void bounding_box(Vec2& lo, Vec2& hi) const {
        lo = {1e300, 1e300};
        hi = {-1e300, -1e300};
        for (const Wall& w : walls) {
            if (w.kind == WallKind::segment) {
                for (Vec2 p : {w.seg.p0, w.seg.p1}) {
                    lo.x = std::min(lo.x, p.x);
                    lo.y = std::min(lo.y, p.y);
                    hi.x = std::max(hi.x, p.x);
                    hi.y = std::max(hi.y, p.y);
                }
            } else {
                lo.x = std::min(lo.x, w.arc.center.x - w.arc.radius);
                lo.y = std::min(lo.y, w.arc.center.y - w.arc.radius);
                hi.x = std::max(hi.x, w.arc.center.x + w.arc.radius);
                hi.y = std::max(hi.y, w.arc.center.y + w.arc.radius);
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Validation helpers.
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_spec_2d(const TrackSpec& spec) {
    if (spec.dimension != 2)
        throw TrackError(ErrorCode::parse_error, "expected a 2-D spec");
    if (!(spec.halfwidth > 0.0))
        throw TrackError(ErrorCode::parse_error, "halfwidth must be positive");
    if (spec.guides.empty())
        throw TrackError(ErrorCode::adjacency_fail, "track needs at least one guide");
    size_t n = spec.guides.size();
    for (size_t i = 0; i < n; ++i) {
        const GuideSpec& g = spec.guides[i];
        if (g.kind == GuideSpec::Kind::circular) {
            if (!(g.radius > spec.halfwidth))
                throw TrackError(ErrorCode::parse_error,
                                 "circular guide radius must exceed the halfwidth");
            if (!(g.angle > 0.0 && g.angle < 2.0 * pi))
                throw TrackError(ErrorCode::parse_error,
                                 "circular guide angle must lie in (0, 2*pi)");
            const GuideSpec& next = spec.guides[(i + 1) % n];
            if (next.kind == GuideSpec::Kind::circular)
                throw TrackError(ErrorCode::adjacency_fail,
                                 "circular guides must be separated by a straight guide");
        } else if (!(g.length > 0.0)) {
            throw TrackError(ErrorCode::parse_error, "straight guide length must be positive");
        }
    }
}

inline bool near(Vec2 a, Vec2 b, double tol) { return (a - b).norm() <= tol; }

/// Signed area contribution of an oriented wall (shoelace with exact arcs).
inline double area_term(const Wall& w) {
    if (w.kind == WallKind::segment) return 0.5 * cross(w.seg.p0, w.seg.p1);
    double a = w.arc_psi_start;
    double b = a + (w.arc_ccw ? w.arc.span : -w.arc.span);
    double rho = w.arc.radius;
    Vec2 c = w.arc.center;
    double term = rho * rho * (b - a) +
                  rho * (c.x * (std::sin(b) - std::sin(a)) + c.y * (std::cos(a) - std::cos(b)));
    return 0.5 * term;
}

inline bool walls_intersect(const Wall& wa, const Wall& wb);

} // namespace detail

// ---------------------------------------------------------------------------
// Track construction.
// ---------------------------------------------------------------------------

/// Assemble the tubular domain of a 2-D track spec: wall list with the
/// oriented arclength atlas on both boundary loops, the centerline, and the
/// transverse-section gates. Throws TrackError with codes adjacency_fail,
/// closure_fail or self_intersect.
inline TrackGeometry build_track(const TrackSpec& spec) {
    detail::validate_spec_2d(spec);
    double eps = spec.halfwidth;

    TrackGeometry geo;
    geo.spec = spec;

    Vec2 p{0.0, 0.0};
    Vec2 d{1.0, 0.0};
    double turning = 0.0;
    std::vector<Wall> left, right; // walls on the left/right of travel, guide order
    size_t n = spec.guides.size();

    for (size_t i = 0; i < n; ++i) {
        const GuideSpec& g = spec.guides[i];
        geo.gates.push_back(
            {p, d, eps, static_cast<int>((i + n - 1) % n), static_cast<int>(i)});
        CenterlinePiece piece;
        piece.p0 = p;
        piece.dir0 = d;
        if (g.kind == GuideSpec::Kind::straight) {
            piece.circular = false;
            piece.length = g.length;
            Vec2 nleft = perp(d);
            Vec2 q = p + g.length * d;
            Wall wl, wr;
            wl.kind = wr.kind = WallKind::segment;
            wl.guide = wr.guide = static_cast<int>(i);
            wl.curvature = wr.curvature = 0.0;
            // Oriented along inward-normal-rotated-by-minus-90.
            // Endpoints in travel order; the atlas orientation is assigned
            // once the loop is known.
            wl.seg = {p + eps * nleft, q + eps * nleft, -1.0 * nleft};
            wr.seg = {p - eps * nleft, q - eps * nleft, nleft};
            wl.length = wr.length = g.length;
            left.push_back(wl);
            right.push_back(wr);
            p = q;
        } else {
            piece.circular = true;
            piece.turn = g.turn;
            double s = (g.turn > 0) ? +1.0 : -1.0;
            Vec2 c = p + g.radius * s * perp(d);
            piece.center = c;
            piece.radius = g.radius;
            piece.length = g.radius * g.angle;
            double psi_s = std::atan2(p.y - c.y, p.x - c.x);
            double sweep = s * g.angle;
            turning += sweep;
            double r1 = g.radius + eps, r2 = g.radius - eps;

            Wall outer, inner;
            outer.kind = inner.kind = WallKind::arc;
            outer.guide = inner.guide = static_cast<int>(i);
            outer.arc = {c, r1, (s > 0) ? psi_s : psi_s - g.angle, g.angle, -1};
            inner.arc = {c, r2, (s > 0) ? psi_s : psi_s - g.angle, g.angle, +1};
            outer.curvature = +1.0 / r1;
            inner.curvature = -1.0 / r2;
            outer.length = r1 * g.angle;
            inner.length = r2 * g.angle;
            if (s > 0) { // center on the left: inner circle borders the left side
                left.push_back(inner);
                right.push_back(outer);
            } else {
                left.push_back(outer);
                right.push_back(inner);
            }
            p = c + g.radius * Vec2{std::cos(psi_s + sweep), std::sin(psi_s + sweep)};
            d = rotate(d, sweep);
        }
        geo.centerline.push_back(piece);
    }

    if (std::abs(std::abs(turning) - 2.0 * pi) > 1e-9)
        throw TrackError(ErrorCode::closure_fail, "total turning is not +-2*pi");
    if (p.norm() > 1e-9 || (d - Vec2{1.0, 0.0}).norm() > 1e-9)
        throw TrackError(ErrorCode::closure_fail, "centerline does not close");
    geo.turning_sign = (turning > 0) ? +1 : -1;

    // Loop assignment: travelling counterclockwise, the right side of the
    // tube is the outer boundary loop; mirrored for clockwise tracks.
    std::vector<Wall>& outer_chain = (geo.turning_sign > 0) ? right : left;
    std::vector<Wall>& inner_chain = (geo.turning_sign > 0) ? left : right;

    auto orient_wall = [](Wall& w, int loop) {
        w.loop = loop;
        if (w.kind == WallKind::segment) {
            // Counterclockwise loop traversal: on the outer loop the inward
            // normal is the left normal of the tangent, on the inner loop
            // the right normal.
            Vec2 t = (loop == 0) ? Vec2{w.seg.inward.y, -w.seg.inward.x} : perp(w.seg.inward);
            if (dot(w.seg.p1 - w.seg.p0, t) < 0.0) std::swap(w.seg.p0, w.seg.p1);
        } else {
            bool ccw = (loop == 0) == (w.arc.inward_radial < 0);
            w.arc_ccw = ccw;
            w.arc_psi_start = ccw ? w.arc.psi0 : w.arc.psi0 + w.arc.span;
        }
    };

    auto assemble = [&](std::vector<Wall>& chain, int loop) {
        size_t m = chain.size();
        for (Wall& w : chain) orient_wall(w, loop);
        // The oriented traversal may run with or against guide order;
        // detect it from endpoint adjacency.
        bool forward = true;
        if (m > 1) forward = detail::near(chain[0].end(), chain[1].start(), 1e-6);
        double s = 0.0;
        std::vector<Wall*> order;
        for (size_t k = 0; k < m; ++k)
            order.push_back(&chain[forward ? k : m - 1 - k]);
        for (size_t k = 0; k < m; ++k) {
            Wall* w = order[k];
            Wall* nx = order[(k + 1) % m];
            if (!detail::near(w->end(), nx->start(), 1e-9))
                throw TrackError(ErrorCode::closure_fail, "boundary loop has a gap");
            w->s_begin = s;
            s += w->length;
        }
        geo.loop_length[loop] = s;
        double area = 0.0;
        for (Wall* w : order) area += detail::area_term(*w);
        if (area <= 0.0)
            throw TrackError(ErrorCode::closure_fail, "boundary loop orientation error");
        for (Wall* w : order) {
            w->id = static_cast<int>(geo.walls.size());
            geo.walls.push_back(*w);
        }
    };
    assemble(outer_chain, 0);
    assemble(inner_chain, 1);
    if (geo.loop_length[0] <= geo.loop_length[1])
        throw TrackError(ErrorCode::closure_fail, "outer loop shorter than inner loop");

    // Pairwise non-intersection of walls (touching shared endpoints allowed).
    for (size_t a = 0; a < geo.walls.size(); ++a)
        for (size_t b = a + 1; b < geo.walls.size(); ++b)
            if (detail::walls_intersect(geo.walls[a], geo.walls[b]))
                throw TrackError(ErrorCode::self_intersect, "tube walls intersect");

    return geo;
}

/// Degenerate annular domain (a full circular guide with no sections).
/// Not a track; exposed as the integrable baseline for tests and the
/// Lyapunov-exponent gate.
inline TrackGeometry make_annulus(double radius, double halfwidth) {
    if (!(radius > halfwidth && halfwidth > 0.0))
        throw TrackError(ErrorCode::parse_error, "annulus needs radius > halfwidth > 0");
    TrackGeometry geo;
    geo.annulus = true;
    geo.spec.dimension = 2;
    geo.spec.halfwidth = halfwidth;
    geo.spec.guides = {GuideSpec::arc(radius, 2.0 * pi, +1)};
    double r1 = radius + halfwidth, r2 = radius - halfwidth;

    Wall outer;
    outer.kind = WallKind::arc;
    outer.arc = {{0.0, 0.0}, r1, 0.0, 2.0 * pi, -1};
    outer.arc_ccw = true;
    outer.arc_psi_start = 0.0;
    outer.curvature = +1.0 / r1;
    outer.length = 2.0 * pi * r1;
    outer.loop = 0;
    outer.guide = 0;
    outer.id = 0;

    Wall inner;
    inner.kind = WallKind::arc;
    inner.arc = {{0.0, 0.0}, r2, 0.0, 2.0 * pi, +1};
    inner.arc_ccw = true; // both loops counterclockwise
    inner.arc_psi_start = 0.0;
    inner.curvature = -1.0 / r2;
    inner.length = 2.0 * pi * r2;
    inner.loop = 1;
    inner.guide = 0;
    inner.id = 1;

    geo.walls = {outer, inner};
    geo.loop_length[0] = outer.length;
    geo.loop_length[1] = inner.length;

    CenterlinePiece piece;
    piece.circular = true;
    piece.center = {0.0, 0.0};
    piece.radius = radius;
    piece.turn = +1;
    piece.p0 = {radius, 0.0};
    piece.dir0 = {0.0, 1.0};
    piece.length = 2.0 * pi * radius;
    geo.centerline = {piece};
    return geo;
}

// ---------------------------------------------------------------------------
// Guide classification and Condition H at track level.
// ---------------------------------------------------------------------------

/// Classification of circular guide `gi` of a built track, normalized to its
/// outer radius.
inline GuideReport classify_track_guide(const TrackGeometry& geo, int gi) {
    const GuideSpec& g = geo.spec.guides[gi];
    double r1 = g.radius + geo.spec.halfwidth;
    double r2 = g.radius - geo.spec.halfwidth;
    NormalizedGuide ng(r2 / r1, g.angle);
    GuideReport rep = classify_guide(ng);
    rep.guide_index = gi;
    rep.outer_radius = r1;
    return rep;
}

/// Reports for every circular guide, with focal lengths when classified.
inline std::vector<GuideReport> analyze_track(const TrackGeometry& geo,
                                              const FocalLengthOptions& opt = {}) {
    std::vector<GuideReport> reps;
    for (size_t i = 0; i < geo.spec.guides.size(); ++i) {
        if (geo.spec.guides[i].kind != GuideSpec::Kind::circular) continue;
        GuideReport rep = classify_track_guide(geo, static_cast<int>(i));
        if (rep.classified()) {
            NormalizedGuide ng(rep.r, rep.alpha);
            focal_length(ng, rep, opt);
        }
        reps.push_back(rep);
    }
    return reps;
}

enum class HVerdict { satisfied, violated, unclassified };

struct HMargin {
    int first_straight = -1; // index of the first straight guide of the run
    double length = 0.0;     // combined length of the straight run
    int circ_before = -1, circ_after = -1;
    double margin_bound = 0.0;
    double margin_numeric = 0.0;
};

struct ConditionHReport {
    HVerdict by_bound = HVerdict::unclassified;
    HVerdict by_numeric = HVerdict::unclassified;
    std::vector<HMargin> margins;

    bool certified() const {
        return by_bound == HVerdict::satisfied || by_numeric == HVerdict::satisfied;
    }
};

/// Margins of the hyperbolicity condition: every straight run must be longer
/// than the sum of the adjacent guides' focal lengths (scaled by their outer
/// radii). Strict inequality required. Reported separately for the analytic
/// bound and for the grid supremum.
inline ConditionHReport check_condition_h(const TrackGeometry& geo,
                                          const std::vector<GuideReport>& reps) {
    ConditionHReport out;
    if (geo.annulus) return out;
    for (const GuideReport& r : reps)
        if (!r.classified()) return out;

    auto report_of = [&](int gi) -> const GuideReport* {
        for (const GuideReport& r : reps)
            if (r.guide_index == gi) return &r;
        return nullptr;
    };

    size_t n = geo.spec.guides.size();
    bool ok_bound = true, ok_num = true;
    for (size_t i = 0; i < n; ++i) {
        if (geo.spec.guides[i].kind != GuideSpec::Kind::straight) continue;
        size_t prev = (i + n - 1) % n;
        if (geo.spec.guides[prev].kind == GuideSpec::Kind::straight) continue; // inside a run
        // Combined length of the maximal straight run starting at i.
        double len = 0.0;
        size_t j = i;
        while (geo.spec.guides[j].kind == GuideSpec::Kind::straight) {
            len += geo.spec.guides[j].length;
            j = (j + 1) % n;
        }
        const GuideReport* gb = report_of(static_cast<int>(prev));
        const GuideReport* ga = report_of(static_cast<int>(j));
        if (!gb || !ga) return out;
        HMargin m;
        m.first_straight = static_cast<int>(i);
        m.length = len;
        m.circ_before = static_cast<int>(prev);
        m.circ_after = static_cast<int>(j);
        m.margin_bound = len - (gb->tau_bound_physical() + ga->tau_bound_physical());
        m.margin_numeric = len - (gb->tau_numeric_physical() + ga->tau_numeric_physical());
        ok_bound = ok_bound && m.margin_bound > 0.0;
        ok_num = ok_num && m.margin_numeric > 0.0;
        out.margins.push_back(m);
    }
    out.by_bound = ok_bound ? HVerdict::satisfied : HVerdict::violated;
    out.by_numeric = ok_num ? HVerdict::satisfied : HVerdict::violated;
    return out;
}

// ---------------------------------------------------------------------------
// Wall-wall intersection tests (self-intersection validation).
// ---------------------------------------------------------------------------

namespace detail {

inline bool near_any_endpoint(Vec2 q, const Wall& w, double tol) {
    return near(q, w.start(), tol) || near(q, w.end(), tol);
}

inline bool seg_seg_cross(const SegmentWall& a, const SegmentWall& b, Vec2& where) {
    Vec2 r = a.p1 - a.p0, s = b.p1 - b.p0;
    double den = cross(r, s);
    if (std::abs(den) < 1e-14) return false; // parallel: overlap caught by endpoints elsewhere
    double t = cross(b.p0 - a.p0, s) / den;
    double u = cross(b.p0 - a.p0, r) / den;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
    where = a.p0 + t * r;
    return true;
}

inline int circle_seg_points(Vec2 c, double R, const SegmentWall& s, Vec2 out[2]) {
    Vec2 d = s.p1 - s.p0;
    double len = d.norm();
    Vec2 u = {d.x / len, d.y / len};
    Vec2 oc = s.p0 - c;
    double b = 2.0 * dot(u, oc);
    double cc = oc.norm2() - R * R;
    double disc = b * b - 4.0 * cc;
    if (disc < 0.0) return 0;
    QuadRoots roots = solve_quadratic_stable(b, cc, disc);
    int cnt = 0;
    for (double t : {roots.t0, roots.t1}) {
        if (t >= 0.0 && t <= len) out[cnt++] = s.p0 + t * u;
        if (cnt == 2 && roots.t0 == roots.t1) return 1;
    }
    return cnt;
}

inline bool walls_intersect(const Wall& wa, const Wall& wb) {
    const double tol = 1e-9;
    auto genuine = [&](Vec2 q) {
        return !near_any_endpoint(q, wa, 1e-7) && !near_any_endpoint(q, wb, 1e-7);
    };
    if (wa.kind == WallKind::segment && wb.kind == WallKind::segment) {
        Vec2 q;
        if (!seg_seg_cross(wa.seg, wb.seg, q)) return false;
        return genuine(q);
    }
    if (wa.kind == WallKind::arc && wb.kind == WallKind::arc) {
        Vec2 c1 = wa.arc.center, c2 = wb.arc.center;
        double R1 = wa.arc.radius, R2 = wb.arc.radius;
        double d = (c2 - c1).norm();
        if (d < tol) return false; // concentric arcs of distinct radii
        if (d > R1 + R2 - tol) return false;
        if (d < std::abs(R1 - R2) + tol) return false;
        double x = (d * d + R1 * R1 - R2 * R2) / (2.0 * d);
        double h2 = R1 * R1 - x * x;
        if (h2 < 0.0) return false;
        double h = std::sqrt(h2);
        Vec2 u = normalized(c2 - c1);
        Vec2 base = c1 + x * u;
        for (Vec2 q : {base + h * perp(u), base - h * perp(u)}) {
            if (!wa.arc.contains_angle(wa.arc.angle_of(q))) continue;
            if (!wb.arc.contains_angle(wb.arc.angle_of(q))) continue;
            if (genuine(q)) return true;
        }
        return false;
    }
    const Wall& arcw = (wa.kind == WallKind::arc) ? wa : wb;
    const Wall& segw = (wa.kind == WallKind::arc) ? wb : wa;
    Vec2 pts[2];
    int cnt = circle_seg_points(arcw.arc.center, arcw.arc.radius, segw.seg, pts);
    for (int i = 0; i < cnt; ++i) {
        if (!arcw.arc.contains_angle(arcw.arc.angle_of(pts[i]))) continue;
        if (genuine(pts[i])) return true;
    }
    return false;
}

} // namespace detail

} // namespace trackbill

#endif
