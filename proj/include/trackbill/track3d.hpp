#ifndef TRACKBILL_TRACK3D_HPP
#define TRACKBILL_TRACK3D_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "trackbill/errors.hpp"
#include "trackbill/geom3.hpp"
#include "trackbill/guide.hpp"
#include "trackbill/rng.hpp"
#include "trackbill/track.hpp" // TrackSpec / GuideSpec

namespace trackbill {

/// Per-guide data of a built 3-D track.
struct Guide3 {
    bool circular = false;
    Vec3 entry_p, entry_t; // centerline point and direction at the guide start
    double length = 0.0;   // straight guides
    // cylindrical guides
    Vec3 center, axis; // bend center and rotation axis (sweep is +alpha about axis)
    double radius = 0.0;
    double alpha = 0.0;
    Vec3 bend_dir;          // unit direction from entry point toward the center
    bool product = false;   // bend aligned with a section axis (roll multiple of 90 deg)
    double factor_halfwidth = 0.0; // tube halfwidth of the 2-D factor when product
};

struct Gate3 {
    Vec3 p;      // centerline junction
    Vec3 normal; // travel direction
    int guide_before = 0, guide_after = 0;
};

struct Track3Geometry {
    TrackSpec spec;
    std::vector<Wall3> walls;
    std::vector<Gate3> gates;
    std::vector<Guide3> guides;

    /// Travel-oriented centerline tangent at the transverse section through q.
    Vec3 centerline_tangent(int gi, Vec3 q) const {
        const Guide3& g = guides[gi];
        if (!g.circular) return g.entry_t;
        Vec3 d = q - g.center;
        Vec3 q_perp = d - dot(d, g.axis) * g.axis;
        return normalized3(cross(g.axis, q_perp));
    }
};

// ---------------------------------------------------------------------------
// Construction.
// ---------------------------------------------------------------------------

namespace detail {

/// Wall swept by one rectangle edge rotating about (center, axis) by alpha.
inline Wall3 sweep_edge_wall(Vec3 edge_p, Vec3 edge_dir, double edge_len, Vec3 center,
                             Vec3 axis, double alpha, Vec3 interior_ref, int guide) {
    Wall3 w;
    w.guide = guide;
    double ez = dot(edge_dir, axis);
    if (std::abs(ez) < 1e-12) {
        // Radial edge: the sweep is a flat annular sector in the plane
        // perpendicular to the axis through the edge.
        w.kind = Wall3::Kind::plane_annulus;
        double z0 = dot(edge_p - center, axis);
        w.p0 = center + z0 * axis;
        Vec3 u_r = normalized3((edge_p - center) - z0 * axis +
                               0.5 * edge_len * edge_dir -
                               (dot(0.5 * edge_len * edge_dir, axis)) * axis);
        w.e1 = u_r;
        w.e2 = normalized3(cross(axis, u_r));
        w.span = alpha;
        Vec3 a0 = (edge_p - center) - z0 * axis;
        Vec3 a1 = a0 + edge_len * edge_dir;
        w.rin = std::min(a0.norm(), a1.norm());
        w.rout = std::max(a0.norm(), a1.norm());
        Vec3 n = axis * ((dot(axis, interior_ref - edge_p) > 0.0) ? 1.0 : -1.0);
        w.n = n;
        return w;
    }
    // Surface of revolution about the axis.
    w.kind = Wall3::Kind::revolution;
    w.axis_point = center;
    w.axis_dir = axis;
    // Perpendicular basis with phi = 0 at the edge start's radial direction.
    Vec3 p_rel = edge_p - center;
    Vec3 p_perp = p_rel - dot(p_rel, axis) * axis;
    w.ex = normalized3(p_perp);
    w.ey = normalized3(cross(axis, w.ex));
    // Local frame coordinates of the generator.
    Vec3 lp{dot(p_rel, w.ex), dot(p_rel, w.ey), dot(p_rel, axis)};
    Vec3 ld{dot(edge_dir, w.ex), dot(edge_dir, w.ey), dot(edge_dir, axis)};
    w.edge_lp = lp;
    w.edge_ld = ld;
    w.edge_len = edge_len;
    w.sweep = alpha;
    // rho^2(s) = A s^2 + B s + C with s = (z - lp.z) / ld.z.
    double A = ld.x * ld.x + ld.y * ld.y;
    double B = 2.0 * (lp.x * ld.x + lp.y * ld.y);
    double C = lp.x * lp.x + lp.y * lp.y;
    double dz = ld.z;
    w.c2 = A / (dz * dz);
    w.c1 = B / dz - 2.0 * A * lp.z / (dz * dz);
    w.c0 = C - B * lp.z / dz + A * lp.z * lp.z / (dz * dz);
    double z0 = lp.z, z1 = lp.z + edge_len * dz;
    w.z_lo = std::min(z0, z1);
    w.z_hi = std::max(z0, z1);
    // Inward side from an interior reference point near the edge midpoint.
    Vec3 mid = edge_p + 0.5 * edge_len * edge_dir;
    Vec3 lmid = w.local(mid);
    Vec3 g{2.0 * lmid.x, 2.0 * lmid.y, -(w.c1 + 2.0 * w.c2 * lmid.z)};
    Vec3 gw = w.world_dir(g);
    w.n_sign = (dot(gw, interior_ref - mid) > 0.0) ? +1.0 : -1.0;
    return w;
}

} // namespace detail

/// Assemble a 3-D track: cylindrical guides sweep the section rectangle
/// about their bend axis (two coaxial revolution patches plus two flat side
/// strips for right rolls), straight guides contribute four rectangle walls,
/// and the transverse sections between guides are recorded as gates.
inline Track3Geometry build_track3d(const TrackSpec& spec) {
    if (spec.dimension != 3)
        throw TrackError(ErrorCode::parse_error, "expected a 3-D spec");
    if (!(spec.section_a > 0.0 && spec.section_b > 0.0))
        throw TrackError(ErrorCode::parse_error, "section sides must be positive");
    if (spec.guides.empty())
        throw TrackError(ErrorCode::adjacency_fail, "track needs at least one guide");
    size_t n = spec.guides.size();
    for (size_t i = 0; i < n; ++i) {
        const GuideSpec& g = spec.guides[i];
        if (g.kind == GuideSpec::Kind::circular) {
            if (spec.guides[(i + 1) % n].kind == GuideSpec::Kind::circular)
                throw TrackError(ErrorCode::adjacency_fail,
                                 "cylindrical guides must be separated by a straight guide");
            if (!(g.angle > 0.0 && g.angle < 2.0 * pi))
                throw TrackError(ErrorCode::parse_error, "guide angle must lie in (0, 2*pi)");
        } else if (!(g.length > 0.0)) {
            throw TrackError(ErrorCode::parse_error, "straight guide length must be positive");
        }
    }

    Track3Geometry geo;
    geo.spec = spec;
    double ha = 0.5 * spec.section_a, hb = 0.5 * spec.section_b;

    Vec3 p{0.0, 0.0, 0.0};
    Vec3 T{1.0, 0.0, 0.0}, U{0.0, 1.0, 0.0}, V{0.0, 0.0, 1.0};

    for (size_t i = 0; i < n; ++i) {
        const GuideSpec& g = spec.guides[i];
        geo.gates.push_back({p, T, static_cast<int>((i + n - 1) % n), static_cast<int>(i)});
        Guide3 info;
        info.entry_p = p;
        info.entry_t = T;
        if (g.kind == GuideSpec::Kind::straight) {
            info.circular = false;
            info.length = g.length;
            Vec3 mid = p + (0.5 * g.length) * T;
            for (int side = 0; side < 4; ++side) {
                Wall3 w;
                w.kind = Wall3::Kind::plane_rect;
                w.guide = static_cast<int>(i);
                w.e1 = T;
                w.h1 = 0.5 * g.length;
                if (side < 2) {
                    double sgn = (side == 0) ? +1.0 : -1.0;
                    w.p0 = mid + sgn * ha * U;
                    w.n = -sgn * U;
                    w.e2 = V;
                    w.h2 = hb;
                } else {
                    double sgn = (side == 2) ? +1.0 : -1.0;
                    w.p0 = mid + sgn * hb * V;
                    w.n = -sgn * V;
                    w.e2 = U;
                    w.h2 = ha;
                }
                w.id = static_cast<int>(geo.walls.size());
                geo.walls.push_back(w);
            }
            p = p + g.length * T;
        } else {
            info.circular = true;
            Vec3 droll = std::cos(g.roll) * U + std::sin(g.roll) * V;
            Vec3 dbend = (g.turn > 0) ? droll : -droll;
            // Support of the section rectangle in the bend direction must
            // stay short of the bend center.
            double support = std::abs(dot(dbend, U)) * ha + std::abs(dot(dbend, V)) * hb;
            if (!(g.radius > support))
                throw TrackError(ErrorCode::parse_error,
                                 "bend radius must exceed the section support");
            Vec3 W = normalized3(cross(T, dbend));
            Vec3 C = p + g.radius * dbend;
            info.center = C;
            info.axis = W;
            info.radius = g.radius;
            info.alpha = g.angle;
            info.bend_dir = dbend;
            double cu = dot(dbend, U), cv = dot(dbend, V);
            if (std::abs(cu) > 1.0 - 1e-9) {
                info.product = true;
                info.factor_halfwidth = ha;
            } else if (std::abs(cv) > 1.0 - 1e-9) {
                info.product = true;
                info.factor_halfwidth = hb;
            }

            // Sweep the four rectangle edges.
            struct Edge {
                Vec3 start, dir;
                double len;
            };
            Edge edges[4] = {
                {p - ha * U - hb * V, U, 2.0 * ha}, // V = -hb side
                {p - ha * U + hb * V, U, 2.0 * ha}, // V = +hb side
                {p - ha * U - hb * V, V, 2.0 * hb}, // U = -ha side
                {p + ha * U - hb * V, V, 2.0 * hb}, // U = +ha side
            };
            for (const Edge& e : edges) {
                Wall3 w = detail::sweep_edge_wall(e.start, e.dir, e.len, C, W, g.angle,
                                                  p, static_cast<int>(i));
                w.id = static_cast<int>(geo.walls.size());
                geo.walls.push_back(w);
            }
            // Advance position and frame by the sweep rotation.
            p = C + rotate_about(p - C, W, g.angle);
            T = rotate_about(T, W, g.angle);
            U = rotate_about(U, W, g.angle);
            V = rotate_about(V, W, g.angle);
        }
        geo.guides.push_back(info);
    }

    if (p.norm() > 1e-9 || (T - Vec3{1.0, 0.0, 0.0}).norm() > 1e-9 ||
        (U - Vec3{0.0, 1.0, 0.0}).norm() > 1e-9 || (V - Vec3{0.0, 0.0, 1.0}).norm() > 1e-9)
        throw TrackError(ErrorCode::closure_fail, "3-D centerline does not close");
    return geo;
}

// ---------------------------------------------------------------------------
// 3-D dynamics.
// ---------------------------------------------------------------------------

struct Collision3 {
    int wall = -1;
    Vec3 q, v; // position and unit velocity after the collision
    int guide = 0;
};

struct Step3Result {
    StepStatus status = StepStatus::no_hit;
    Collision3 next;
    double flight = 0.0;
};

inline Step3Result step3(const Track3Geometry& geo, const Collision3& x) {
    Step3Result out;
    Ray3 ray{x.q, x.v};
    Hit3 best;
    const Wall3* best_wall = nullptr;
    for (const Wall3& w : geo.walls) {
        Hit3 h = intersect_ray_wall3(ray, w);
        if (h.kind != HitKind::hit) continue;
        if (!best_wall || h.t < best.t) {
            best = h;
            best_wall = &w;
        }
    }
    if (!best_wall) {
        out.status = StepStatus::no_hit;
        return out;
    }
    double incidence = std::abs(dot(x.v, best.normal));
    if (incidence < 1e-10) {
        out.status = StepStatus::singular;
        return out;
    }
    Vec3 v1 = reflect3(x.v, best.normal);
    v1 = normalized3(v1);
    out.status = StepStatus::ok;
    out.flight = best.t;
    out.next.wall = best_wall->id;
    out.next.q = best.point;
    out.next.v = v1;
    out.next.guide = best_wall->guide;
    return out;
}

inline double v_star3(const Track3Geometry& geo, const Collision3& x) {
    return dot(x.v, geo.centerline_tangent(x.guide, x.q));
}

/// Draw a post-collision state: wall by rough area, chart-uniform point,
/// cosine-weighted outgoing direction.
inline Collision3 sample_state3(const Track3Geometry& geo, SplitMix64& rng) {
    std::vector<double> weight(geo.walls.size());
    double total = 0.0;
    for (size_t i = 0; i < geo.walls.size(); ++i) {
        const Wall3& w = geo.walls[i];
        double a;
        if (w.kind == Wall3::Kind::plane_rect)
            a = 4.0 * w.h1 * w.h2;
        else if (w.kind == Wall3::Kind::plane_annulus)
            a = 0.5 * w.span * (w.rout * w.rout - w.rin * w.rin);
        else
            a = w.sweep * 0.5 * (std::sqrt(w.qz(w.z_lo)) + std::sqrt(w.qz(w.z_hi))) *
                w.edge_len;
        weight[i] = a;
        total += a;
    }
    for (;;) {
        double pick = rng.uniform(0.0, total);
        size_t wi = 0;
        for (; wi + 1 < weight.size(); ++wi) {
            if (pick < weight[wi]) break;
            pick -= weight[wi];
        }
        const Wall3& w = geo.walls[wi];
        Vec3 q, nrm, t1, t2;
        if (w.kind == Wall3::Kind::plane_rect) {
            q = w.p0 + rng.uniform(-w.h1, w.h1) * w.e1 + rng.uniform(-w.h2, w.h2) * w.e2;
            nrm = w.n;
            t1 = w.e1;
            t2 = w.e2;
        } else if (w.kind == Wall3::Kind::plane_annulus) {
            double r = std::sqrt(rng.uniform(w.rin * w.rin, w.rout * w.rout));
            double phi = rng.uniform(0.0, w.span);
            q = w.p0 + r * (std::cos(phi) * w.e1 + std::sin(phi) * w.e2);
            nrm = w.n;
            t1 = w.e1;
            t2 = w.e2;
        } else {
            double s = rng.uniform(0.05, 0.95) * w.edge_len;
            double phi = rng.uniform(0.0, w.sweep);
            Vec3 lp = w.edge_lp + s * w.edge_ld;
            double cphi = std::cos(phi), sphi = std::sin(phi);
            Vec3 rotated{cphi * lp.x - sphi * lp.y, sphi * lp.x + cphi * lp.y, lp.z};
            q = w.axis_point + w.world_dir(rotated);
            nrm = w.revolution_normal(q);
            t1 = normalized3(w.world_dir({-rotated.y, rotated.x, 0.0}));
            t2 = normalized3(cross(nrm, t1));
        }
        // Cosine-weighted direction: uniform in the tangent-disc coordinates.
        double w1, w2;
        do {
            w1 = rng.uniform(-1.0, 1.0);
            w2 = rng.uniform(-1.0, 1.0);
        } while (w1 * w1 + w2 * w2 >= 0.98);
        Vec3 v = w1 * t1 + w2 * t2 + std::sqrt(1.0 - w1 * w1 - w2 * w2) * nrm;
        Collision3 x;
        x.wall = static_cast<int>(wi);
        x.q = q;
        x.v = v;
        x.guide = w.guide;
        return x;
    }
}

// ---------------------------------------------------------------------------
// Hyperbolicity condition of a 3-D track.
// ---------------------------------------------------------------------------

struct Guide3Report {
    int guide_index = -1;
    bool product = false;
    GuideReport factor; // 2-D factor analysis (valid when product)
};

inline std::vector<Guide3Report> analyze_track3(const Track3Geometry& geo,
                                                const FocalLengthOptions& opt = {}) {
    std::vector<Guide3Report> out;
    for (size_t i = 0; i < geo.guides.size(); ++i) {
        if (!geo.guides[i].circular) continue;
        Guide3Report rep;
        rep.guide_index = static_cast<int>(i);
        rep.product = geo.guides[i].product;
        if (rep.product) {
            double h = geo.guides[i].factor_halfwidth;
            double R = geo.guides[i].radius;
            NormalizedGuide ng((R - h) / (R + h), geo.guides[i].alpha);
            rep.factor = classify_guide(ng);
            rep.factor.guide_index = static_cast<int>(i);
            rep.factor.outer_radius = R + h;
            if (rep.factor.classified()) focal_length(ng, rep.factor, opt);
        }
        out.push_back(rep);
    }
    return out;
}

struct TwistedPair {
    int guide_a = -1, guide_b = -1;
};

struct ConditionH3Report {
    HVerdict distances = HVerdict::unclassified; // clause 1, by the analytic bound
    bool has_twisted_pair = false;               // clause 2
    std::vector<HMargin> margins;
    std::vector<TwistedPair> twisted;
    std::string reason; // set when violated

    bool satisfied() const {
        return distances == HVerdict::satisfied && has_twisted_pair;
    }
};

/// Clause 1: every straight run longer than the sum of the adjacent guides'
/// 2-D focal lengths. Clause 2: at least one pair of consecutive cylindrical
/// guides whose bending planes are orthogonal (axes orthogonal within 1e-9).
inline ConditionH3Report check_condition_h3(const Track3Geometry& geo,
                                            const std::vector<Guide3Report>& reps) {
    ConditionH3Report out;
    auto rep_of = [&](int gi) -> const Guide3Report* {
        for (const Guide3Report& r : reps)
            if (r.guide_index == gi) return &r;
        return nullptr;
    };
    size_t n = geo.spec.guides.size();
    bool all_classified = true;
    for (const Guide3Report& r : reps)
        if (!r.product || !r.factor.classified()) all_classified = false;

    bool ok = true;
    if (all_classified) {
        for (size_t i = 0; i < n; ++i) {
            if (geo.spec.guides[i].kind != GuideSpec::Kind::straight) continue;
            size_t prev = (i + n - 1) % n;
            if (geo.spec.guides[prev].kind == GuideSpec::Kind::straight) continue;
            double len = 0.0;
            size_t j = i;
            while (geo.spec.guides[j].kind == GuideSpec::Kind::straight) {
                len += geo.spec.guides[j].length;
                j = (j + 1) % n;
            }
            const Guide3Report* gb = rep_of(static_cast<int>(prev));
            const Guide3Report* ga = rep_of(static_cast<int>(j));
            if (!gb || !ga) {
                all_classified = false;
                break;
            }
            HMargin m;
            m.first_straight = static_cast<int>(i);
            m.length = len;
            m.circ_before = static_cast<int>(prev);
            m.circ_after = static_cast<int>(j);
            m.margin_bound =
                len - (gb->factor.tau_bound_physical() + ga->factor.tau_bound_physical());
            m.margin_numeric =
                len - (gb->factor.tau_numeric_physical() + ga->factor.tau_numeric_physical());
            ok = ok && m.margin_bound > 0.0;
            out.margins.push_back(m);
        }
    }
    out.distances =
        all_classified ? (ok ? HVerdict::satisfied : HVerdict::violated) : HVerdict::unclassified;

    // Twisted pairs: consecutive cylindrical guides around the cycle.
    std::vector<int> circ;
    for (size_t i = 0; i < n; ++i)
        if (geo.spec.guides[i].kind == GuideSpec::Kind::circular) circ.push_back(static_cast<int>(i));
    for (size_t k = 0; k < circ.size(); ++k) {
        int a = circ[k];
        int b = circ[(k + 1) % circ.size()];
        if (a == b) continue;
        double d = std::abs(dot(geo.guides[a].axis, geo.guides[b].axis));
        if (d <= 1e-9) out.twisted.push_back({a, b});
    }
    out.has_twisted_pair = !out.twisted.empty();
    if (out.distances == HVerdict::unclassified)
        out.reason = "unclassified cylindrical guide (no product structure or type)";
    else if (out.distances == HVerdict::violated)
        out.reason = "straight guides shorter than the adjacent focal lengths";
    else if (!out.has_twisted_pair)
        out.reason = "no twisted guide: all bending planes are parallel, the momentum "
                     "component along their common normal is conserved";
    return out;
}

// ---------------------------------------------------------------------------
// Chart coordinates and the finite-difference Lyapunov spectrum.
// ---------------------------------------------------------------------------

namespace detail {

struct Chart3 {
    Vec3 t1, t2, nrm;
};

inline Chart3 chart_frame(const Wall3& w, Vec3 q) {
    if (w.kind != Wall3::Kind::revolution) return {w.e1, w.e2, w.n};
    Vec3 l = w.local(q);
    Vec3 t1 = normalized3(w.world_dir({-l.y, l.x, 0.0}));
    Vec3 nrm = w.revolution_normal(q);
    Vec3 t2 = normalized3(cross(nrm, t1));
    return {t1, t2, nrm};
}

/// Surface + direction coordinates (u1, u2, w1, w2) of a collision.
inline std::array<double, 4> to_chart(const Wall3& w, const Collision3& x) {
    std::array<double, 4> c{};
    Chart3 f = chart_frame(w, x.q);
    if (w.kind != Wall3::Kind::revolution) {
        Vec3 d = x.q - w.p0;
        c[0] = dot(d, w.e1);
        c[1] = dot(d, w.e2);
    } else {
        Vec3 l = w.local(x.q);
        c[0] = std::atan2(l.y, l.x); // phi, continuous locally
        c[1] = l.z;
    }
    c[2] = dot(x.v, f.t1);
    c[3] = dot(x.v, f.t2);
    return c;
}

inline Collision3 from_chart(const Wall3& w, const std::array<double, 4>& c) {
    Collision3 x;
    x.wall = w.id;
    x.guide = w.guide;
    if (w.kind != Wall3::Kind::revolution) {
        x.q = w.p0 + c[0] * w.e1 + c[1] * w.e2;
    } else {
        double rho = std::sqrt(std::max(w.qz(c[1]), 0.0));
        Vec3 l{rho * std::cos(c[0]), rho * std::sin(c[0]), c[1]};
        x.q = w.axis_point + w.world_dir(l);
    }
    Chart3 f = chart_frame(w, x.q);
    double w3 = std::sqrt(std::max(1.0 - c[2] * c[2] - c[3] * c[3], 0.0));
    x.v = c[2] * f.t1 + c[3] * f.t2 + w3 * f.nrm;
    return x;
}

/// Modified Gram-Schmidt; returns log |r_ii| into diag.
inline void qr4(std::array<std::array<double, 4>, 4>& q, std::array<double, 4>& logdiag) {
    for (int i = 0; i < 4; ++i) {
        double nrm = 0.0;
        for (int r = 0; r < 4; ++r) nrm += q[r][i] * q[r][i];
        nrm = std::sqrt(nrm);
        logdiag[i] = std::log(std::max(nrm, 1e-300));
        for (int r = 0; r < 4; ++r) q[r][i] /= nrm;
        for (int j = i + 1; j < 4; ++j) {
            double proj = 0.0;
            for (int r = 0; r < 4; ++r) proj += q[r][i] * q[r][j];
            for (int r = 0; r < 4; ++r) q[r][j] -= proj * q[r][i];
        }
    }
}

} // namespace detail

struct Spectrum3Run {
    std::array<double, 4> lambda{}; // sorted descending
    long steps = 0;                 // counted steps (valid jacobians)
    long skipped = 0;               // steps skipped near chart boundaries
    bool terminated_early = false;
    std::vector<std::array<double, 5>> series; // (step, l1..l4)
};

/// Lyapunov spectrum of the 3-D collision map by central finite differences
/// of the chart-to-chart map (h = 1e-7), transporting an orthonormal 4-frame
/// with re-orthonormalization every 10 steps.
inline Spectrum3Run lyapunov_spectrum3d(const Track3Geometry& geo, const Collision3& x0,
                                        long steps, long report_every = 10000) {
    constexpr double h = 1e-7;
    constexpr int qr_every = 10;
    Spectrum3Run run;
    std::array<std::array<double, 4>, 4> frame{};
    for (int i = 0; i < 4; ++i) frame[i][i] = 1.0;
    std::array<double, 4> logsum{};

    Collision3 x = x0;
    int since_qr = 0;
    for (long i = 0; i < steps; ++i) {
        Step3Result base = step3(geo, x);
        if (base.status != StepStatus::ok) {
            run.terminated_early = true;
            break;
        }
        const Wall3& wf = geo.walls[x.wall];
        const Wall3& wt = geo.walls[base.next.wall];
        std::array<double, 4> cx = detail::to_chart(wf, x);

        bool valid = true;
        std::array<std::array<double, 4>, 4> jac{}; // jac[row][col]
        for (int col = 0; col < 4 && valid; ++col) {
            std::array<double, 4> cp = cx, cm = cx;
            cp[col] += h;
            cm[col] -= h;
            Collision3 xp = detail::from_chart(wf, cp);
            Collision3 xm = detail::from_chart(wf, cm);
            Step3Result rp = step3(geo, xp);
            Step3Result rm = step3(geo, xm);
            if (rp.status != StepStatus::ok || rm.status != StepStatus::ok ||
                rp.next.wall != base.next.wall || rm.next.wall != base.next.wall) {
                valid = false;
                break;
            }
            std::array<double, 4> yp = detail::to_chart(wt, rp.next);
            std::array<double, 4> ym = detail::to_chart(wt, rm.next);
            for (int row = 0; row < 4; ++row) jac[row][col] = (yp[row] - ym[row]) / (2.0 * h);
        }
        x = base.next;
        if (!valid) {
            ++run.skipped;
            continue;
        }
        // frame <- jac * frame
        std::array<std::array<double, 4>, 4> nf{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) acc += jac[r][k] * frame[k][c];
                nf[r][c] = acc;
            }
        frame = nf;
        ++run.steps;
        if (++since_qr == qr_every) {
            std::array<double, 4> ld{};
            detail::qr4(frame, ld);
            for (int k = 0; k < 4; ++k) logsum[k] += ld[k];
            since_qr = 0;
        }
        if (run.steps % report_every == 0 && run.steps > 0) {
            std::array<double, 5> row{};
            row[0] = static_cast<double>(run.steps);
            for (int k = 0; k < 4; ++k) row[1 + k] = logsum[k] / static_cast<double>(run.steps);
            run.series.push_back(row);
        }
    }
    if (since_qr > 0) {
        std::array<double, 4> ld{};
        detail::qr4(frame, ld);
        for (int k = 0; k < 4; ++k) logsum[k] += ld[k];
    }
    if (run.steps > 0)
        for (int k = 0; k < 4; ++k) run.lambda[k] = logsum[k] / static_cast<double>(run.steps);
    std::sort(run.lambda.begin(), run.lambda.end(), std::greater<double>());
    return run;
}

} // namespace trackbill

#endif
