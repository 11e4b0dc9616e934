#ifndef TRACKBILL_TANGENT_HPP
#define TRACKBILL_TANGENT_HPP

#include <cmath>
#include <vector>

#include "trackbill/beam.hpp"
#include "trackbill/dynamics.hpp"
#include "trackbill/guide.hpp"
#include "trackbill/rng.hpp"
#include "trackbill/track.hpp"

namespace trackbill {

/// Derivative of one billiard step in the (s, theta) charts of the two
/// walls. Both loops run counterclockwise, so the (tangent, inward-normal)
/// frame is right-handed on the outer loop and left-handed on the inner one;
/// a step crossing between the loops picks up a global sign, which cancels
/// in slopes, focusing times, determinants and norms.
inline Mat2 step_jacobian(const TrackGeometry& geo, const CollisionState& x,
                          const StepResult& r) {
    const Wall& wf = geo.walls[x.wall];
    const Wall& wt = geo.walls[r.next.wall];
    Mat2 m = collision_jacobian(r.flight, wf.curvature, std::sin(x.theta), wt.curvature,
                                std::sin(r.next.theta));
    if (wf.loop != wt.loop) return {-m.a, -m.b, -m.c, -m.d};
    return m;
}

/// Transport a tangent vector along one billiard step.
inline TangentVec tangent_step(const TrackGeometry& geo, const CollisionState& x,
                               const StepResult& r, TangentVec u) {
    return apply(step_jacobian(geo, x, r), u);
}

inline double wall_curvature(const TrackGeometry& geo, const CollisionState& x) {
    return geo.walls[x.wall].curvature;
}

inline double focus_forward_at(const TrackGeometry& geo, const CollisionState& x, TangentVec u) {
    return focus_forward(std::sin(x.theta), wall_curvature(geo, x), u);
}

inline double focus_backward_at(const TrackGeometry& geo, const CollisionState& x, TangentVec u) {
    return focus_backward(std::sin(x.theta), wall_curvature(geo, x), u);
}

/// Slope cone at an entering collision: tangent vectors whose backward
/// focusing time is at least tau (the focal length of the guide being
/// entered). In slope coordinates the cone is [kappa - sin(theta)/tau, kappa].
struct Cone {
    double m_lo = 0.0;
    double m_hi = 0.0; // equals the wall curvature (backward time infinite)
};

inline Cone cone_at(const TrackGeometry& geo, const CollisionState& x, double tau_physical) {
    double kappa = wall_curvature(geo, x);
    return {kappa - std::sin(x.theta) / tau_physical, kappa};
}

// ---------------------------------------------------------------------------
// Strict cone invariance certification.
// ---------------------------------------------------------------------------

struct ConeMarginSample {
    CollisionState from;
    double margin = 0.0; // min over the two cone edges of f-(image) - tau(target)
    bool ok = false;
    StepStatus status = StepStatus::ok;
};

struct ConeCertificate {
    int requested = 0;
    int evaluated = 0;
    int terminated = 0; // orbits ending in singular/endpoint events
    double min_margin = 1e300;
    bool all_positive = true;
    std::vector<ConeMarginSample> samples;
};

namespace detail {

inline const GuideReport* report_for(const std::vector<GuideReport>& reps, int guide) {
    for (const GuideReport& r : reps)
        if (r.guide_index == guide) return &r;
    return nullptr;
}

} // namespace detail

/// Transport the two edge vectors of the entering cone at x to the next
/// entering collision and measure how strictly they land inside the cone
/// there, in backward-focusing-time units.
inline ConeMarginSample cone_margin_once(const TrackGeometry& geo,
                                         const std::vector<GuideReport>& reps,
                                         const CollisionState& x, bool use_numeric_tau = false) {
    ConeMarginSample out;
    out.from = x;
    const GuideReport* rep_in = detail::report_for(reps, x.guide);
    if (!rep_in || !rep_in->classified()) return out;
    double tau_in = use_numeric_tau ? rep_in->tau_numeric_physical()
                                    : rep_in->tau_bound_physical();
    Cone cone = cone_at(geo, x, tau_in);

    TangentVec edges[2] = {{1.0, cone.m_lo}, {1.0, cone.m_hi}};
    CollisionState cur = x;
    for (long i = 0; i < 1000000; ++i) {
        StepResult r = step(geo, cur);
        if (r.status != StepStatus::ok) {
            out.status = r.status;
            return out;
        }
        Mat2 m = step_jacobian(geo, cur, r);
        edges[0] = apply(m, edges[0]);
        edges[1] = apply(m, edges[1]);
        bool entering = is_entering(geo, cur.guide, r.next);
        cur = r.next;
        if (entering) break;
    }
    const GuideReport* rep_out = detail::report_for(reps, cur.guide);
    if (!rep_out || !rep_out->classified()) return out;
    double tau_out = use_numeric_tau ? rep_out->tau_numeric_physical()
                                     : rep_out->tau_bound_physical();
    double worst = 1e300;
    for (const TangentVec& e : edges) {
        double fb = focus_backward_at(geo, cur, e);
        if (std::isinf(fb)) continue; // infinitely far focal point: inside
        worst = std::min(worst, fb - tau_out);
    }
    out.margin = (worst == 1e300) ? 0.0 : worst;
    out.ok = true;
    return out;
}

/// Sample entering collisions on a track satisfying the hyperbolicity
/// condition and certify strict invariance of the entering cone field.
inline ConeCertificate verify_strict_invariance(const TrackGeometry& geo,
                                                const std::vector<GuideReport>& reps,
                                                int samples, std::uint64_t seed,
                                                bool use_numeric_tau = false,
                                                bool keep_samples = false) {
    ConeCertificate cert;
    cert.requested = samples;
    SplitMix64 rng(seed);
    int attempts = 0;
    while (cert.evaluated < samples && attempts < samples * 200) {
        ++attempts;
        CollisionState x = sample_state(geo, rng, Rotation::R);
        // Walk to the next entering collision to obtain a legitimate sample.
        ReturnToEntering ret = first_return_to_entering(
            geo, x, 200000); // works from any state: it stops at the first entering collision
        if (ret.status != StepStatus::ok) {
            ++cert.terminated;
            continue;
        }
        ConeMarginSample s = cone_margin_once(geo, reps, ret.entry, use_numeric_tau);
        if (!s.ok) {
            if (s.status != StepStatus::ok) ++cert.terminated;
            continue;
        }
        ++cert.evaluated;
        cert.min_margin = std::min(cert.min_margin, s.margin);
        cert.all_positive = cert.all_positive && s.margin > 0.0;
        if (keep_samples || s.margin <= 0.0) cert.samples.push_back(s);
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Canonical quadrant cone field of the in-guide return map.
// ---------------------------------------------------------------------------

struct CanonicalConeReport {
    int samples = 0;
    bool sign_pattern_ok = true;  // image of d/dtheta tilts with the twist sign
    bool fplus_range_ok = true;   // forward times of the quadrant cone lie in [0, sin theta]
};

/// Check, on sampled outer-circle states of a normalized guide, that the
/// quadrant cone field is invariant under the outer-return derivative: the
/// vertical edge tilts in the direction of the twist 2 delta', and on the
/// chord-only branch the forward focusing times of the cone fill [0, sin theta].
inline CanonicalConeReport verify_canonical_cone(const NormalizedGuide& g, int samples,
                                                 std::uint64_t seed) {
    CanonicalConeReport rep;
    SplitMix64 rng(seed);
    while (rep.samples < samples) {
        double theta = rng.uniform(1e-3, pi - 1e-3);
        if (std::abs(theta - g.beta_bar) < 1e-6 ||
            std::abs(theta - (pi - g.beta_bar)) < 1e-6 ||
            std::abs(theta - 0.5 * pi) < 1e-6)
            continue;
        ++rep.samples;
        double dp = delta_prime(g, theta);
        Mat2 ret{1.0, 2.0 * dp, 0.0, 1.0}; // one outer return
        TangentVec vert{0.0, 1.0};
        TangentVec img = apply(ret, vert);
        // Quadrant membership: ab >= 0 on the chord-only branch, ab <= 0 on
        // the inner-reaching branch.
        double ab = img.ds * img.dtheta;
        bool want_nonneg = !g.inner_branch(theta);
        if ((want_nonneg && ab < 0.0) || (!want_nonneg && ab > 0.0)) rep.sign_pattern_ok = false;
        if (!g.inner_branch(theta)) {
            // f+ over the quadrant cone {m >= 0} with kappa = 1.
            for (double m : {0.0, 0.3, 1.0, 5.0, 1e9}) {
                double fp = std::sin(theta) / (1.0 + m);
                if (fp < -1e-12 || fp > std::sin(theta) + 1e-12) rep.fplus_range_ok = false;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Lyapunov exponents (top exponent of the 2-D map).
// ---------------------------------------------------------------------------

struct LyapunovRun {
    double lambda = 0.0;
    long steps = 0;
    bool terminated_early = false;
    StepStatus termination = StepStatus::ok;
    std::vector<std::pair<long, double>> series; // (step, running estimate)
};

/// Top Lyapunov exponent per collision by tangent transport with per-step
/// renormalization; log norms accumulate in compensated summation.
inline LyapunovRun lyapunov(const TrackGeometry& geo, const CollisionState& x0, long steps,
                            std::uint64_t seed, long report_every = 1000) {
    LyapunovRun run;
    SplitMix64 rng(seed);
    double a = rng.uniform(0.0, 2.0 * pi);
    TangentVec u{std::cos(a), std::sin(a)};
    CollisionState x = x0;
    CompensatedSum logsum;
    for (long i = 1; i <= steps; ++i) {
        StepResult r = step(geo, x);
        if (r.status != StepStatus::ok) {
            run.terminated_early = true;
            run.termination = r.status;
            break;
        }
        u = tangent_step(geo, x, r, u);
        double nrm = u.norm();
        logsum.add(std::log(nrm));
        u = {u.ds / nrm, u.dtheta / nrm};
        x = r.next;
        run.steps = i;
        if (i % report_every == 0 || i == steps)
            run.series.push_back({i, logsum.value() / static_cast<double>(i)});
    }
    run.lambda = (run.steps > 0) ? logsum.value() / static_cast<double>(run.steps) : 0.0;
    return run;
}

} // namespace trackbill

#endif
