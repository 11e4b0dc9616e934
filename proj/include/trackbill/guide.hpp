#ifndef TRACKBILL_GUIDE_HPP
#define TRACKBILL_GUIDE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "trackbill/beam.hpp"
#include "trackbill/errors.hpp"
#include "trackbill/geom.hpp"

namespace trackbill {

/// Circular guide rescaled to outer radius 1, inner radius r in (0, 1),
/// central angle alpha. Collisions on the outer circle are labelled by the
/// polar angle psi in [0, alpha] and the angle theta in (0, pi) between the
/// outgoing velocity and the counterclockwise tangent. The angular momentum
/// cos(theta) is conserved inside the guide, so theta is the same at every
/// outer-circle collision of one passage.
///
/// A chord leaving the outer circle reaches the inner circle if and only if
/// theta lies in (beta_bar, pi - beta_bar) with beta_bar = acos(r).
struct NormalizedGuide {
    double r;
    double alpha;
    double beta_bar;

    NormalizedGuide(double r_, double alpha_)
        : r(r_), alpha(alpha_), beta_bar(std::acos(r_)) {}

    bool inner_branch(double theta) const {
        return theta > beta_bar && theta < pi - beta_bar;
    }
};

/// Half the central angle between consecutive outer-circle collisions:
/// theta - acos(cos(theta)/r) on the inner-reaching branch, theta elsewhere.
/// Continuous at beta_bar and pi - beta_bar.
inline double delta(const NormalizedGuide& g, double theta) {
    if (g.inner_branch(theta)) {
        double c = std::clamp(std::cos(theta) / g.r, -1.0, 1.0);
        return theta - std::acos(c);
    }
    return theta;
}

inline void require_away_from_branch_points(const NormalizedGuide& g, double theta) {
    if (std::abs(theta - g.beta_bar) < 1e-12 || std::abs(theta - (pi - g.beta_bar)) < 1e-12)
        throw TrackError(ErrorCode::singular_angle,
                         "theta within 1e-12 of a branch point of delta");
}

/// d(delta)/d(theta): 1 - sin(theta)/sqrt(r^2 - cos^2(theta)) on the
/// inner-reaching branch (diverging to -inf at its endpoints), 1 elsewhere.
inline double delta_prime(const NormalizedGuide& g, double theta) {
    require_away_from_branch_points(g, theta);
    if (!g.inner_branch(theta)) return 1.0;
    double c = std::cos(theta);
    return 1.0 - std::sin(theta) / std::sqrt(g.r * g.r - c * c);
}

/// Second derivative: cos(theta) (1 - r^2) / (r^2 - cos^2 theta)^(3/2) on the
/// inner-reaching branch (strictly positive left of pi/2), 0 elsewhere.
inline double delta_second(const NormalizedGuide& g, double theta) {
    require_away_from_branch_points(g, theta);
    if (!g.inner_branch(theta)) return 0.0;
    double c = std::cos(theta);
    double w2 = g.r * g.r - c * c;
    return c * (1.0 - g.r * g.r) / (w2 * std::sqrt(w2));
}

/// Signed half-advance of the polar angle per outer-circle return. Positive
/// for counterclockwise motion (theta < pi/2). On the outer branch with
/// theta > pi - beta_bar the physical advance is clockwise by 2(pi - theta).
inline double signed_half_advance(const NormalizedGuide& g, double theta) {
    if (g.inner_branch(theta)) return delta(g, theta);
    if (theta > 0.5 * pi) return theta - pi;
    return theta;
}

enum class CircleId { outer, inner };

enum class AdvanceStatus {
    ok,
    nonpositive_advance, // |half advance| <= 1e-12: the orbit cannot leave
    corner,              // an event falls within 1e-12 of a transverse section
};

/// Full bookkeeping of one passage through the guide, starting from the
/// entry collision (position `entry_pos`, on `entry_circle`) until the orbit
/// crosses a transverse section. Events are the boundary collisions strictly
/// after the entry one.
struct Passage {
    AdvanceStatus status = AdvanceStatus::ok;
    CircleId entry_circle = CircleId::outer;
    double entry_pos = 0.0;
    double theta = 0.0;     // outer-circle collision angle of the passage
    double half_step = 0.0; // signed half-advance
    int events_after = 0;   // n(x): collisions after the entry one
    int n1 = 0;             // outer-circle collisions after the entry one
    int inner_hits = 0;     // inner-circle collisions after the entry one
    CircleId last_circle = CircleId::outer; // circle of the last collision
    double last_pos = 0.0;                  // polar angle of the last collision
    int exit_side = 1;                      // +1: section at alpha, -1: at 0
    bool entering = false; // no collision between the backward section crossing
                           // and the entry collision
};

namespace detail {

inline bool inside_open(double x, double lo, double hi, double tol) {
    return x > lo + tol && x < hi - tol;
}

} // namespace detail

/// Iterate the chord map from an entry collision until the orbit leaves the
/// guide. Works for entries on either circle; inner entries require theta on
/// the inner-reaching branch.
inline Passage trace_passage(const NormalizedGuide& g, CircleId entry_circle, double entry_pos,
                             double theta) {
    constexpr double corner_tol = 1e-12;
    Passage p;
    p.entry_circle = entry_circle;
    p.entry_pos = entry_pos;
    p.theta = theta;

    double sd = signed_half_advance(g, theta);
    p.half_step = sd;
    if (std::abs(sd) <= 1e-12) {
        p.status = AdvanceStatus::nonpositive_advance;
        return p;
    }
    bool middle = g.inner_branch(theta);

    // Stride between consecutive events along the (monotone) polar angle.
    double stride = middle ? sd : 2.0 * sd;
    p.exit_side = (sd > 0.0) ? +1 : -1;

    double span = (sd > 0.0) ? (g.alpha - entry_pos) : entry_pos;
    double astride = std::abs(stride);

    // Number of events strictly inside (0, alpha).
    double q = span / astride;
    if (q > 2.0e9) { // advance too small to ever leave at working precision
        p.status = AdvanceStatus::nonpositive_advance;
        return p;
    }
    if (std::abs(span - std::round(q) * astride) < corner_tol) {
        // An event lands on a section within tolerance; refuse to decide.
        p.status = AdvanceStatus::corner;
        return p;
    }
    int k = static_cast<int>(std::floor(q));

    p.events_after = k;
    if (middle) {
        // Events alternate between the circles, each stride |sd| apart.
        bool entry_outer = (entry_circle == CircleId::outer);
        // Event j (1-based) lies on the outer circle iff its parity matches.
        int outer_count = 0, inner_count = 0;
        if (entry_outer) {
            inner_count = (k + 1) / 2;
            outer_count = k / 2;
        } else {
            outer_count = (k + 1) / 2;
            inner_count = k / 2;
        }
        p.n1 = outer_count;
        p.inner_hits = inner_count;
        bool last_outer;
        if (k == 0)
            last_outer = entry_outer;
        else if (entry_outer)
            last_outer = (k % 2 == 0);
        else
            last_outer = (k % 2 == 1);
        p.last_circle = last_outer ? CircleId::outer : CircleId::inner;
    } else {
        p.n1 = k;
        p.inner_hits = 0;
        p.last_circle = CircleId::outer;
    }
    p.last_pos = entry_pos + k * stride;

    // Entering test: the previous (virtual) event lies beyond a section.
    double prev = entry_pos - stride;
    p.entering = !detail::inside_open(prev, 0.0, g.alpha, 0.0);
    return p;
}

/// Outer-circle entry advance: (n1, inner hits, exit bookkeeping).
inline Passage advance(const NormalizedGuide& g, double psi, double theta) {
    return trace_passage(g, CircleId::outer, psi, theta);
}

/// omega = alpha - 2 n1 |delta|: the angular remainder of the guide span not
/// consumed by full outer-circle returns. 2|delta| is the central angle of
/// the sector between consecutive outer-circle collisions, for either sense
/// of motion.
inline double omega(const NormalizedGuide& g, const Passage& p) {
    return g.alpha - 2.0 * p.n1 * std::abs(delta(g, p.theta));
}

/// chi = 2 n1 delta': the accumulated twist of a passage. |chi| > 2 is the
/// controlled-focusing property of type A and B guides.
inline double chi(const NormalizedGuide& g, const Passage& p) {
    return 2.0 * p.n1 * delta_prime(g, p.theta);
}

/// The unique theta in (beta_bar, pi/2) where delta' = -3/2, by bisection.
/// For r <= 0.4 the derivative stays below -3/2 on the whole branch and the
/// root does not exist; callers handle that case separately.
inline std::optional<double> theta_hat(const NormalizedGuide& g) {
    double lo = g.beta_bar;
    double hi = 0.5 * pi;
    double dp_hi = 1.0 - 1.0 / g.r; // delta'(pi/2)
    if (dp_hi <= -1.5) return std::nullopt;
    // delta' -> -inf at beta_bar+, increasing up to pi/2.
    double lo_probe = lo + 1e-15;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo_probe) break;
        double c = std::cos(mid);
        double w2 = g.r * g.r - c * c;
        double dp = (w2 <= 0.0) ? -1e300 : 1.0 - std::sin(mid) / std::sqrt(w2);
        if (dp < -1.5)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

/// Constant c(alpha, r) > 2 certifying chi <= -c on the inner-reaching branch
/// of a guide with alpha >= pi: c = min{3, 2(alpha - 2 delta(th)) / (pi - 2 th)}
/// evaluated at the angle th where delta' crosses -3/2. Below that angle the
/// twist of a single return is already stronger than -3; above it the bound
/// follows from the convexity of delta.
inline double compute_c(const NormalizedGuide& g) {
    if (g.alpha < pi - 1e-12)
        throw TrackError(ErrorCode::no_root, "compute_c requires alpha >= pi");
    auto th = theta_hat(g);
    if (!th) return 3.0; // delta' < -3/2 everywhere on the branch
    double t = *th;
    double cand = 2.0 * (g.alpha - 2.0 * delta(g, t)) / (pi - 2.0 * t);
    double c = std::min(3.0, cand);
    if (!(c > 2.0))
        throw TrackError(ErrorCode::no_root, "controlled-focusing constant failed c > 2");
    return c;
}

// ---------------------------------------------------------------------------
// Tangent transfer through a passage.
// ---------------------------------------------------------------------------

namespace detail {

struct ChordData {
    double sin_outer;  // sin(theta)
    double sin_inner;  // sine of the collision angle on the inner circle
    double piece_len;  // outer <-> inner chord length
    double dprime;     // delta'(theta)
};

inline ChordData chord_data(const NormalizedGuide& g, double theta) {
    ChordData d{};
    d.sin_outer = std::sin(theta);
    if (g.inner_branch(theta)) {
        double c = std::cos(theta);
        double w = std::sqrt(g.r * g.r - c * c);
        d.sin_inner = w / g.r;
        d.piece_len = d.sin_outer - w;
        d.dprime = 1.0 - d.sin_outer / w;
    }
    return d;
}

} // namespace detail

/// Derivative of the passage map from the entry collision to the last
/// collision inside the guide, in (s = psi, theta) coordinates on the unit
/// outer circle (curvature +1) and the inner circle (curvature -1/r).
/// Runs of consecutive outer-circle returns compose to the unit shear
/// [[1, 2 n delta'], [0, 1]]; entries or exits through the inner circle
/// contribute one explicit half-chord factor each.
inline Mat2 passage_derivative(const NormalizedGuide& g, const Passage& p) {
    double theta = p.theta;
    if (!g.inner_branch(theta)) {
        double n = static_cast<double>(p.n1);
        return {1.0, 2.0 * n, 0.0, 1.0};
    }
    detail::ChordData cd = detail::chord_data(g, theta);
    double kappa_in = -1.0 / g.r;
    Mat2 j_oi = collision_jacobian(cd.piece_len, 1.0, cd.sin_outer, kappa_in, cd.sin_inner);
    Mat2 j_io = collision_jacobian(cd.piece_len, kappa_in, cd.sin_inner, 1.0, cd.sin_outer);

    int k = p.events_after;
    Mat2 m{1.0, 0.0, 0.0, 1.0};
    bool at_outer = (p.entry_circle == CircleId::outer);
    if (!at_outer && k >= 1) {
        m = j_io;
        at_outer = true;
        k -= 1;
    }
    if (at_outer && k >= 1) {
        int full = k / 2;
        bool trailing_inner = (k % 2 == 1);
        Mat2 shear{1.0, 2.0 * full * cd.dprime, 0.0, 1.0};
        m = shear * m;
        if (trailing_inner) m = j_oi * m;
    }
    return m;
}

/// Focusing-time transfer across the guide: the backward focusing time of a
/// tangent vector at the entry collision is mapped projectively to the
/// forward focusing time of its image at the last collision inside.
struct TransferMap {
    Mobius map;
    double tau1 = 0.0;
    double tau2 = 0.0;
};

inline double circle_curvature(const NormalizedGuide& g, CircleId c) {
    return c == CircleId::outer ? 1.0 : -1.0 / g.r;
}

inline TransferMap transfer_map(const NormalizedGuide& g, const Passage& p) {
    detail::ChordData cd = detail::chord_data(g, p.theta);
    double sin_entry = (p.entry_circle == CircleId::outer) ? std::sin(p.theta) : cd.sin_inner;
    double sin_last = (p.last_circle == CircleId::outer) ? std::sin(p.theta) : cd.sin_inner;
    Mat2 m = passage_derivative(g, p);
    Mat2 phi = to_forward_focus(circle_curvature(g, p.last_circle), sin_last) * m *
               from_backward_focus(circle_curvature(g, p.entry_circle), sin_entry);
    TransferMap out;
    out.map = Mobius{phi};
    auto fx = out.map.fixed_points();
    if (!fx.ok)
        throw TrackError(ErrorCode::degenerate_transfer,
                         "transfer map has complex fixed points");
    out.tau1 = fx.tau1;
    out.tau2 = fx.tau2;
    return out;
}

// ---------------------------------------------------------------------------
// Guide classification and focal length.
// ---------------------------------------------------------------------------

enum class GuideType { A, B, AB, neither };

inline const char* to_string(GuideType t) {
    switch (t) {
        case GuideType::A: return "A";
        case GuideType::B: return "B";
        case GuideType::AB: return "AB";
        default: return "neither";
    }
}

/// Analysis record of one circular guide. Lengths are normalized to outer
/// radius 1; multiply by the physical outer radius to compare with straight
/// guide lengths.
struct GuideReport {
    int guide_index = -1;
    double r = 0.0;
    double alpha = 0.0;
    double beta_bar = 0.0;
    double outer_radius = 0.0; // physical r1
    GuideType type = GuideType::neither;
    double c_tilde = 0.0;     // controlled-focusing constant (max over A/B routes)
    double tau_bound = 0.0;   // c~/(c~-2), normalized
    double tau_numeric = 0.0; // grid supremum of tau1, normalized
    double tau_numeric_first_last_outer = 0.0; // restricted to outer-entry/outer-exit states
    double tau_numeric_other = 0.0;            // passages touching the inner circle at an end

    bool classified() const { return type != GuideType::neither; }
    double tau_bound_physical() const { return tau_bound * outer_radius; }
    double tau_numeric_physical() const { return tau_numeric * outer_radius; }
};

inline GuideType classify_type(double alpha, double r) {
    bool a = alpha >= pi - 1e-12;
    bool b = r < 0.5;
    if (a && b) return GuideType::AB;
    if (a) return GuideType::A;
    if (b) return GuideType::B;
    return GuideType::neither;
}

/// Type and controlled-focusing constant of a normalized guide. tau fields
/// are filled by focal_length.
inline GuideReport classify_guide(const NormalizedGuide& g) {
    GuideReport rep;
    rep.r = g.r;
    rep.alpha = g.alpha;
    rep.beta_bar = g.beta_bar;
    rep.outer_radius = 1.0;
    rep.type = classify_type(g.alpha, g.r);
    if (rep.type == GuideType::neither) return rep;
    double c = 0.0;
    if (rep.type == GuideType::A || rep.type == GuideType::AB) c = compute_c(g);
    if (rep.type == GuideType::B || rep.type == GuideType::AB)
        c = std::max(c, 2.0 * (1.0 / g.r - 1.0));
    rep.c_tilde = c;
    rep.tau_bound = c / (c - 2.0);
    return rep;
}

struct FocalLengthOptions {
    int positions = 2000; // entry-position grid
    int angles = 2000;    // collision-angle grid
    int refine_factor = 10;
    double refine_window = 5e-3; // radians around each branch point
};

/// Numeric supremum of tau1 over a deterministic grid of entering collisions
/// (entries through the outer and the inner circle), plus the analytic bound
/// check. tau1 is smooth away from the branch points of delta, which get a
/// locally refined angle grid.
inline void focal_length(const NormalizedGuide& g, GuideReport& rep,
                         const FocalLengthOptions& opt = {}) {
    std::vector<double> thetas;
    thetas.reserve(static_cast<size_t>(opt.angles) + 8 * static_cast<size_t>(opt.refine_factor));
    for (int i = 1; i < opt.angles; ++i)
        thetas.push_back(pi * i / opt.angles);
    double base_step = pi / opt.angles;
    for (double center : {g.beta_bar, pi - g.beta_bar}) {
        double step = base_step / opt.refine_factor;
        int half = opt.refine_factor * static_cast<int>(std::ceil(opt.refine_window / base_step));
        for (int i = -half; i <= half; ++i) {
            double th = center + i * step;
            if (th > 1e-9 && th < pi - 1e-9) thetas.push_back(th);
        }
    }

    double sup_outer = 0.0; // entry and exit on the outer circle
    double sup_other = 0.0;
    for (double theta : thetas) {
        if (std::abs(theta - g.beta_bar) < 1e-12 ||
            std::abs(theta - (pi - g.beta_bar)) < 1e-12 ||
            std::abs(theta - 0.5 * pi) < 1e-12)
            continue;
        bool middle = g.inner_branch(theta);
        for (int j = 0; j < opt.positions; ++j) {
            double pos = g.alpha * (j + 0.5) / opt.positions;
            Passage p = trace_passage(g, CircleId::outer, pos, theta);
            if (p.status != AdvanceStatus::ok || !p.entering) continue;
            TransferMap tm = transfer_map(g, p);
            if (p.last_circle == CircleId::outer && p.entry_circle == CircleId::outer)
                sup_outer = std::max(sup_outer, tm.tau1);
            else
                sup_other = std::max(sup_other, tm.tau1);
        }
        if (middle) {
            for (int j = 0; j < opt.positions; ++j) {
                double pos = g.alpha * (j + 0.5) / opt.positions;
                Passage p = trace_passage(g, CircleId::inner, pos, theta);
                if (p.status != AdvanceStatus::ok || !p.entering) continue;
                TransferMap tm = transfer_map(g, p);
                sup_other = std::max(sup_other, tm.tau1);
            }
        }
    }
    rep.tau_numeric_first_last_outer = sup_outer;
    rep.tau_numeric_other = sup_other;
    rep.tau_numeric = std::max(sup_outer, sup_other);
    if (rep.classified() && rep.tau_numeric > rep.tau_bound + 1e-9)
        throw TrackError(ErrorCode::bound_violation,
                         "numeric focal length exceeds the analytic bound");
}

/// Convenience: classification plus focal length in one call.
inline GuideReport analyze_guide(const NormalizedGuide& g, const FocalLengthOptions& opt = {}) {
    GuideReport rep = classify_guide(g);
    if (rep.classified()) focal_length(g, rep, opt);
    return rep;
}

} // namespace trackbill

#endif
