#ifndef TRACKBILL_BEAM_HPP
#define TRACKBILL_BEAM_HPP

#include <cmath>
#include <limits>
#include <utility>

namespace trackbill {

inline constexpr double projective_inf = std::numeric_limits<double>::infinity();

struct Mat2 {
    // row-major: [[a, b], [c, d]]
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    double det() const { return a * d - b * c; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

/// Tangent vector (ds, dtheta) at a collision; slope m = dtheta/ds is a
/// projective coordinate (ds = 0 is the vertical direction m = inf).
struct TangentVec {
    double ds = 0.0;
    double dtheta = 0.0;

    double slope() const { return dtheta / ds; }
    double norm() const { return std::hypot(ds, dtheta); }
};

inline TangentVec apply(const Mat2& m, TangentVec u) {
    return {m.a * u.ds + m.b * u.dtheta, m.c * u.ds + m.d * u.dtheta};
}

/// Forward focusing time sin(theta) / (kappa + m): signed distance from the
/// collision point to the focal point of an infinitesimal beam continued
/// forward along the outgoing ray. Infinite for a parallel beam.
inline double focus_forward(double sin_theta, double kappa, TangentVec u) {
    double denom = kappa * u.ds + u.dtheta;
    if (denom == 0.0) return projective_inf;
    return sin_theta * u.ds / denom;
}

/// Backward focusing time sin(theta) / (kappa - m).
inline double focus_backward(double sin_theta, double kappa, TangentVec u) {
    double denom = kappa * u.ds - u.dtheta;
    if (denom == 0.0) return projective_inf;
    return sin_theta * u.ds / denom;
}

/// Derivative of one billiard step in (s, theta) coordinates, from a
/// collision with wall curvature `kf` and angle sine `sf`, across a free
/// flight of length t, to a collision with curvature `kt` and angle sine
/// `st`. Signs: focusing walls carry positive curvature, dispersing walls
/// negative, flat walls zero. The matrix satisfies
///   det = sf / st,
///   backward focusing time at the image = t - forward focusing time at the
///   source (free flight translates the focal point; the reflection itself
///   enters through the mirror relation between the two focusing times).
inline Mat2 collision_jacobian(double t, double kf, double sf, double kt, double st) {
    double p = t * kf - sf;
    return {p / st, t / st,
            (kt * p - kf * st) / st, (kt * t - st) / st};
}

/// Real 2x2 matrix acting on the projective line, z -> (a z + b)/(c z + d).
/// Used for the focusing-time transfer across a guide.
struct Mobius {
    Mat2 m;

    double operator()(double z) const {
        if (std::isinf(z)) {
            if (m.c == 0.0) return projective_inf;
            return m.a / m.c;
        }
        double num = m.a * z + m.b;
        double den = m.c * z + m.d;
        if (den == 0.0) return projective_inf;
        return num / den;
    }

    /// Fixed points, larger first. The transfer maps built from guide
    /// passages have negative determinant, which makes the discriminant
    /// (a+d)^2 - 4 det strictly positive; a negative discriminant therefore
    /// signals a state outside the entering set or a numerical fault.
    struct Fixed {
        bool ok = false;
        double tau1 = 0.0, tau2 = 0.0;
    };

    Fixed fixed_points() const {
        // c z^2 + (d - a) z - b = 0
        Fixed out;
        double disc = (m.a + m.d) * (m.a + m.d) - 4.0 * m.det();
        if (disc < 0.0) return out;
        double s = std::sqrt(disc);
        out.ok = true;
        if (m.c == 0.0) {
            // one fixed point at infinity; the finite one solves (d-a) z = b
            if (m.d == m.a) {
                out.tau1 = out.tau2 = projective_inf;
            } else {
                double z = m.b / (m.d - m.a);
                out.tau1 = z;
                out.tau2 = z;
            }
            return out;
        }
        double bq = m.d - m.a;
        double q = (bq >= 0.0) ? -0.5 * (bq + s) : -0.5 * (bq - s);
        double z0, z1;
        if (q == 0.0) {
            z0 = z1 = 0.0;
        } else {
            z0 = q / m.c;
            z1 = -m.b / q;
        }
        out.tau1 = std::max(z0, z1);
        out.tau2 = std::min(z0, z1);
        return out;
    }
};

/// Chart sending a backward focusing time f to the tangent direction with
/// that focusing time: (ds, dtheta) proportional to (f, kappa f - sin_theta).
inline Mat2 from_backward_focus(double kappa, double sin_theta) {
    return {1.0, 0.0, kappa, -sin_theta};
}

/// Chart sending a tangent direction to its forward focusing time.
inline Mat2 to_forward_focus(double kappa, double sin_theta) {
    return {sin_theta, 0.0, kappa, 1.0};
}

} // namespace trackbill

#endif
