#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/brute_guide.hpp"
#include "trackbill/guide.hpp"
#include "trackbill/rng.hpp"

using namespace trackbill;

TEST_CASE("delta closed form") {
    NormalizedGuide g(0.5, pi);
    CHECK(g.beta_bar == doctest::Approx(pi / 3.0).epsilon(1e-14));

    // Below beta_bar the chord misses the inner circle.
    CHECK(delta(g, pi / 4.0) == doctest::Approx(pi / 4.0).epsilon(1e-14));
    // Radial chord: no angular advance.
    CHECK(std::abs(delta(g, pi / 2.0)) < 1e-14);
    // Continuity at beta_bar: both branches give beta_bar.
    CHECK(delta(g, pi / 3.0) == doctest::Approx(pi / 3.0).epsilon(1e-12));
    CHECK(delta(g, pi / 3.0 - 1e-9) == doctest::Approx(pi / 3.0).epsilon(1e-4));
    CHECK(delta(g, pi / 3.0 + 1e-9) == doctest::Approx(pi / 3.0).epsilon(1e-4));
    // Odd symmetry about pi/2 on the inner-reaching branch.
    CHECK(delta(g, pi / 2.0 + 0.2) == doctest::Approx(-delta(g, pi / 2.0 - 0.2)).epsilon(1e-12));
}

TEST_CASE("delta derivatives") {
    SUBCASE("value at pi/2 is 1 - 1/r exactly") {
        for (double r : {0.3, 0.4, 0.6, 0.8, 0.95}) {
            NormalizedGuide g(r, pi);
            CHECK(std::abs(delta_prime(g, pi / 2.0) - (1.0 - 1.0 / r)) < 1e-12);
        }
        NormalizedGuide g04(0.4, pi);
        CHECK(delta_prime(g04, pi / 2.0) == doctest::Approx(-1.5).epsilon(1e-14));
    }
    SUBCASE("finite differences") {
        SplitMix64 rng(3);
        NormalizedGuide g(0.6, pi);
        int checked = 0;
        while (checked < 1000) {
            double th = rng.uniform(1e-3, pi - 1e-3);
            double dist = std::min(std::abs(th - g.beta_bar), std::abs(th - (pi - g.beta_bar)));
            if (dist < 5e-3) continue;
            double h = 1e-6;
            double fd1 = (delta(g, th + h) - delta(g, th - h)) / (2.0 * h);
            CHECK(std::abs(fd1 - delta_prime(g, th)) < 1e-6);
            if (dist > 0.1) { // higher derivatives blow up at the branch points
                double h2 = 1e-4;
                double fd2 =
                    (delta(g, th + h2) - 2.0 * delta(g, th) + delta(g, th - h2)) / (h2 * h2);
                CHECK(std::abs(fd2 - delta_second(g, th)) < 1e-6 * (1.0 + std::abs(fd2)));
            }
            ++checked;
        }
    }
    SUBCASE("second derivative positive left of pi/2 on the inner branch") {
        NormalizedGuide g(0.6, pi);
        for (double th = g.beta_bar + 1e-3; th < pi / 2.0 - 1e-3; th += 0.01)
            CHECK(delta_second(g, th) > 0.0);
    }
    SUBCASE("branch points are singular") {
        NormalizedGuide g(0.6, pi);
        CHECK_THROWS_AS((void)delta_prime(g, g.beta_bar + 1e-13), TrackError);
    }
}

TEST_CASE("advance chord arithmetic") {
    SUBCASE("documented short passage") {
        NormalizedGuide g(0.5, pi);
        Passage p = advance(g, 0.1, pi / 4.0);
        REQUIRE(p.status == AdvanceStatus::ok);
        CHECK(p.n1 == 1);
        CHECK(p.inner_hits == 0);
        CHECK(p.last_pos == doctest::Approx(0.1 + pi / 2.0).epsilon(1e-12));
        CHECK(p.exit_side == +1);
        CHECK(p.theta == doctest::Approx(pi / 4.0)); // angle is conserved
    }
    SUBCASE("radial chord never leaves") {
        NormalizedGuide g(0.5, pi);
        Passage p = advance(g, 0.3, pi / 2.0);
        CHECK(p.status == AdvanceStatus::nonpositive_advance);
    }
    SUBCASE("clockwise passages mirror counterclockwise ones") {
        NormalizedGuide g(0.6, 2.0);
        Passage fwd = advance(g, 0.2, 0.8);
        Passage bwd = advance(g, 2.0 - 0.2, pi - 0.8);
        REQUIRE(fwd.status == AdvanceStatus::ok);
        REQUIRE(bwd.status == AdvanceStatus::ok);
        CHECK(fwd.n1 == bwd.n1);
        CHECK(fwd.inner_hits == bwd.inner_hits);
        CHECK(fwd.exit_side == -bwd.exit_side);
        CHECK(fwd.last_pos == doctest::Approx(2.0 - bwd.last_pos).epsilon(1e-10));
    }
}

TEST_CASE("advance matches the Cartesian brute-force tracer") {
    SplitMix64 rng(2026);
    for (double r : {0.4, 0.7}) {
        for (double alpha : {0.5 * pi, pi, 1.5 * pi}) {
            NormalizedGuide g(r, alpha);
            int done = 0;
            while (done < 800) {
                double theta = rng.uniform(0.02, pi - 0.02);
                if (std::abs(theta - g.beta_bar) < 1e-3 ||
                    std::abs(theta - (pi - g.beta_bar)) < 1e-3 ||
                    std::abs(theta - 0.5 * pi) < 1e-3)
                    continue;
                double psi = rng.uniform(0.0, alpha);
                Passage p = advance(g, psi, theta);
                if (p.status != AdvanceStatus::ok) continue;
                brute::BruteResult b = brute::trace(r, alpha, 0, psi, theta);
                REQUIRE(b.ok);
                CHECK(p.n1 == b.outer_after);
                CHECK(p.inner_hits == b.inner_after);
                CHECK(p.exit_side == b.exit_side);
                CHECK((p.last_circle == CircleId::outer) == (b.last_circle == 0));
                CHECK(std::abs(p.last_pos - b.last_angle) < 1e-9);
                ++done;
            }
        }
    }
}

TEST_CASE("entering detection matches the brute tracer run backwards") {
    SplitMix64 rng(5);
    NormalizedGuide g(0.55, pi);
    int done = 0;
    while (done < 500) {
        double theta = rng.uniform(0.05, pi - 0.05);
        if (std::abs(theta - g.beta_bar) < 1e-3 || std::abs(theta - (pi - g.beta_bar)) < 1e-3 ||
            std::abs(theta - 0.5 * pi) < 1e-3)
            continue;
        double psi = rng.uniform(0.0, g.alpha);
        Passage p = advance(g, psi, theta);
        if (p.status != AdvanceStatus::ok) continue;
        // Reverse the state: the entering property means the reversed orbit
        // leaves the guide with no further collision.
        brute::BruteResult back = brute::trace(g.r, g.alpha, 0, psi, pi - theta);
        REQUIRE(back.ok);
        bool brute_entering = (back.outer_after + back.inner_after == 0);
        CHECK(p.entering == brute_entering);
        ++done;
    }
}

TEST_CASE("omega and chi") {
    NormalizedGuide g(0.5, pi);
    SUBCASE("no full return leaves the whole span") {
        Passage p = advance(g, 3.1, 0.05); // advances past alpha immediately
        REQUIRE(p.status == AdvanceStatus::ok);
        REQUIRE(p.n1 == 0);
        CHECK(omega(g, p) == doctest::Approx(g.alpha));
    }
    SUBCASE("twist on the outer-only branch is 2 n1") {
        Passage p = advance(g, 0.1, pi / 4.0);
        CHECK(chi(g, p) == doctest::Approx(2.0 * p.n1).epsilon(1e-14));
    }
    SUBCASE("evaluated twist for a single inner-reaching return") {
        NormalizedGuide tight(0.4, 0.2);
        double theta = 1.5208;
        Passage p = advance(tight, 0.04, theta);
        REQUIRE(p.status == AdvanceStatus::ok);
        REQUIRE(p.n1 == 1);
        // 2 * (1 - sin(theta)/sqrt(r^2 - cos^2(theta))) at r = 0.4
        CHECK(chi(tight, p) == doctest::Approx(-3.0332).epsilon(1e-4));
    }
    SUBCASE("omega remainder bound on entering states with outer exit") {
        SplitMix64 rng(17);
        for (double r : {0.42, 0.6, 0.8}) {
            NormalizedGuide gg(r, pi);
            int done = 0;
            while (done < 2000) {
                double theta = rng.uniform(gg.beta_bar + 1e-6, pi - gg.beta_bar - 1e-6);
                double psi = rng.uniform(0.0, gg.alpha);
                Passage p = advance(gg, psi, theta);
                if (p.status != AdvanceStatus::ok || !p.entering) continue;
                if (p.last_circle != CircleId::outer || p.n1 < 1) continue;
                double om = omega(gg, p);
                double dl = std::abs(delta(gg, theta));
                CHECK(om >= -1e-12);
                CHECK(om < 2.0 * dl + 1e-12);
                ++done;
            }
        }
    }
}

TEST_CASE("controlled-focusing constant") {
    SUBCASE("documented guide") {
        NormalizedGuide g(1.75 / 2.25, pi);
        double c = compute_c(g);
        CHECK(c > 2.0);
        CHECK(c <= 3.0);
    }
    SUBCASE("nondecreasing in alpha at fixed r") {
        for (double r : {0.55, 0.7, 0.85}) {
            double prev = 0.0;
            for (double alpha = pi; alpha < 1.95 * pi; alpha += 0.1) {
                double c = compute_c(NormalizedGuide(r, alpha));
                CHECK(c >= prev - 1e-12);
                prev = c;
            }
        }
    }
    SUBCASE("small r has the single-return regime everywhere") {
        CHECK(compute_c(NormalizedGuide(0.35, pi)) == doctest::Approx(3.0));
    }
    SUBCASE("sampled twist certificate, type A") {
        SplitMix64 rng(23);
        for (double r : {0.6, 0.78, 0.9}) {
            NormalizedGuide g(r, pi);
            double c = compute_c(g);
            int done = 0;
            while (done < 4000) {
                double theta = rng.uniform(g.beta_bar + 1e-6, pi - g.beta_bar - 1e-6);
                double psi = rng.uniform(0.0, g.alpha);
                Passage p = advance(g, psi, theta);
                if (p.status != AdvanceStatus::ok || !p.entering || p.n1 < 1) continue;
                CHECK(chi(g, p) <= -c + 1e-9);
                ++done;
            }
        }
    }
    SUBCASE("sampled twist certificate, type B") {
        SplitMix64 rng(29);
        for (double r : {0.3, 0.4, 0.45}) {
            NormalizedGuide g(r, 0.8 * pi);
            int done = 0;
            while (done < 4000) {
                double theta = rng.uniform(g.beta_bar + 1e-6, pi - g.beta_bar - 1e-6);
                double psi = rng.uniform(0.0, g.alpha);
                Passage p = advance(g, psi, theta);
                if (p.status != AdvanceStatus::ok || !p.entering || p.n1 < 1) continue;
                double x = chi(g, p);
                CHECK(x <= 2.0 * p.n1 * (1.0 - 1.0 / r) + 1e-9);
                CHECK(x < -2.0);
                ++done;
            }
        }
    }
}

TEST_CASE("passage derivative is the unit shear with off-diagonal 2 n1 delta'") {
    SUBCASE("single inner-reaching return, explicit product") {
        NormalizedGuide g(0.6, pi);
        for (double theta : {0.98, 1.2, 1.4, pi - 1.1}) {
            double so = std::sin(theta);
            double co = std::cos(theta);
            double w = std::sqrt(g.r * g.r - co * co);
            double si = w / g.r;
            double u = so - w;
            Mat2 j_oi = collision_jacobian(u, 1.0, so, -1.0 / g.r, si);
            Mat2 j_io = collision_jacobian(u, -1.0 / g.r, si, 1.0, so);
            Mat2 step = j_io * j_oi;
            double dp = delta_prime(g, theta);
            CHECK(std::abs(step.a - 1.0) < 1e-12);
            CHECK(std::abs(step.d - 1.0) < 1e-12);
            CHECK(std::abs(step.c) < 1e-12);
            CHECK(step.b == doctest::Approx(2.0 * dp).epsilon(1e-12));
        }
    }
    SUBCASE("full passages against a per-collision product") {
        SplitMix64 rng(31);
        NormalizedGuide g(0.62, 1.3 * pi);
        int done = 0;
        while (done < 500) {
            double theta = rng.uniform(0.05, pi - 0.05);
            if (std::abs(theta - g.beta_bar) < 2e-3 || std::abs(theta - (pi - g.beta_bar)) < 2e-3 ||
                std::abs(theta - 0.5 * pi) < 2e-3)
                continue;
            double psi = rng.uniform(0.0, g.alpha);
            Passage p = advance(g, psi, theta);
            if (p.status != AdvanceStatus::ok || !p.entering) continue;
            Mat2 m = passage_derivative(g, p);
            if (p.entry_circle == CircleId::outer && p.last_circle == CircleId::outer) {
                double expected = 2.0 * p.n1 * delta_prime(g, theta);
                CHECK(std::abs(m.a - 1.0) < 1e-9);
                CHECK(std::abs(m.d - 1.0) < 1e-9);
                CHECK(std::abs(m.c) < 1e-9);
                CHECK(std::abs(m.b - expected) < 1e-9 * (1.0 + std::abs(expected)));
            }
            // Determinant telescopes to sin(entry) / sin(last).
            double sin_entry = (p.entry_circle == CircleId::outer)
                                   ? std::sin(theta)
                                   : std::sqrt(g.r * g.r - std::cos(theta) * std::cos(theta)) / g.r;
            double sin_last = (p.last_circle == CircleId::outer)
                                  ? std::sin(theta)
                                  : std::sqrt(g.r * g.r - std::cos(theta) * std::cos(theta)) / g.r;
            CHECK(m.det() == doctest::Approx(sin_entry / sin_last).epsilon(1e-9));
            ++done;
        }
    }
}

TEST_CASE("transfer map fixed points") {
    SUBCASE("closed forms on entering states with outer entry and exit") {
        SplitMix64 rng(37);
        NormalizedGuide g(0.6, pi);
        int done = 0;
        while (done < 2000) {
            double theta = rng.uniform(0.05, pi - 0.05);
            if (std::abs(theta - g.beta_bar) < 2e-3 || std::abs(theta - (pi - g.beta_bar)) < 2e-3 ||
                std::abs(theta - 0.5 * pi) < 2e-3)
                continue;
            double psi = rng.uniform(0.0, g.alpha);
            Passage p = advance(g, psi, theta);
            if (p.status != AdvanceStatus::ok || !p.entering || p.n1 < 1) continue;
            if (p.last_circle != CircleId::outer) continue;
            TransferMap tm = transfer_map(g, p);
            double x = chi(g, p);
            double s = std::sin(theta);
            double fixed_a = s;
            double fixed_b = s / (1.0 + 2.0 / x);
            double expect1 = std::max(fixed_a, fixed_b);
            double expect2 = std::min(fixed_a, fixed_b);
            if (g.inner_branch(theta)) {
                CHECK(expect1 == doctest::Approx(s / (1.0 + 2.0 / x)).epsilon(1e-12));
            } else {
                CHECK(expect1 == doctest::Approx(s).epsilon(1e-12));
            }
            CHECK(tm.tau1 == doctest::Approx(expect1).epsilon(1e-9));
            CHECK(tm.tau2 == doctest::Approx(expect2).epsilon(1e-9));
            // Fixed points are fixed under the projective map.
            CHECK(tm.map(tm.tau1) == doctest::Approx(tm.tau1).epsilon(1e-9));
            CHECK(tm.map(tm.tau2) == doctest::Approx(tm.tau2).epsilon(1e-9));
            // Negative determinant.
            CHECK(tm.map.m.det() < 0.0);
            ++done;
        }
    }
    SUBCASE("magnitude for a near-radial single return") {
        NormalizedGuide tight(0.4, 0.2);
        Passage p = advance(tight, 0.04, 1.5208);
        REQUIRE(p.n1 == 1);
        TransferMap tm = transfer_map(tight, p);
        double x = chi(tight, p);
        CHECK(tm.tau1 == doctest::Approx(std::sin(1.5208) / (1.0 + 2.0 / x)).epsilon(1e-9));
        CHECK(tm.tau1 > 2.5); // of order sin(theta)/(1 - 2/3) = 3 sin(theta)
    }
}

TEST_CASE("guide classification") {
    SUBCASE("documented reports") {
        // R = 2, halfwidth 0.25
        GuideReport a = classify_guide(NormalizedGuide(1.75 / 2.25, pi));
        CHECK(a.type == GuideType::A);
        CHECK(a.r == doctest::Approx(0.77778).epsilon(1e-4));
        CHECK(a.beta_bar == doctest::Approx(0.6797).epsilon(1e-3));

        // R = 1, halfwidth 0.4
        GuideReport b = classify_guide(NormalizedGuide(0.6 / 1.4, 0.5 * pi));
        CHECK(b.type == GuideType::B);
        CHECK(b.c_tilde == doctest::Approx(2.6667).epsilon(1e-4));

        GuideReport n = classify_guide(NormalizedGuide(0.9, 0.5 * pi));
        CHECK(n.type == GuideType::neither);
    }
    SUBCASE("type B bound") {
        GuideReport b = classify_guide(NormalizedGuide(0.4, 0.5 * pi));
        CHECK(b.c_tilde == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(b.tau_bound == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("larger constant gives a smaller bound") {
        // z / (z - 2) is decreasing for z > 2, so the strongest certified
        // constant yields the tightest focal-length bound.
        double prev = 1e300;
        for (double c : {2.1, 2.5, 3.0}) {
            double bound = c / (c - 2.0);
            CHECK(bound < prev);
            prev = bound;
        }
    }
}

TEST_CASE("focal length grid supremum stays below the analytic bound") {
    FocalLengthOptions opt;
    opt.positions = 200;
    opt.angles = 400;
    for (double r : {0.4, 0.6, 0.8}) {
        for (double alpha : {pi, 1.5 * pi}) {
            NormalizedGuide g(r, alpha);
            GuideReport rep = analyze_guide(g, opt);
            REQUIRE(rep.classified());
            CHECK(rep.tau_numeric <= rep.tau_bound + 1e-9);
            CHECK(rep.tau_numeric > 0.0);
            // Restriction to outer-entry/outer-exit states cannot raise the sup.
            CHECK(rep.tau_numeric_first_last_outer <= rep.tau_numeric + 1e-15);
        }
    }
}
