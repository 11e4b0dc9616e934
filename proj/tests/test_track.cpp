#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trackbill/track.hpp"
#include "trackbill/trackfile.hpp"

using namespace trackbill;

namespace {

TrackSpec stadium_ring(double R, double eps, double l, double alpha = pi) {
    TrackSpec s;
    s.dimension = 2;
    s.halfwidth = eps;
    s.guides = {GuideSpec::arc(R, alpha, +1), GuideSpec::straight(l),
                GuideSpec::arc(R, alpha, +1), GuideSpec::straight(l)};
    return s;
}

TrackSpec rounded_square(double R, double eps, double l) {
    TrackSpec s;
    s.dimension = 2;
    s.halfwidth = eps;
    for (int i = 0; i < 4; ++i) {
        s.guides.push_back(GuideSpec::arc(R, 0.5 * pi, +1));
        s.guides.push_back(GuideSpec::straight(l));
    }
    return s;
}

} // namespace

TEST_CASE("stadium-ring construction and atlas") {
    TrackGeometry geo = build_track(stadium_ring(2.0, 0.25, 6.0));
    CHECK(geo.walls.size() == 8);
    CHECK(geo.gates.size() == 4);
    CHECK(geo.turning_sign == +1);

    double outer_expected = 2.0 * pi * 2.25 + 12.0;
    double inner_expected = 2.0 * pi * 1.75 + 12.0;
    CHECK(geo.loop_length[0] == doctest::Approx(outer_expected).epsilon(1e-12));
    CHECK(geo.loop_length[1] == doctest::Approx(inner_expected).epsilon(1e-12));

    SUBCASE("atlas has no gaps and both loops run counterclockwise") {
        for (const Wall& w : geo.walls) {
            for (double f : {0.1, 0.5, 0.9}) {
                Vec2 q = w.point_at_local(f * w.length);
                Vec2 t = w.tangent_at(q);
                Vec2 nin = w.inward_at(q);
                CHECK(std::abs(dot(t, nin)) < 1e-12);
                // Outer loop: inward normal on the left of the tangent;
                // inner loop: on the right.
                Vec2 expect = (w.loop == 0) ? perp(t) : -perp(t);
                CHECK((expect - nin).norm() < 1e-9);
                CHECK(w.s_global(q) == doctest::Approx(w.s_begin + f * w.length).epsilon(1e-9));
            }
        }
        double sum[2] = {0.0, 0.0};
        for (const Wall& w : geo.walls) sum[w.loop] += w.length;
        CHECK(sum[0] == doctest::Approx(geo.loop_length[0]).epsilon(1e-12));
        CHECK(sum[1] == doctest::Approx(geo.loop_length[1]).epsilon(1e-12));
    }

    SUBCASE("curvature bookkeeping") {
        for (const Wall& w : geo.walls) {
            if (w.kind != WallKind::arc) {
                CHECK(w.curvature == 0.0);
                continue;
            }
            if (w.arc.inward_radial < 0)
                CHECK(w.curvature == doctest::Approx(1.0 / 2.25));
            else
                CHECK(w.curvature == doctest::Approx(-1.0 / 1.75));
        }
    }

    SUBCASE("concentric arcs separated by the tube width") {
        for (int gi : {0, 2}) {
            const Wall *wo = nullptr, *wi = nullptr;
            for (const Wall& w : geo.walls)
                if (w.guide == gi && w.kind == WallKind::arc) {
                    if (w.curvature > 0)
                        wo = &w;
                    else
                        wi = &w;
                }
            REQUIRE(wo != nullptr);
            REQUIRE(wi != nullptr);
            CHECK((wo->arc.center - wi->arc.center).norm() < 1e-10);
            CHECK(wo->arc.radius - wi->arc.radius == doctest::Approx(0.5).epsilon(1e-12));
        }
    }
}

TEST_CASE("construction failures") {
    SUBCASE("lone full-turn arc is rejected as cyclically adjacent to itself") {
        TrackSpec s;
        s.dimension = 2;
        s.halfwidth = 0.25;
        s.guides = {GuideSpec::arc(1.0, 2.0 * pi - 1e-3, +1)};
        CHECK_THROWS_WITH_AS((void)build_track(s), doctest::Contains("separated"), TrackError);
    }
    SUBCASE("two adjacent arcs") {
        TrackSpec s;
        s.dimension = 2;
        s.halfwidth = 0.2;
        s.guides = {GuideSpec::arc(1.0, pi, +1), GuideSpec::arc(1.0, pi, +1)};
        try {
            (void)build_track(s);
            FAIL("expected adjacency failure");
        } catch (const TrackError& e) {
            CHECK(e.code() == ErrorCode::adjacency_fail);
        }
    }
    SUBCASE("insufficient turning") {
        TrackSpec s;
        s.dimension = 2;
        s.halfwidth = 0.2;
        s.guides = {GuideSpec::arc(1.0, pi, +1), GuideSpec::straight(2.0)};
        try {
            (void)build_track(s);
            FAIL("expected closure failure");
        } catch (const TrackError& e) {
            CHECK(e.code() == ErrorCode::closure_fail);
        }
    }
    SUBCASE("non-closing centerline") {
        TrackSpec s;
        s.dimension = 2;
        s.halfwidth = 0.1;
        s.guides = {GuideSpec::arc(1.0, pi, +1), GuideSpec::straight(2.0),
                    GuideSpec::arc(1.0, pi, +1), GuideSpec::straight(3.0)};
        try {
            (void)build_track(s);
            FAIL("expected closure failure");
        } catch (const TrackError& e) {
            CHECK(e.code() == ErrorCode::closure_fail);
        }
    }
    SUBCASE("self-intersecting tube") {
        // Clover-like track whose lobes collide: two big opposite turns.
        TrackSpec s;
        s.dimension = 2;
        s.halfwidth = 0.45;
        s.guides = {GuideSpec::arc(1.0, 1.5 * pi, +1), GuideSpec::straight(1.0),
                    GuideSpec::arc(1.0, 0.5 * pi, -1), GuideSpec::straight(1.0),
                    GuideSpec::arc(1.0, 1.5 * pi, +1), GuideSpec::straight(1.0),
                    GuideSpec::arc(1.0, 0.5 * pi, -1), GuideSpec::straight(1.0)};
        CHECK_THROWS_AS((void)build_track(s), TrackError);
    }
}

TEST_CASE("mixed-turn track builds with coherent loops") {
    // Rectangle loop with one dented corner: five left quarter turns and one
    // right quarter turn.
    TrackSpec s;
    s.dimension = 2;
    s.halfwidth = 0.3;
    s.guides = {GuideSpec::straight(6.0), GuideSpec::arc(1.0, 0.5 * pi, +1),
                GuideSpec::straight(4.0), GuideSpec::arc(1.0, 0.5 * pi, +1),
                GuideSpec::straight(2.0), GuideSpec::arc(1.0, 0.5 * pi, -1),
                GuideSpec::straight(2.0), GuideSpec::arc(1.0, 0.5 * pi, +1),
                GuideSpec::straight(2.0), GuideSpec::arc(1.0, 0.5 * pi, +1),
                GuideSpec::straight(8.0), GuideSpec::arc(1.0, 0.5 * pi, +1)};
    TrackGeometry geo = build_track(s);
    CHECK(geo.walls.size() == 24);
    // The right-turn guide's focusing wall sits on the inner loop.
    bool saw_right_turn_focusing = false;
    for (const Wall& w : geo.walls)
        if (w.guide == 5 && w.curvature > 0.0) {
            CHECK(w.loop == 1);
            saw_right_turn_focusing = true;
        }
    CHECK(saw_right_turn_focusing);
    for (const Wall& w : geo.walls) {
        Vec2 q = w.point_at_local(0.5 * w.length);
        Vec2 expect = (w.loop == 0) ? perp(w.tangent_at(q)) : -perp(w.tangent_at(q));
        CHECK((expect - w.inward_at(q)).norm() < 1e-9);
    }
}

TEST_CASE("annulus baseline constructor") {
    TrackGeometry geo = make_annulus(1.0, 0.25);
    CHECK(geo.annulus);
    CHECK(geo.walls.size() == 2);
    CHECK(geo.loop_length[0] == doctest::Approx(2.0 * pi * 1.25));
    CHECK(geo.loop_length[1] == doctest::Approx(2.0 * pi * 0.75));
    // Not expressible as a TrackSpec: the equivalent spec is rejected.
    TrackSpec s;
    s.dimension = 2;
    s.halfwidth = 0.25;
    s.guides = {GuideSpec::arc(1.0, 2.0 * pi, +1)};
    CHECK_THROWS((void)build_track(s));
}

TEST_CASE("track-level guide classification") {
    TrackGeometry geo = build_track(stadium_ring(2.0, 0.25, 6.0));
    GuideReport rep = classify_track_guide(geo, 0);
    CHECK(rep.type == GuideType::A);
    CHECK(rep.r == doctest::Approx(1.75 / 2.25).epsilon(1e-12));
    CHECK(rep.beta_bar == doctest::Approx(std::acos(1.75 / 2.25)).epsilon(1e-12));
    CHECK(rep.outer_radius == doctest::Approx(2.25));
}

TEST_CASE("hyperbolicity condition margins") {
    FocalLengthOptions opt;
    opt.positions = 150;
    opt.angles = 300;

    SUBCASE("type-B stadium with unit outer radius, straight length 7") {
        // R = 0.7, halfwidth 0.3: r1 = 1, r = 0.4, bound c~/(c~-2) = 3.
        TrackGeometry geo = build_track(stadium_ring(0.7, 0.3, 7.0));
        auto reps = analyze_track(geo, opt);
        REQUIRE(reps.size() == 2);
        // alpha = pi and r < 1/2: both classification routes apply.
        CHECK(reps[0].type == GuideType::AB);
        CHECK(reps[0].c_tilde == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(reps[0].tau_bound_physical() == doctest::Approx(3.0).epsilon(1e-12));
        ConditionHReport h = check_condition_h(geo, reps);
        CHECK(h.by_bound == HVerdict::satisfied);
        REQUIRE(h.margins.size() == 2);
        for (const HMargin& m : h.margins)
            CHECK(m.margin_bound == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(h.by_numeric == HVerdict::satisfied);
    }
    SUBCASE("short straights fail by the bound but may pass numerically") {
        TrackGeometry geo = build_track(stadium_ring(0.7, 0.3, 5.0));
        auto reps = analyze_track(geo, opt);
        ConditionHReport h = check_condition_h(geo, reps);
        CHECK(h.by_bound == HVerdict::violated);
        for (const HMargin& m : h.margins)
            CHECK(m.margin_bound == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(h.by_numeric == HVerdict::satisfied); // grid supremum is well below the bound
    }
    SUBCASE("equality violates the strict inequality") {
        TrackGeometry geo = build_track(stadium_ring(0.7, 0.3, 6.0));
        auto reps = analyze_track(geo, opt);
        ConditionHReport h = check_condition_h(geo, reps);
        CHECK(h.by_bound == HVerdict::violated);
    }
    SUBCASE("unclassifiable guide blocks certification") {
        // Quarter-turn arcs with thin tube: alpha < pi and r > 1/2.
        TrackGeometry geo = build_track(rounded_square(1.0, 0.1, 4.0));
        auto reps = analyze_track(geo, opt);
        for (const auto& r : reps) CHECK(r.type == GuideType::neither);
        ConditionHReport h = check_condition_h(geo, reps);
        CHECK(h.by_bound == HVerdict::unclassified);
        CHECK(h.by_numeric == HVerdict::unclassified);
    }
    SUBCASE("rounded square of type B guides") {
        TrackGeometry geo = build_track(rounded_square(0.7, 0.3, 7.0));
        auto reps = analyze_track(geo, opt);
        for (const auto& r : reps) CHECK(r.type == GuideType::B);
        ConditionHReport h = check_condition_h(geo, reps);
        CHECK(h.by_bound == HVerdict::satisfied);
    }
}

TEST_CASE("track file parsing and canonical serialization") {
    std::string text =
        "# demo track\n"
        "version 1\n"
        "dim 2\n"
        "halfwidth 0.25\n"
        "guide arc radius=2 angle=3.141592653589793 turn=left\n"
        "guide straight length=6\n"
        "guide arc radius=2 angle=3.141592653589793 turn=left\n"
        "guide straight length=6\n";
    TrackSpec spec = parse_track_file(text);
    CHECK(spec.dimension == 2);
    CHECK(spec.halfwidth == 0.25);
    REQUIRE(spec.guides.size() == 4);
    CHECK(spec.guides[0].kind == GuideSpec::Kind::circular);
    CHECK(spec.guides[0].angle == doctest::Approx(pi).epsilon(1e-15));

    SUBCASE("serialize-parse round trip is exact") {
        std::string canon = serialize_track_spec(spec);
        TrackSpec again = parse_track_file(canon);
        CHECK(serialize_track_spec(again) == canon);
        REQUIRE(again.guides.size() == spec.guides.size());
        for (size_t i = 0; i < spec.guides.size(); ++i) {
            CHECK(again.guides[i].radius == spec.guides[i].radius);
            CHECK(again.guides[i].angle == spec.guides[i].angle);
            CHECK(again.guides[i].length == spec.guides[i].length);
        }
        // Rebuilding from the round-tripped spec gives identical walls.
        TrackGeometry a = build_track(spec);
        TrackGeometry b = build_track(again);
        REQUIRE(a.walls.size() == b.walls.size());
        for (size_t i = 0; i < a.walls.size(); ++i) {
            CHECK(a.walls[i].s_begin == b.walls[i].s_begin);
            CHECK(a.walls[i].length == b.walls[i].length);
            CHECK(a.walls[i].curvature == b.walls[i].curvature);
        }
    }
    SUBCASE("unknown directive is an error with a line number") {
        CHECK_THROWS_WITH_AS((void)parse_track_file("version 1\nwidth 3\n"),
                             doctest::Contains("line 2"), TrackError);
    }
    SUBCASE("unknown guide key is an error") {
        CHECK_THROWS_AS(
            (void)parse_track_file("version 1\ndim 2\nhalfwidth 0.2\nguide arc radius=1 "
                                   "angle=3 turn=left color=red\n"),
            TrackError);
    }
    SUBCASE("roll requires dim 3") {
        CHECK_THROWS_AS(
            (void)parse_track_file("version 1\ndim 2\nhalfwidth 0.2\nguide arc radius=1 "
                                   "angle=3 turn=left roll=90\n"),
            TrackError);
    }
    SUBCASE("3-D file with sections and rolls") {
        std::string t3 =
            "version 1\ndim 3\nsection 0.5 0.5\n"
            "guide arc radius=1 angle=3.141592653589793 turn=left roll=0\n"
            "guide straight length=8\n"
            "guide arc radius=1 angle=3.141592653589793 turn=left roll=90\n"
            "guide straight length=8\n";
        TrackSpec s3 = parse_track_file(t3);
        CHECK(s3.dimension == 3);
        CHECK(s3.section_a == 0.5);
        CHECK(s3.guides[2].roll == doctest::Approx(0.5 * pi).epsilon(1e-15));
        CHECK(serialize_track_spec(parse_track_file(serialize_track_spec(s3))) ==
              serialize_track_spec(s3));
    }
}
