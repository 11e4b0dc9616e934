// Sweep the straight-guide length of a two-guide track and print the top
// Lyapunov exponent next to the hyperbolicity-condition margin, showing how
// the certified regime relates to the measured chaoticity.

#include <cstdio>

#include "trackbill/dynamics.hpp"
#include "trackbill/tangent.hpp"
#include "trackbill/track.hpp"

using namespace trackbill;

int main() {
    std::printf("# R=0.7 halfwidth=0.3 guides (factor r=0.4, focal bound 3 per unit r1)\n");
    std::printf("# The bound margin is sufficient, not necessary: the exponent stays\n");
    std::printf("# positive below the certified regime, and long straights dilute the\n");
    std::printf("# per-collision expansion.\n");
    std::printf("%8s %14s %14s %12s %12s\n", "length", "margin_bound", "margin_numeric",
                "certified", "lambda1");
    FocalLengthOptions opt;
    opt.positions = 200;
    opt.angles = 400;
    for (double l : {4.0, 5.0, 6.0, 6.5, 7.0, 8.0, 10.0, 14.0}) {
        TrackSpec spec;
        spec.dimension = 2;
        spec.halfwidth = 0.3;
        spec.guides = {GuideSpec::arc(0.7, pi, +1), GuideSpec::straight(l),
                       GuideSpec::arc(0.7, pi, +1), GuideSpec::straight(l)};
        TrackGeometry geo = build_track(spec);
        auto reps = analyze_track(geo, opt);
        ConditionHReport h = check_condition_h(geo, reps);
        double mb = h.margins.empty() ? 0.0 : h.margins[0].margin_bound;
        double mn = h.margins.empty() ? 0.0 : h.margins[0].margin_numeric;
        const char* cert = (h.by_bound == HVerdict::satisfied) ? "bound"
                           : h.certified()                     ? "numeric"
                                                               : "no";

        SplitMix64 rng(2);
        CollisionState x0 = sample_state(geo, rng, Rotation::R);
        LyapunovRun run = lyapunov(geo, x0, 400000, 7);
        std::printf("%8.2f %14.4f %14.4f %12s %12.6f\n", l, mb, mn, cert, run.lambda);
    }
    return 0;
}
