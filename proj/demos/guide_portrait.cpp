// Print the chord-map profile of one circular guide: delta, its derivatives,
// the passage twist at a fixed entry, and the focusing-time fixed points.
// Output is gnuplot-friendly columns.

#include <cstdio>

#include "trackbill/guide.hpp"

using namespace trackbill;

int main(int argc, char** argv) {
    double r = (argc > 1) ? std::atof(argv[1]) : 0.6;
    double alpha = (argc > 2) ? std::atof(argv[2]) : pi;
    NormalizedGuide g(r, alpha);
    GuideReport rep = analyze_guide(g, FocalLengthOptions{300, 600, 10, 5e-3});
    std::printf("# r=%g alpha=%g beta=%g type=%s c=%g tau_bound=%g tau_numeric=%g\n", r, alpha,
                g.beta_bar, to_string(rep.type), rep.c_tilde, rep.tau_bound, rep.tau_numeric);
    std::printf("# theta delta dprime n1 chi tau1 tau2\n");
    for (int i = 1; i < 400; ++i) {
        double theta = pi * i / 400.0;
        if (std::abs(theta - g.beta_bar) < 2e-3 || std::abs(theta - (pi - g.beta_bar)) < 2e-3 ||
            std::abs(theta - 0.5 * pi) < 2e-3)
            continue;
        Passage p = advance(g, 0.25 * std::abs(delta(g, theta)), theta);
        if (p.status != AdvanceStatus::ok || !p.entering) continue;
        TransferMap tm = transfer_map(g, p);
        std::printf("%.6f %.6f %.6f %d %.6f %.6f %.6f\n", theta, delta(g, theta),
                    delta_prime(g, theta), p.n1, chi(g, p), tm.tau1, tm.tau2);
    }
    return 0;
}
