// Command-line front end: validate track files, run orbits, estimate
// Lyapunov exponents, certify cone invariance, and emit Poincare sections.
// Exit codes: 0 pass, 1 validation/gate failure, 2 parse or IO error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "trackbill/dynamics.hpp"
#include "trackbill/io.hpp"
#include "trackbill/tangent.hpp"
#include "trackbill/track.hpp"
#include "trackbill/track3d.hpp"
#include "trackbill/trackfile.hpp"

using namespace trackbill;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_gate = 1;
constexpr int exit_parse = 2;

TrackSpec load_spec(const std::string& path) {
    return parse_track_file(read_file(path));
}

std::string verdict_name(HVerdict v) {
    switch (v) {
        case HVerdict::satisfied: return "satisfied";
        case HVerdict::violated: return "violated";
        default: return "unclassified";
    }
}

// ---------------------------------------------------------------------- validate

int cmd_validate(const std::string& file, int grid, const std::string& emit_normalized) {
    TrackSpec spec = load_spec(file);
    std::string canon = serialize_track_spec(spec);
    if (!emit_normalized.empty()) write_file_atomic(emit_normalized, canon);

    FocalLengthOptions opt;
    opt.positions = grid;
    opt.angles = grid;

    if (spec.dimension == 2) {
        TrackGeometry geo = build_track(spec);
        std::printf("track: dim 2, halfwidth %s, %zu guides, boundary length %s\n",
                    format_double(spec.halfwidth).c_str(), spec.guides.size(),
                    format_double(geo.boundary_length()).c_str());
        auto reps = analyze_track(geo, opt);
        for (const GuideReport& r : reps) {
            std::printf("guide %d: arc r1=%s r=%s beta=%s type=%s", r.guide_index,
                        format_double(r.outer_radius).c_str(), format_double(r.r).c_str(),
                        format_double(r.beta_bar).c_str(), to_string(r.type));
            if (r.classified())
                std::printf(" c=%s tau_bound=%s tau_numeric=%s (physical %s / %s)",
                            format_double(r.c_tilde).c_str(),
                            format_double(r.tau_bound).c_str(),
                            format_double(r.tau_numeric).c_str(),
                            format_double(r.tau_bound_physical()).c_str(),
                            format_double(r.tau_numeric_physical()).c_str());
            std::printf("\n");
        }
        ConditionHReport h = check_condition_h(geo, reps);
        for (const HMargin& m : h.margins)
            std::printf("straights from guide %d (length %s): margin_bound=%s "
                        "margin_numeric=%s\n",
                        m.first_straight, format_double(m.length).c_str(),
                        format_double(m.margin_bound).c_str(),
                        format_double(m.margin_numeric).c_str());
        std::printf("condition H by bound: %s\n", verdict_name(h.by_bound).c_str());
        std::printf("condition H by numeric tau: %s\n", verdict_name(h.by_numeric).c_str());
        return h.certified() ? exit_pass : exit_gate;
    }

    Track3Geometry geo = build_track3d(spec);
    std::printf("track: dim 3, section %s x %s, %zu guides, %zu walls\n",
                format_double(spec.section_a).c_str(), format_double(spec.section_b).c_str(),
                spec.guides.size(), geo.walls.size());
    auto reps = analyze_track3(geo, opt);
    for (const Guide3Report& r : reps) {
        if (!r.product) {
            std::printf("guide %d: cylindrical, no product structure (slanted roll), "
                        "uncertified\n",
                        r.guide_index);
            continue;
        }
        std::printf("guide %d: cylindrical factor r1=%s r=%s type=%s", r.guide_index,
                    format_double(r.factor.outer_radius).c_str(),
                    format_double(r.factor.r).c_str(), to_string(r.factor.type));
        if (r.factor.classified())
            std::printf(" c=%s tau_bound_physical=%s tau_numeric_physical=%s",
                        format_double(r.factor.c_tilde).c_str(),
                        format_double(r.factor.tau_bound_physical()).c_str(),
                        format_double(r.factor.tau_numeric_physical()).c_str());
        std::printf("\n");
    }
    ConditionH3Report h = check_condition_h3(geo, reps);
    for (const HMargin& m : h.margins)
        std::printf("straights from guide %d (length %s): margin_bound=%s\n", m.first_straight,
                    format_double(m.length).c_str(), format_double(m.margin_bound).c_str());
    std::printf("distance clause: %s\n", verdict_name(h.distances).c_str());
    std::printf("twisted pairs: %zu\n", h.twisted.size());
    for (const TwistedPair& t : h.twisted)
        std::printf("  guides %d and %d lie on orthogonal bending planes\n", t.guide_a,
                    t.guide_b);
    if (h.satisfied()) {
        std::printf("condition: satisfied\n");
        return exit_pass;
    }
    std::printf("condition: violated (%s)\n", h.reason.c_str());
    return exit_gate;
}

// ---------------------------------------------------------------------- simulate

int cmd_simulate(const std::string& file, std::uint64_t seed, long steps,
                 const std::string& out, const std::string& svg, const std::string& direction) {
    TrackSpec spec = load_spec(file);
    Rotation side = (direction == "L") ? Rotation::L : Rotation::R;
    if (spec.dimension == 2) {
        TrackGeometry geo = build_track(spec);
        SplitMix64 rng(seed);
        CollisionState x0 = sample_state(geo, rng, side);
        OrbitTrace tr = run_orbit(geo, x0, steps);
        write_file_atomic(out, orbit_csv(tr));
        if (!svg.empty()) write_file_atomic(svg, track_svg(geo, &tr));
        std::printf("steps completed: %ld, termination: %s, max renorm: %s\n",
                    tr.steps_completed, termination_label(tr.termination),
                    format_double(tr.max_renorm).c_str());
        return exit_pass;
    }
    if (!svg.empty())
        throw TrackError(ErrorCode::unsupported, "svg rendering is 2-D only");
    Track3Geometry geo = build_track3d(spec);
    SplitMix64 rng(seed);
    Collision3 x = sample_state3(geo, rng);
    double want = (side == Rotation::R) ? +1.0 : -1.0;
    while (v_star3(geo, x) * want <= 0.0) x = sample_state3(geo, rng);

    std::ostringstream os;
    os << "step,wall,s,theta,x,y,z,t_flight,vstar,vz,roll_frame\n";
    StepStatus termination = StepStatus::ok;
    long completed = 0;
    auto emit = [&](long i, const Collision3& c, double flight) {
        const Wall3& w = geo.walls[c.wall];
        auto chart = detail::to_chart(w, c);
        Vec3 nrm = (w.kind == Wall3::Kind::revolution) ? w.revolution_normal(c.q) : w.n;
        double theta_n = std::acos(std::clamp(dot(c.v, nrm), -1.0, 1.0));
        double roll_deg = geo.spec.guides[c.guide].roll * 180.0 / pi;
        os << i << ',' << c.wall << ',' << format_double(chart[0]) << ','
           << format_double(theta_n) << ',' << format_double(c.q.x) << ','
           << format_double(c.q.y) << ',' << format_double(c.q.z) << ','
           << format_double(flight) << ',' << format_double(v_star3(geo, c)) << ','
           << format_double(c.v.z) << ',' << format_double(roll_deg) << '\n';
    };
    emit(0, x, 0.0);
    for (long i = 1; i <= steps; ++i) {
        Step3Result r = step3(geo, x);
        if (r.status != StepStatus::ok) {
            termination = r.status;
            break;
        }
        x = r.next;
        ++completed;
        emit(i, x, r.flight);
    }
    os << "# termination: " << termination_label(termination) << '\n';
    write_file_atomic(out, os.str());
    std::printf("steps completed: %ld, termination: %s\n", completed,
                termination_label(termination));
    return exit_pass;
}

// ---------------------------------------------------------------------- lyapunov

int cmd_lyapunov(const std::string& file, const std::vector<double>& annulus, int seeds,
                 long steps, const std::string& out, double min_lambda, long report_every) {
    std::ostringstream os;
    bool gate_ok = true;

    if (!annulus.empty() || file.empty()) {
        if (annulus.size() != 2)
            throw TrackError(ErrorCode::parse_error, "--annulus needs RADIUS HALFWIDTH");
        TrackGeometry geo = make_annulus(annulus[0], annulus[1]);
        os << "seed,step,lambda1\n";
        for (int sd = 0; sd < seeds; ++sd) {
            SplitMix64 rng(1000 + sd);
            CollisionState x0 = sample_state(geo, rng, Rotation::R);
            LyapunovRun run = lyapunov(geo, x0, steps, 77 + sd, report_every);
            for (auto& [st, lam] : run.series)
                os << sd << ',' << st << ',' << format_double(lam) << '\n';
            std::printf("seed %d: lambda1 = %s over %ld steps\n", sd,
                        format_double(run.lambda).c_str(), run.steps);
            if (std::abs(run.lambda) >= 5e-3) {
                gate_ok = false;
                std::printf("  gate failure: integrable baseline exceeded 5e-3\n");
            }
        }
        write_file_atomic(out, os.str());
        return gate_ok ? exit_pass : exit_gate;
    }

    TrackSpec spec = load_spec(file);
    if (spec.dimension == 2) {
        TrackGeometry geo = build_track(spec);
        os << "seed,step,lambda1\n";
        for (int sd = 0; sd < seeds; ++sd) {
            SplitMix64 rng(1000 + sd);
            CollisionState x0 = sample_state(geo, rng, Rotation::R);
            LyapunovRun run = lyapunov(geo, x0, steps, 77 + sd, report_every);
            for (auto& [st, lam] : run.series)
                os << sd << ',' << st << ',' << format_double(lam) << '\n';
            std::printf("seed %d: lambda1 = %s over %ld steps%s\n", sd,
                        format_double(run.lambda).c_str(), run.steps,
                        run.terminated_early ? " (terminated early)" : "");
            if (run.lambda <= min_lambda) {
                gate_ok = false;
                std::printf("  gate failure: lambda1 <= %s\n",
                            format_double(min_lambda).c_str());
            }
            if (run.steps >= 10000 && run.series.size() >= 10) {
                double lam_final = run.lambda;
                double lam_decade = 0.0;
                for (auto& [st, lam] : run.series)
                    if (st <= run.steps / 10) lam_decade = lam;
                if (std::abs(lam_final - lam_decade) > 0.1 * std::abs(lam_final)) {
                    gate_ok = false;
                    std::printf("  gate failure: estimate not plateaued (%s -> %s)\n",
                                format_double(lam_decade).c_str(),
                                format_double(lam_final).c_str());
                }
            }
        }
        write_file_atomic(out, os.str());
        return gate_ok ? exit_pass : exit_gate;
    }

    Track3Geometry geo = build_track3d(spec);
    os << "seed,step,lambda1,lambda2,lambda3,lambda4\n";
    for (int sd = 0; sd < seeds; ++sd) {
        SplitMix64 rng(1000 + sd);
        Collision3 x = sample_state3(geo, rng);
        while (std::abs(v_star3(geo, x)) < 0.05) x = sample_state3(geo, rng);
        Spectrum3Run run = lyapunov_spectrum3d(geo, x, steps, report_every);
        for (auto& row : run.series) {
            os << sd << ',' << static_cast<long>(row[0]);
            for (int k = 1; k <= 4; ++k) os << ',' << format_double(row[k]);
            os << '\n';
        }
        std::printf("seed %d: lambda = [%s, %s, %s, %s] over %ld steps (skipped %ld)\n", sd,
                    format_double(run.lambda[0]).c_str(), format_double(run.lambda[1]).c_str(),
                    format_double(run.lambda[2]).c_str(), format_double(run.lambda[3]).c_str(),
                    run.steps, run.skipped);
        if (run.lambda[0] <= min_lambda) {
            gate_ok = false;
            std::printf("  gate failure: lambda1 <= %s\n", format_double(min_lambda).c_str());
        }
    }
    write_file_atomic(out, os.str());
    return gate_ok ? exit_pass : exit_gate;
}

// ---------------------------------------------------------------------- cones

int cmd_cones(const std::string& file, int samples, std::uint64_t seed, const std::string& out,
              bool numeric_tau, const std::string& hist, int grid) {
    TrackSpec spec = load_spec(file);
    if (spec.dimension != 2)
        throw TrackError(ErrorCode::unsupported, "cone certification is 2-D only");
    TrackGeometry geo = build_track(spec);
    FocalLengthOptions opt;
    opt.positions = grid;
    opt.angles = grid;
    auto reps = analyze_track(geo, opt);
    ConditionHReport h = check_condition_h(geo, reps);
    std::printf("condition H by bound: %s, by numeric tau: %s\n",
                verdict_name(h.by_bound).c_str(), verdict_name(h.by_numeric).c_str());

    ConeCertificate cert = verify_strict_invariance(geo, reps, samples, seed, numeric_tau,
                                                    /*keep_samples=*/true);
    std::ostringstream os;
    os << "sample,guide,s,theta,margin\n";
    for (size_t i = 0; i < cert.samples.size(); ++i) {
        const ConeMarginSample& s = cert.samples[i];
        os << i << ',' << s.from.guide << ',' << format_double(s.from.s) << ','
           << format_double(s.from.theta) << ',' << format_double(s.margin) << '\n';
    }
    write_file_atomic(out, os.str());

    if (!hist.empty() && cert.evaluated > 0) {
        double lo = cert.min_margin, hi = cert.min_margin;
        for (const auto& s : cert.samples) {
            lo = std::min(lo, s.margin);
            hi = std::max(hi, s.margin);
        }
        int nbins = 40;
        std::vector<long> bins(nbins, 0);
        double width = (hi > lo) ? (hi - lo) / nbins : 1.0;
        for (const auto& s : cert.samples) {
            int b = std::min(nbins - 1, static_cast<int>((s.margin - lo) / width));
            ++bins[b];
        }
        std::ostringstream hs;
        hs << "bin_lo,bin_hi,count\n";
        for (int b = 0; b < nbins; ++b)
            hs << format_double(lo + b * width) << ',' << format_double(lo + (b + 1) * width)
               << ',' << bins[b] << '\n';
        write_file_atomic(hist, hs.str());
    }

    std::printf("evaluated %d samples (%d orbit terminations), min margin = %s\n",
                cert.evaluated, cert.terminated, format_double(cert.min_margin).c_str());
    if (!cert.all_positive) {
        for (const auto& s : cert.samples)
            if (s.margin <= 0.0)
                std::printf("  violation: guide %d s=%s theta=%s margin=%s\n", s.from.guide,
                            format_double(s.from.s).c_str(),
                            format_double(s.from.theta).c_str(),
                            format_double(s.margin).c_str());
        return exit_gate;
    }
    return cert.evaluated == samples ? exit_pass : exit_gate;
}

// ---------------------------------------------------------------------- poincare

int cmd_poincare(const std::string& file, const std::vector<double>& annulus, long steps,
                 std::uint64_t seed, const std::string& out) {
    TrackGeometry geo = annulus.empty()
                            ? build_track(load_spec(file))
                            : make_annulus(annulus[0], annulus[1]);
    SplitMix64 rng(seed);
    CollisionState x0 = sample_state(geo, rng, Rotation::R);
    OrbitTrace tr = run_orbit(geo, x0, steps);
    std::ostringstream os;
    os << "step,loop,s,costheta\n";
    for (size_t i = 0; i < tr.rows.size(); ++i)
        os << i << ',' << tr.rows[i].state.loop << ',' << format_double(tr.rows[i].state.s)
           << ',' << format_double(std::cos(tr.rows[i].state.theta)) << '\n';
    os << "# termination: " << termination_label(tr.termination) << '\n';
    write_file_atomic(out, os.str());
    std::printf("steps completed: %ld\n", tr.steps_completed);
    return exit_pass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification toolkit for track-shaped billiards"};
    app.require_subcommand(1);

    std::string file, out, svg, hist, emit_normalized, direction = "R", tau_mode = "bound";
    std::uint64_t seed = 1;
    long steps = 1000, report_every = 1000;
    int seeds = 20, samples = 10000, grid = 2000;
    double min_lambda = 0.0;
    std::vector<double> annulus;

    auto* v = app.add_subcommand("validate", "check a track file and its hyperbolicity condition");
    v->add_option("file", file)->required();
    v->add_option("--grid", grid, "focal-length grid resolution");
    v->add_option("--emit-normalized", emit_normalized, "write the canonical spec");

    auto* s = app.add_subcommand("simulate", "run one orbit and write its trace");
    s->add_option("file", file)->required();
    s->add_option("--seed", seed);
    s->add_option("--steps", steps);
    s->add_option("--out", out)->required();
    s->add_option("--svg", svg, "render track and trajectory (2-D only)");
    s->add_option("--direction", direction)->check(CLI::IsMember({"L", "R"}));

    auto* l = app.add_subcommand("lyapunov", "estimate Lyapunov exponents over a seed ensemble");
    l->add_option("file", file);
    l->add_option("--annulus", annulus, "integrable baseline: RADIUS HALFWIDTH")->expected(2);
    l->add_option("--seeds", seeds);
    l->add_option("--steps", steps);
    l->add_option("--out", out)->required();
    l->add_option("--min-lambda", min_lambda, "gate: exponents must exceed this");
    l->add_option("--report-every", report_every);

    auto* c = app.add_subcommand("cones", "certify strict invariance of the entering cone field");
    c->add_option("file", file)->required();
    c->add_option("--samples", samples);
    c->add_option("--seed", seed);
    c->add_option("--out", out)->required();
    c->add_option("--tau", tau_mode)->check(CLI::IsMember({"bound", "numeric"}));
    c->add_option("--hist", hist, "write a margin histogram");
    c->add_option("--grid", grid);

    auto* p = app.add_subcommand("poincare", "emit (s, cos theta) pairs of one orbit");
    p->add_option("file", file);
    p->add_option("--annulus", annulus, "integrable baseline: RADIUS HALFWIDTH")->expected(2);
    p->add_option("--steps", steps);
    p->add_option("--seed", seed);
    p->add_option("--out", out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (v->parsed()) return cmd_validate(file, grid, emit_normalized);
        if (s->parsed()) return cmd_simulate(file, seed, steps, out, svg, direction);
        if (l->parsed())
            return cmd_lyapunov(file, annulus, seeds, steps, out, min_lambda, report_every);
        if (c->parsed())
            return cmd_cones(file, samples, seed, out, tau_mode == "numeric", hist, grid);
        if (p->parsed()) return cmd_poincare(file, annulus, steps, seed, out);
    } catch (const TrackError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        bool io_or_parse = e.code() == ErrorCode::parse_error ||
                           e.code() == ErrorCode::io_error ||
                           e.code() == ErrorCode::unsupported;
        return io_or_parse ? exit_parse : exit_gate;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_parse;
    }
    return exit_parse;
}
