#ifndef TRACKBILL_TRACKFILE_HPP
#define TRACKBILL_TRACKFILE_HPP

// Line-oriented track description format, version 1.
//
//   # comment
//   version 1
//   dim 2|3
//   halfwidth <float>          (dim 2)
//   section <a> <b>            (dim 3)
//   guide arc radius=<R> angle=<rad> turn=left|right [roll=<deg>]
//   guide straight length=<l>
//
// Unknown directives and keys are errors (the format is version-gated).
// Floats are emitted as shortest round-trip decimals, so serializing and
// reparsing reproduces the spec bit for bit.

#include <charconv>
#include <cstdlib>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trackbill/errors.hpp"
#include "trackbill/track.hpp"

namespace trackbill {

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] inline void parse_fail(int lineno, const std::string& msg) {
    throw TrackError(ErrorCode::parse_error,
                     "line " + std::to_string(lineno) + ": " + msg);
}

inline double parse_float(const std::string& s, int lineno) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size()) parse_fail(lineno, "malformed number '" + s + "'");
    return v;
}

struct KeyVal {
    std::string key, val;
};

inline KeyVal parse_keyval(const std::string& tok, int lineno) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) parse_fail(lineno, "expected key=value, got '" + tok + "'");
    return {tok.substr(0, eq), tok.substr(eq + 1)};
}

} // namespace detail

/// Parse a version-1 track file. Errors carry the offending line number.
inline TrackSpec parse_track_file(const std::string& text) {
    TrackSpec spec;
    bool have_version = false, have_dim = false, have_halfwidth = false, have_section = false;
    int lineno = 0;
    std::istringstream stream(text);
    std::string raw;
    while (std::getline(stream, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        std::string line = (hash == std::string::npos) ? raw : raw.substr(0, hash);
        auto toks = detail::split_ws(line);
        if (toks.empty()) continue;
        const std::string& head = toks[0];

        if (head == "version") {
            if (have_version) detail::parse_fail(lineno, "duplicate version directive");
            if (toks.size() != 2 || toks[1] != "1")
                detail::parse_fail(lineno, "unsupported version (expected 1)");
            have_version = true;
        } else if (head == "dim") {
            if (!have_version) detail::parse_fail(lineno, "version must come first");
            if (have_dim) detail::parse_fail(lineno, "duplicate dim directive");
            if (toks.size() != 2 || (toks[1] != "2" && toks[1] != "3"))
                detail::parse_fail(lineno, "dim must be 2 or 3");
            spec.dimension = (toks[1] == "2") ? 2 : 3;
            have_dim = true;
        } else if (head == "halfwidth") {
            if (!have_dim || spec.dimension != 2)
                detail::parse_fail(lineno, "halfwidth requires dim 2");
            if (have_halfwidth) detail::parse_fail(lineno, "duplicate halfwidth");
            if (toks.size() != 2) detail::parse_fail(lineno, "halfwidth takes one value");
            spec.halfwidth = detail::parse_float(toks[1], lineno);
            have_halfwidth = true;
        } else if (head == "section") {
            if (!have_dim || spec.dimension != 3)
                detail::parse_fail(lineno, "section requires dim 3");
            if (have_section) detail::parse_fail(lineno, "duplicate section");
            if (toks.size() != 3) detail::parse_fail(lineno, "section takes two values");
            spec.section_a = detail::parse_float(toks[1], lineno);
            spec.section_b = detail::parse_float(toks[2], lineno);
            have_section = true;
        } else if (head == "guide") {
            if (!have_dim) detail::parse_fail(lineno, "guide before dim");
            if (toks.size() < 2) detail::parse_fail(lineno, "guide needs a kind");
            const std::string& kind = toks[1];
            GuideSpec g;
            bool have_radius = false, have_angle = false, have_turn = false,
                 have_length = false;
            for (size_t i = 2; i < toks.size(); ++i) {
                auto kv = detail::parse_keyval(toks[i], lineno);
                if (kind == "arc" && kv.key == "radius") {
                    g.radius = detail::parse_float(kv.val, lineno);
                    have_radius = true;
                } else if (kind == "arc" && kv.key == "angle") {
                    g.angle = detail::parse_float(kv.val, lineno);
                    have_angle = true;
                } else if (kind == "arc" && kv.key == "turn") {
                    if (kv.val == "left")
                        g.turn = +1;
                    else if (kv.val == "right")
                        g.turn = -1;
                    else
                        detail::parse_fail(lineno, "turn must be left or right");
                    have_turn = true;
                } else if (kind == "arc" && kv.key == "roll") {
                    if (spec.dimension != 3)
                        detail::parse_fail(lineno, "roll is only valid with dim 3");
                    g.roll = detail::parse_float(kv.val, lineno) * pi / 180.0;
                } else if (kind == "straight" && kv.key == "length") {
                    g.length = detail::parse_float(kv.val, lineno);
                    have_length = true;
                } else {
                    detail::parse_fail(lineno, "unknown key '" + kv.key + "' for guide " + kind);
                }
            }
            if (kind == "arc") {
                if (!have_radius || !have_angle || !have_turn)
                    detail::parse_fail(lineno, "arc guide needs radius, angle and turn");
                g.kind = GuideSpec::Kind::circular;
            } else if (kind == "straight") {
                if (!have_length) detail::parse_fail(lineno, "straight guide needs length");
                g.kind = GuideSpec::Kind::straight;
            } else {
                detail::parse_fail(lineno, "unknown guide kind '" + kind + "'");
            }
            spec.guides.push_back(g);
        } else {
            detail::parse_fail(lineno, "unknown directive '" + head + "'");
        }
    }
    if (!have_version) throw TrackError(ErrorCode::parse_error, "missing version directive");
    if (!have_dim) throw TrackError(ErrorCode::parse_error, "missing dim directive");
    if (spec.dimension == 2 && !have_halfwidth)
        throw TrackError(ErrorCode::parse_error, "missing halfwidth directive");
    if (spec.dimension == 3 && !have_section)
        throw TrackError(ErrorCode::parse_error, "missing section directive");
    if (spec.guides.empty()) throw TrackError(ErrorCode::parse_error, "no guides");
    return spec;
}

/// Canonical serialization: fixed directive order, fixed key order, shortest
/// round-trip floats, comments dropped.
inline std::string serialize_track_spec(const TrackSpec& spec) {
    std::ostringstream os;
    os << "version 1\n";
    os << "dim " << spec.dimension << "\n";
    if (spec.dimension == 2)
        os << "halfwidth " << format_double(spec.halfwidth) << "\n";
    else
        os << "section " << format_double(spec.section_a) << " "
           << format_double(spec.section_b) << "\n";
    for (const GuideSpec& g : spec.guides) {
        if (g.kind == GuideSpec::Kind::circular) {
            os << "guide arc radius=" << format_double(g.radius)
               << " angle=" << format_double(g.angle)
               << " turn=" << (g.turn > 0 ? "left" : "right");
            if (spec.dimension == 3)
                os << " roll=" << format_double(g.roll * 180.0 / pi);
            os << "\n";
        } else {
            os << "guide straight length=" << format_double(g.length) << "\n";
        }
    }
    return os.str();
}

} // namespace trackbill

#endif
