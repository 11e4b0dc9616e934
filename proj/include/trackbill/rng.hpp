#ifndef TRACKBILL_RNG_HPP
#define TRACKBILL_RNG_HPP

#include <cstdint>
#include <cmath>

namespace trackbill {

/// Counter-based 64-bit generator (SplitMix64). A stream is identified by a
/// seed; the n-th draw is a pure function of (seed, n), so runs are
/// reproducible across platforms and the sequence can be partitioned without
/// shared state.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    std::uint64_t state_;
};

/// Kahan accumulator for long sums of logarithms.
class CompensatedSum {
public:
    void add(double x) {
        double y = x - carry_;
        double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

} // namespace trackbill

#endif
