#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>

namespace deeprat::rng {

// One splitmix64 mixing round. Used to derive independent stream seeds;
// the streams themselves are mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic sub-stream seed from a master seed and up to three salts.
// Evaluation-order independent: substream(s, a, b) depends only on (s, a, b),
// which is what makes per-link / per-agent parallel draws bit-identical to
// the serial schedule.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h + a);
    h = splitmix64(h + b);
    h = splitmix64(h + c);
    return h;
}

// mt19937_64 wrapper with explicit, fully-specified transforms. The stdlib
// distributions are implementation-defined, so they are not used anywhere
// reproducibility matters.
class Stream {
public:
    explicit Stream(std::uint64_t seed = 0) : eng_(seed) {}

    // Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Standard normal via Box-Muller (cosine branch only, no cached state).
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n), rejection-sampled (no modulo bias).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    std::mt19937_64& engine() { return eng_; }

    void save(std::ostream& os) const { os << eng_; }
    void load(std::istream& is) { is >> eng_; }

    friend bool operator==(const Stream& a, const Stream& b) { return a.eng_ == b.eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace deeprat::rng
