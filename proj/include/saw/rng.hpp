#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>

namespace saw {

// splitmix64 finalizer; used for seed expansion and stream derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with explicit, serializable state. All randomness in the
// library flows through this generator so that runs are reproducible
// bit-for-bit from a seed, independent of platform stdlib details.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& w : s_) {
            sm += 0x9e3779b97f4a7c15ULL;
            w = mix64(sm);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); multiply-shift mapping.
    std::uint64_t bounded(std::uint64_t n) {
        return std::uint64_t((static_cast<__uint128_t>(next()) * n) >> 64);
    }

    // Standard normal via the polar method; the spare variate is discarded
    // so the generator state is exactly the xoshiro words.
    double normal() {
        for (;;) {
            double u = 2.0 * uniform() - 1.0;
            double v = 2.0 * uniform() - 1.0;
            double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Derive an independent child stream from the current state and a tag.
    Rng child(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        std::uint64_t h = 0x6a09e667f3bcc908ULL;
        for (std::uint64_t w : {s_[0], s_[1], s_[2], s_[3], a, b, c}) h = mix64(h ^ w);
        return Rng(h);
    }

    void save(std::ostream& os) const {
        os << s_[0] << ' ' << s_[1] << ' ' << s_[2] << ' ' << s_[3];
    }
    static Rng restore(std::istream& is) {
        Rng r(0);
        is >> r.s_[0] >> r.s_[1] >> r.s_[2] >> r.s_[3];
        return r;
    }

    bool operator==(const Rng& o) const {
        return s_[0] == o.s_[0] && s_[1] == o.s_[1] && s_[2] == o.s_[2] && s_[3] == o.s_[3];
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace saw
