#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace enr {

// Counter-based generator: output i of stream s under seed k is
// mix(key(k, s) + i * PHI) where mix is the SplitMix64 finalizer and PHI the
// 64-bit golden-ratio constant. State is (key, counter), so draws are
// reproducible bit-for-bit from (seed, stream) on any platform and streams
// are independent by key separation.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(mix(seed ^ 0x5851F42D4C957F2DULL) ^ mix(stream * PHI + 0x14057B7EF767814FULL))),
          ctr_(0) {}

    std::uint64_t next_u64() { return mix(key_ + (ctr_++) * PHI); }

    // Uniform double in [0,1) with 53 random bits.
    double next_u01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), n >= 1. Unbiased via rejection on the top range.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::domain_error("RngStream: next_below(0)");
        std::uint64_t limit = n * ((~std::uint64_t(0)) / n);
        std::uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % n;
    }

    bool next_bernoulli(double p) { return next_u01() < p; }

    double next_exp1() {
        double u;
        do { u = next_u01(); } while (u <= 0.0);
        return -std::log(u);
    }

    // Poisson by inversion; all rates used here are O(1).
    unsigned next_poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda > 50.0) throw std::domain_error("RngStream: poisson rate too large for inversion");
        double p = std::exp(-lambda), cdf = p, u = next_u01();
        unsigned k = 0;
        while (u > cdf) {
            ++k;
            p *= lambda / k;
            cdf += p;
            if (k > 2000) break;
        }
        return k;
    }

    // Index draw from unnormalized weights (linear scan; tables here are small
    // or scanned boustrophedonically by the caller).
    std::size_t next_index(const std::vector<double>& w, double total) {
        double u = next_u01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            acc += w[i];
            if (u < acc) return i;
        }
        return w.empty() ? 0 : w.size() - 1;
    }

    std::uint64_t counter() const { return ctr_; }

private:
    static constexpr std::uint64_t PHI = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30; z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27; z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
};

} // namespace enr
