#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace ratingraph {

// Deterministic random source. mt19937_64 has a fully specified sequence, and
// every mapping below is written out explicitly because the std::*_distribution
// classes are implementation-defined and would break seed reproducibility.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); rejection sampled, no modulo bias.
    uint64_t below(uint64_t n) {
        if (n <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

    // Uniform integer in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
    }

    // Standard normal via Box-Muller; the spare half of each pair is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates with the explicit bounded sampler above.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    // Independent child stream, e.g. one per forest tree or worker.
    Rng fork(uint64_t stream) const {
        return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x51ed2701a7f3c9b5ULL)));
    }

    static uint64_t splitmix64(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ratingraph
