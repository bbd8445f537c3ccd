#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ratingraph/features.hpp"

namespace ratingraph {

struct SynthConfig {
    uint32_t n_users = 1000;
    uint32_t n_businesses = 300;
    uint64_t n_edges = 5000;
    double gamma = 2.5;  // degree exponent, P(k) ~ k^-gamma
    // Skewed toward 3-5 stars; a fixture default, not a measured statistic.
    std::array<double, 5> rating_probs{0.05, 0.10, 0.20, 0.30, 0.35};
    int64_t t_min = 1400000000;
    int64_t t_max = 1500000000;
    uint64_t seed = 1;
};

// Seed-deterministic bipartite configuration model: degrees on both sides are
// sampled from the truncated discrete power law, slot lists are matched, and
// duplicate pairs are replaced by rejection sampling. Output is deduplicated
// and sorted by (timestamp, user, business). Infeasible edge counts throw
// ConfigError.
std::vector<ReviewEdge> generate(const SynthConfig& cfg);

// Test oracle for the model zoo: standard-normal features, targets
// w . x + bias + N(0, sigma), optionally clipped to [1, 5].
FeatureMatrix generate_planted_linear(std::size_t n, const std::array<double, 9>& weights,
                                      double bias, double noise_sigma, bool clip, uint64_t seed);

}  // namespace ratingraph
