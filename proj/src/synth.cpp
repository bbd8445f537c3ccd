#include "ratingraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ratingraph/ingest.hpp"
#include "ratingraph/rng.hpp"

namespace ratingraph {

namespace {

// Inverse-CDF sampler for P(k) ~ k^-gamma on {1..k_max}.
class PowerLawSampler {
public:
    PowerLawSampler(double gamma, uint32_t k_max) : cdf_(k_max) {
        double total = 0.0;
        for (uint32_t k = 1; k <= k_max; ++k) {
            total += std::pow(static_cast<double>(k), -gamma);
            cdf_[k - 1] = total;
        }
        for (double& c : cdf_) c /= total;
        cdf_.back() = 1.0;
    }

    uint32_t sample(Rng& rng) const {
        const double u = rng.uniform();
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<uint32_t>(it - cdf_.begin()) + 1;
    }

private:
    std::vector<double> cdf_;
};

std::vector<uint32_t> slot_list(uint32_t n_nodes, uint64_t n_slots, const PowerLawSampler& deg,
                                Rng& rng) {
    std::vector<uint32_t> slots;
    slots.reserve(n_slots + n_nodes);
    for (uint32_t v = 0; v < n_nodes; ++v) {
        const uint32_t d = deg.sample(rng);
        for (uint32_t i = 0; i < d; ++i) slots.push_back(v);
    }
    rng.shuffle(slots);
    if (slots.size() > n_slots) {
        slots.resize(n_slots);
    } else {
        while (slots.size() < n_slots) slots.push_back(static_cast<uint32_t>(rng.below(n_nodes)));
    }
    return slots;
}

int32_t sample_stars(const std::array<double, 5>& cdf, Rng& rng) {
    const double u = rng.uniform();
    for (int k = 0; k < 5; ++k) {
        if (u < cdf[static_cast<std::size_t>(k)]) return k + 1;
    }
    return 5;
}

}  // namespace

std::vector<ReviewEdge> generate(const SynthConfig& cfg) {
    if (cfg.n_users == 0 || cfg.n_businesses == 0) throw ConfigError("synth: node counts must be positive");
    if (cfg.n_edges == 0) throw ConfigError("synth: edge count must be positive");
    if (cfg.n_edges > static_cast<uint64_t>(cfg.n_users) * cfg.n_businesses)
        throw ConfigError("synth: more edges requested than user x business pairs exist");
    if (!(cfg.gamma > 1.0)) throw ConfigError("synth: gamma must be > 1");
    if (cfg.t_max < cfg.t_min) throw ConfigError("synth: t_max must be >= t_min");
    double psum = 0.0;
    for (const double p : cfg.rating_probs) {
        if (p < 0.0) throw ConfigError("synth: rating probabilities must be >= 0");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-9) throw ConfigError("synth: rating probabilities must sum to 1");

    std::array<double, 5> rating_cdf{};
    double acc = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        acc += cfg.rating_probs[k];
        rating_cdf[k] = acc;
    }
    rating_cdf[4] = 1.0;

    Rng root(cfg.seed);
    Rng user_rng = root.fork(1);
    Rng business_rng = root.fork(2);
    Rng pair_rng = root.fork(3);
    Rng label_rng = root.fork(4);

    const PowerLawSampler user_deg(cfg.gamma, cfg.n_businesses);
    const PowerLawSampler business_deg(cfg.gamma, cfg.n_users);
    const std::vector<uint32_t> user_slots = slot_list(cfg.n_users, cfg.n_edges, user_deg, user_rng);
    const std::vector<uint32_t> business_slots =
        slot_list(cfg.n_businesses, cfg.n_edges, business_deg, business_rng);

    std::unordered_set<uint64_t> seen;
    seen.reserve(cfg.n_edges * 2);
    std::vector<ReviewEdge> edges;
    edges.reserve(cfg.n_edges);
    const auto key = [](uint32_t u, uint32_t b) {
        return (static_cast<uint64_t>(u) << 32) | b;
    };
    const auto emit = [&](uint32_t u, uint32_t b) {
        if (!seen.insert(key(u, b)).second) return false;
        ReviewEdge e;
        e.user = u;
        e.business = b;
        e.stars = sample_stars(rating_cdf, label_rng);
        e.timestamp = cfg.t_min + static_cast<int64_t>(label_rng.below(
                                      static_cast<uint64_t>(cfg.t_max - cfg.t_min) + 1));
        edges.push_back(e);
        return true;
    };

    for (uint64_t i = 0; i < cfg.n_edges; ++i) emit(user_slots[i], business_slots[i]);

    // Slots lost to duplicate pairs are refilled by rejection sampling, then
    // by a deterministic scan when the graph is nearly complete.
    uint64_t attempts = 0;
    const uint64_t max_attempts = 100 * cfg.n_edges + 1000;
    while (edges.size() < cfg.n_edges && attempts < max_attempts) {
        ++attempts;
        emit(static_cast<uint32_t>(pair_rng.below(cfg.n_users)),
             static_cast<uint32_t>(pair_rng.below(cfg.n_businesses)));
    }
    for (uint32_t u = 0; u < cfg.n_users && edges.size() < cfg.n_edges; ++u) {
        for (uint32_t b = 0; b < cfg.n_businesses && edges.size() < cfg.n_edges; ++b) {
            emit(u, b);
        }
    }

    sort_edges(edges);
    return edges;
}

FeatureMatrix generate_planted_linear(std::size_t n, const std::array<double, 9>& weights,
                                      double bias, double noise_sigma, bool clip, uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix m;
    m.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureRow& r = m.rows[i];
        r.user = static_cast<UserId>(i);
        r.business = static_cast<BusinessId>(i);
        double target = bias;
        for (std::size_t j = 0; j < 9; ++j) {
            r.features[j] = rng.normal();
            target += weights[j] * r.features[j];
        }
        if (noise_sigma > 0.0) target += noise_sigma * rng.normal();
        if (clip) target = std::clamp(target, 1.0, 5.0);
        r.target = target;
    }
    return m;
}

}  // namespace ratingraph
