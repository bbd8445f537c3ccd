#include "ratingraph/netstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "ratingraph/ingest.hpp"

namespace ratingraph {

namespace {

Histogram from_counts(const std::map<double, uint64_t>& counts) {
    Histogram h;
    h.bins.assign(counts.begin(), counts.end());
    return h;
}

// 0.25-wide bins over [1, 5]; 5.0 falls into the last bin.
double average_bin(double v) {
    double left = 1.0 + std::floor((v - 1.0) / 0.25) * 0.25;
    if (left > 4.75) left = 4.75;
    return left;
}

}  // namespace

Histogram degree_histogram(const BipartiteGraph& g, Side side) {
    if (g.empty()) throw StatError("degree histogram of an empty graph");
    std::map<double, uint64_t> counts;
    if (side == Side::users) {
        for (uint32_t u = 0; u < g.user_space(); ++u) {
            if (g.has_user(u)) ++counts[static_cast<double>(g.user_degree(u))];
        }
    } else {
        for (uint32_t b = 0; b < g.business_space(); ++b) {
            if (g.has_business(b)) ++counts[static_cast<double>(g.business_degree(b))];
        }
    }
    return from_counts(counts);
}

Histogram rating_histogram(const BipartiteGraph& g, RatingMode mode) {
    if (g.empty()) throw StatError("rating histogram of an empty graph");
    std::map<double, uint64_t> counts;
    switch (mode) {
        case RatingMode::per_edge:
            for (uint32_t u = 0; u < g.user_space(); ++u) {
                if (!g.has_user(u)) continue;
                for (const auto& e : g.user_neighbors(u)) ++counts[static_cast<double>(e.stars)];
            }
            break;
        case RatingMode::per_user_average:
            for (uint32_t u = 0; u < g.user_space(); ++u) {
                if (g.has_user(u)) ++counts[average_bin(g.avg_rating_given(u))];
            }
            break;
        case RatingMode::per_business_average:
            for (uint32_t b = 0; b < g.business_space(); ++b) {
                if (g.has_business(b)) ++counts[average_bin(g.avg_rating_received(b))];
            }
            break;
    }
    return from_counts(counts);
}

std::vector<uint64_t> component_sizes(const BipartiteGraph& g) {
    if (g.empty()) throw StatError("component sizes of an empty graph");
    const std::size_t total = static_cast<std::size_t>(g.user_space()) + g.business_space();

    // Union-find over the combined id space.
    std::vector<uint32_t> parent(total);
    std::iota(parent.begin(), parent.end(), 0u);
    const auto find = [&](uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (uint32_t u = 0; u < g.user_space(); ++u) {
        if (!g.has_user(u)) continue;
        for (const auto& e : g.user_neighbors(u)) {
            const uint32_t a = find(u);
            const uint32_t b = find(g.user_space() + e.node);
            if (a != b) parent[a] = b;
        }
    }

    std::map<uint32_t, uint64_t> sizes;
    for (uint32_t u = 0; u < g.user_space(); ++u) {
        if (g.has_user(u)) ++sizes[find(u)];
    }
    for (uint32_t b = 0; b < g.business_space(); ++b) {
        if (g.has_business(b)) ++sizes[find(g.user_space() + b)];
    }
    std::vector<uint64_t> out;
    out.reserve(sizes.size());
    for (const auto& [root, size] : sizes) out.push_back(size);
    std::sort(out.rbegin(), out.rend());
    return out;
}

TimeHistogram reviews_over_time(std::span<const ReviewEdge> edges, TimeBin bin) {
    std::map<std::string, uint64_t> counts;
    char buf[16];
    for (const auto& e : edges) {
        const CivilDateTime c = civil_from_timestamp(e.timestamp);
        if (bin == TimeBin::day) {
            std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
        } else {
            std::snprintf(buf, sizeof(buf), "%04d-%02d", c.year, c.month);
        }
        ++counts[buf];
    }
    TimeHistogram h;
    h.bins.assign(counts.begin(), counts.end());
    return h;
}

double log_log_slope(const Histogram& h, uint64_t min_count) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (const auto& [k, c] : h.bins) {
        if (k <= 0.0 || c < min_count) continue;
        const double x = std::log(k);
        const double y = std::log(static_cast<double>(c));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw StatError("log-log slope needs at least two usable bins");
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (denom == 0.0) throw StatError("log-log slope: degenerate x values");
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

double coefficient_of_variation(const TimeHistogram& h) {
    if (h.bins.empty()) throw StatError("coefficient of variation of an empty histogram");
    double sum = 0.0;
    for (const auto& [k, c] : h.bins) sum += static_cast<double>(c);
    const double m = sum / static_cast<double>(h.bins.size());
    if (m == 0.0) return 0.0;
    double ss = 0.0;
    for (const auto& [k, c] : h.bins) {
        const double d = static_cast<double>(c) - m;
        ss += d * d;
    }
    const double var = h.bins.size() > 1 ? ss / static_cast<double>(h.bins.size() - 1) : 0.0;
    return std::sqrt(var) / m;
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "key,count\n";
    char buf[40];
    for (const auto& [k, c] : h.bins) {
        std::snprintf(buf, sizeof(buf), "%.17g", k);
        out << buf << ',' << c << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_time_histogram_csv(const std::string& path, const TimeHistogram& h) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "key,count\n";
    for (const auto& [k, c] : h.bins) out << k << ',' << c << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_components_csv(const std::string& path, std::span<const uint64_t> sizes) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "component_rank,size\n";
    for (std::size_t i = 0; i < sizes.size(); ++i) out << (i + 1) << ',' << sizes[i] << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace ratingraph
