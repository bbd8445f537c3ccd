#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ratingraph/graph.hpp"

namespace ratingraph {

// Numeric-keyed histogram; bins are sorted by key. For degree and per-edge
// ratings the key is the exact discrete value; for rating averages it is the
// left edge of a 0.25-wide bin over [1, 5].
struct Histogram {
    std::vector<std::pair<double, uint64_t>> bins;

    uint64_t total() const {
        uint64_t t = 0;
        for (const auto& [k, c] : bins) t += c;
        return t;
    }
};

// Calendar-keyed histogram ("YYYY-MM-DD" or "YYYY-MM"), chronological.
struct TimeHistogram {
    std::vector<std::pair<std::string, uint64_t>> bins;
};

enum class Side { users, businesses };
enum class RatingMode { per_edge, per_user_average, per_business_average };
enum class TimeBin { day, month };

Histogram degree_histogram(const BipartiteGraph& g, Side side);
Histogram rating_histogram(const BipartiteGraph& g, RatingMode mode);

// Connected-component sizes of the undirected view, descending. (The graph is
// undirected, so strongly connected components coincide with these.)
std::vector<uint64_t> component_sizes(const BipartiteGraph& g);

TimeHistogram reviews_over_time(std::span<const ReviewEdge> edges, TimeBin bin);

// Least-squares slope of log(count) against log(key) over bins with
// count >= min_count and key > 0; degree histograms of power-law graphs give
// roughly -gamma. Throws StatError with fewer than two usable bins.
double log_log_slope(const Histogram& h, uint64_t min_count = 1);

// Sample stddev / mean of the bin counts; the uniformity figure quoted for
// review volume over time.
double coefficient_of_variation(const TimeHistogram& h);

void write_histogram_csv(const std::string& path, const Histogram& h);
void write_time_histogram_csv(const std::string& path, const TimeHistogram& h);
void write_components_csv(const std::string& path, std::span<const uint64_t> sizes);

}  // namespace ratingraph
