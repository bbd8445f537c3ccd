#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ratingraph/edge.hpp"

namespace ratingraph {

// One adjacency slot: neighbor handle plus the review it came from.
struct AdjEntry {
    uint32_t node = 0;
    int32_t stars = 0;
    int64_t timestamp = 0;

    friend bool operator==(const AdjEntry&, const AdjEntry&) = default;
};

// Immutable bipartite review graph. Both directions are stored as compressed
// adjacency (offset array + entry array) so feature kernels stream over
// contiguous memory; per-node rating sums are cached at build time.
//
// Ids live in a fixed id space [0, user_space) x [0, business_space); a node
// is *present* iff it has at least one edge. Lookups of absent or out-of-range
// ids throw NodeNotFoundError.
class BipartiteGraph {
public:
    BipartiteGraph() = default;

    // Edges must be deduplicated; a repeated (user, business) pair throws
    // ConstructionError, stars outside 1..5 throw ValidationError. Id spaces
    // default to max id + 1.
    static BipartiteGraph build(std::span<const ReviewEdge> edges,
                                uint32_t user_space = 0, uint32_t business_space = 0);

    uint32_t user_space() const { return static_cast<uint32_t>(uoff_.empty() ? 0 : uoff_.size() - 1); }
    uint32_t business_space() const { return static_cast<uint32_t>(boff_.empty() ? 0 : boff_.size() - 1); }

    uint32_t num_users() const { return n_users_; }
    uint32_t num_businesses() const { return n_businesses_; }
    uint64_t num_edges() const { return n_edges_; }
    bool empty() const { return n_edges_ == 0; }

    bool has_user(UserId u) const { return u < user_space() && uoff_[u + 1] > uoff_[u]; }
    bool has_business(BusinessId b) const { return b < business_space() && boff_[b + 1] > boff_[b]; }

    // Sorted by neighbor id.
    std::span<const AdjEntry> user_neighbors(UserId u) const;
    std::span<const AdjEntry> business_neighbors(BusinessId b) const;

    uint32_t user_degree(UserId u) const { return static_cast<uint32_t>(user_neighbors(u).size()); }
    uint32_t business_degree(BusinessId b) const { return static_cast<uint32_t>(business_neighbors(b).size()); }

    // Sum of incident stars (integer-exact).
    int64_t user_weighted_degree(UserId u) const;
    int64_t business_weighted_degree(BusinessId b) const;

    double avg_rating_given(UserId u) const;
    double avg_rating_received(BusinessId b) const;

    bool has_edge(UserId u, BusinessId b) const;

    // |E| / (present users x present businesses).
    double edge_density() const;

    // Materializes the edge set sorted by (user, business).
    std::vector<ReviewEdge> edges() const;

    friend bool operator==(const BipartiteGraph&, const BipartiteGraph&) = default;

private:
    std::vector<uint64_t> uoff_, boff_;
    std::vector<AdjEntry> uadj_, badj_;
    std::vector<int64_t> uwdeg_, bwdeg_;
    uint32_t n_users_ = 0, n_businesses_ = 0;
    uint64_t n_edges_ = 0;
};

struct TemporalSplit {
    BipartiteGraph train;
    BipartiteGraph validation;
    BipartiteGraph test;
    int64_t t1 = 0;
    int64_t t2 = 0;
    // Validation/test edges discarded because an endpoint never occurs in train.
    uint64_t dropped_validation = 0;
    uint64_t dropped_test = 0;

    friend bool operator==(const TemporalSplit&, const TemporalSplit&) = default;
};

// Time-ordered split at the train_frac and train_frac + val_frac quantiles of
// the (timestamp, user, business)-sorted edge list. t1/t2 are the timestamps
// at the quantile indices; train takes ts < t1, validation [t1, t2), test the
// rest. Validation/test edges with an endpoint absent from train are dropped
// (node closure). Empty input throws SplitError.
TemporalSplit temporal_split(const BipartiteGraph& g, double train_frac, double val_frac);

// Snapshot format: text header with spaces/cuts/drop counts followed by the
// three edge sections. Round-trips bit-exactly.
void save_split(const std::string& path, const TemporalSplit& split);
TemporalSplit load_split(const std::string& path);

}  // namespace ratingraph
