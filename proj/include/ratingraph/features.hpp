#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ratingraph/graph.hpp"

namespace ratingraph {

// Fixed feature order of the 9-dimensional pair vector.
inline constexpr std::array<const char*, 9> kFeatureNames = {
    "n_common_raters",      "n_common_businesses",  "avg_rating_common_raters",
    "avg_rating_common_businesses", "pref_attachment_rating", "pagerank_sum",
    "eigencentrality_sum",  "adamic_adar",          "pref_attachment_degree"};

// Other users who rated b, excluding u itself. Sorted by id.
std::vector<UserId> common_raters(const BipartiteGraph& g, UserId u, BusinessId b);

// Other businesses rated by u, excluding b itself. Sorted by id.
std::vector<BusinessId> common_businesses(const BipartiteGraph& g, UserId u, BusinessId b);

// Mean of avg_rating_given over common_raters; 0 when the set is empty.
double avg_rating_common_raters(const BipartiteGraph& g, UserId u, BusinessId b);

// Mean of avg_rating_received over common_businesses; 0 when the set is empty.
double avg_rating_common_businesses(const BipartiteGraph& g, UserId u, BusinessId b);

// (mean received rating over u's businesses) x (mean given rating over b's raters).
double pref_attachment_rating(const BipartiteGraph& g, UserId u, BusinessId b);

// Sum of 1 / weighted_degree(w) over the union of common raters and common
// businesses; 0 when the union is empty.
double adamic_adar(const BipartiteGraph& g, UserId u, BusinessId b);

// degree(u) * degree(b).
double pref_attachment_degree(const BipartiteGraph& g, UserId u, BusinessId b);

// Node scores are indexed over the combined id space: users occupy
// [0, user_space), businesses [user_space, user_space + business_space).
// Absent nodes score 0.
inline std::size_t user_score_index(const BipartiteGraph&, UserId u) { return u; }
inline std::size_t business_score_index(const BipartiteGraph& g, BusinessId b) {
    return static_cast<std::size_t>(g.user_space()) + b;
}

// PageRank of the unweighted undirected view of the graph (each review edge
// acts as two directed edges). Scores over present nodes sum to 1; stops when
// the L1 change between sweeps falls below tol, else throws ConvergenceError.
std::vector<double> pagerank(const BipartiteGraph& g, double damping = 0.85,
                             double tol = 1e-9, int max_iter = 200);

// Dominant eigenvector of the unweighted undirected adjacency, L2-normalized,
// entries >= 0. Power iteration runs on A + I so the bipartite +/- lambda
// spectrum cannot oscillate. Throws ConvergenceError past max_iter.
std::vector<double> eigenvector_centrality(const BipartiteGraph& g, double tol = 1e-9,
                                           int max_iter = 1000);

struct FeatureParams {
    double damping = 0.85;
    double pagerank_tol = 1e-9;
    int pagerank_max_iter = 200;
    double centrality_tol = 1e-9;
    int centrality_max_iter = 1000;
};

// One labeled pair row; `target` is the observed star rating.
struct FeatureRow {
    UserId user = 0;
    BusinessId business = 0;
    std::array<double, 9> features{};
    double target = 0.0;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureMatrix {
    std::vector<FeatureRow> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

// Computes PageRank and centrality once per graph; per-pair rows are then
// O(deg(u) + deg(b)) scans over the cached aggregates.
class FeatureExtractor {
public:
    explicit FeatureExtractor(const BipartiteGraph& g, FeatureParams params = {});

    std::array<double, 9> row(UserId u, BusinessId b) const;

    const BipartiteGraph& graph() const { return *g_; }
    const std::vector<double>& pagerank_scores() const { return pagerank_; }
    const std::vector<double>& centrality_scores() const { return centrality_; }

private:
    const BipartiteGraph* g_;
    std::vector<double> pagerank_;
    std::vector<double> centrality_;
};

// One FeatureRow per input edge, in input order; targets are the edge stars.
// All structural quantities come from the extractor's (training) graph.
// Row-deterministic for any worker count. Unknown endpoints raise
// NodeNotFoundError naming the pair.
FeatureMatrix featurize(const FeatureExtractor& extractor, std::span<const ReviewEdge> pairs,
                        int workers = 1);

// Per-feature affine transform to zero mean / unit sample variance, fitted on
// training rows only. Zero-variance columns divide by 1 and so map to 0.
class Standardizer {
public:
    static Standardizer fit(const FeatureMatrix& train);

    FeatureMatrix apply(const FeatureMatrix& m) const;

    const std::array<double, 9>& means() const { return means_; }
    const std::array<double, 9>& stds() const { return stds_; }

    friend bool operator==(const Standardizer&, const Standardizer&) = default;

private:
    std::array<double, 9> means_{};
    std::array<double, 9> stds_{};

    friend Standardizer load_standardizer(const std::string& path);
    friend class ModelReader;
};

// Feature matrix CSV: header "user_id,business_id,f1..f9,stars" with string
// ids resolved through the id map.
void write_features_csv(const std::string& path, const FeatureMatrix& m, const IdMap& ids);
FeatureMatrix read_features_csv(const std::string& path, const IdMap& ids);

// Standardizer sidecar: "feature,mean,std" rows.
void save_standardizer(const std::string& path, const Standardizer& s);
Standardizer load_standardizer(const std::string& path);

}  // namespace ratingraph
