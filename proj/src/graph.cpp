#include "ratingraph/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ratingraph {

namespace {

void sort_adjacency(std::vector<AdjEntry>& adj, const std::vector<uint64_t>& off) {
    for (std::size_t n = 0; n + 1 < off.size(); ++n) {
        std::sort(adj.begin() + static_cast<std::ptrdiff_t>(off[n]),
                  adj.begin() + static_cast<std::ptrdiff_t>(off[n + 1]),
                  [](const AdjEntry& a, const AdjEntry& b) { return a.node < b.node; });
    }
}

}  // namespace

BipartiteGraph BipartiteGraph::build(std::span<const ReviewEdge> edges,
                                     uint32_t user_space, uint32_t business_space) {
    BipartiteGraph g;
    for (const auto& e : edges) {
        if (e.stars < 1 || e.stars > 5)
            throw ValidationError("edge stars " + std::to_string(e.stars) + " outside {1..5}");
        if (e.user >= user_space) user_space = e.user + 1;
        if (e.business >= business_space) business_space = e.business + 1;
    }

    g.uoff_.assign(static_cast<std::size_t>(user_space) + 1, 0);
    g.boff_.assign(static_cast<std::size_t>(business_space) + 1, 0);
    for (const auto& e : edges) {
        ++g.uoff_[e.user + 1];
        ++g.boff_[e.business + 1];
    }
    for (std::size_t i = 1; i < g.uoff_.size(); ++i) g.uoff_[i] += g.uoff_[i - 1];
    for (std::size_t i = 1; i < g.boff_.size(); ++i) g.boff_[i] += g.boff_[i - 1];

    g.uadj_.resize(edges.size());
    g.badj_.resize(edges.size());
    std::vector<uint64_t> ucur(g.uoff_.begin(), g.uoff_.end() - 1);
    std::vector<uint64_t> bcur(g.boff_.begin(), g.boff_.end() - 1);
    for (const auto& e : edges) {
        g.uadj_[ucur[e.user]++] = {e.business, e.stars, e.timestamp};
        g.badj_[bcur[e.business]++] = {e.user, e.stars, e.timestamp};
    }
    sort_adjacency(g.uadj_, g.uoff_);
    sort_adjacency(g.badj_, g.boff_);

    // Duplicate pairs are adjacent after the sort.
    for (uint32_t u = 0; u < user_space; ++u) {
        for (uint64_t i = g.uoff_[u] + 1; i < g.uoff_[u + 1]; ++i) {
            if (g.uadj_[i].node == g.uadj_[i - 1].node)
                throw ConstructionError("duplicate edge (user " + std::to_string(u) +
                                        ", business " + std::to_string(g.uadj_[i].node) + ")");
        }
    }

    g.uwdeg_.assign(user_space, 0);
    g.bwdeg_.assign(business_space, 0);
    for (uint32_t u = 0; u < user_space; ++u) {
        for (uint64_t i = g.uoff_[u]; i < g.uoff_[u + 1]; ++i) g.uwdeg_[u] += g.uadj_[i].stars;
        if (g.uoff_[u + 1] > g.uoff_[u]) ++g.n_users_;
    }
    for (uint32_t b = 0; b < business_space; ++b) {
        for (uint64_t i = g.boff_[b]; i < g.boff_[b + 1]; ++i) g.bwdeg_[b] += g.badj_[i].stars;
        if (g.boff_[b + 1] > g.boff_[b]) ++g.n_businesses_;
    }
    g.n_edges_ = edges.size();
    return g;
}

std::span<const AdjEntry> BipartiteGraph::user_neighbors(UserId u) const {
    if (!has_user(u)) throw NodeNotFoundError("unknown user " + std::to_string(u));
    return {uadj_.data() + uoff_[u], static_cast<std::size_t>(uoff_[u + 1] - uoff_[u])};
}

std::span<const AdjEntry> BipartiteGraph::business_neighbors(BusinessId b) const {
    if (!has_business(b)) throw NodeNotFoundError("unknown business " + std::to_string(b));
    return {badj_.data() + boff_[b], static_cast<std::size_t>(boff_[b + 1] - boff_[b])};
}

int64_t BipartiteGraph::user_weighted_degree(UserId u) const {
    if (!has_user(u)) throw NodeNotFoundError("unknown user " + std::to_string(u));
    return uwdeg_[u];
}

int64_t BipartiteGraph::business_weighted_degree(BusinessId b) const {
    if (!has_business(b)) throw NodeNotFoundError("unknown business " + std::to_string(b));
    return bwdeg_[b];
}

double BipartiteGraph::avg_rating_given(UserId u) const {
    return static_cast<double>(user_weighted_degree(u)) / static_cast<double>(user_degree(u));
}

double BipartiteGraph::avg_rating_received(BusinessId b) const {
    return static_cast<double>(business_weighted_degree(b)) / static_cast<double>(business_degree(b));
}

bool BipartiteGraph::has_edge(UserId u, BusinessId b) const {
    if (!has_user(u) || !has_business(b)) return false;
    const auto nbrs = user_neighbors(u);
    const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b,
                                     [](const AdjEntry& e, BusinessId id) { return e.node < id; });
    return it != nbrs.end() && it->node == b;
}

double BipartiteGraph::edge_density() const {
    if (n_users_ == 0 || n_businesses_ == 0) return 0.0;
    return static_cast<double>(n_edges_) /
           (static_cast<double>(n_users_) * static_cast<double>(n_businesses_));
}

std::vector<ReviewEdge> BipartiteGraph::edges() const {
    std::vector<ReviewEdge> out;
    out.reserve(n_edges_);
    for (uint32_t u = 0; u + 1 < uoff_.size(); ++u) {
        for (uint64_t i = uoff_[u]; i < uoff_[u + 1]; ++i) {
            out.push_back({u, uadj_[i].node, uadj_[i].stars, uadj_[i].timestamp});
        }
    }
    return out;
}

TemporalSplit temporal_split(const BipartiteGraph& g, double train_frac, double val_frac) {
    if (g.empty()) throw SplitError("cannot split an empty graph");
    if (!(train_frac > 0.0) || !(val_frac > 0.0) || !(train_frac + val_frac < 1.0))
        throw ConfigError("split fractions must satisfy 0 < train, 0 < val, train + val < 1");

    std::vector<ReviewEdge> edges = g.edges();
    std::sort(edges.begin(), edges.end(), [](const ReviewEdge& a, const ReviewEdge& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        if (a.user != b.user) return a.user < b.user;
        return a.business < b.business;
    });

    const std::size_t n = edges.size();
    const auto idx1 = static_cast<std::size_t>(static_cast<double>(n) * train_frac);
    const auto idx2 = static_cast<std::size_t>(static_cast<double>(n) * (train_frac + val_frac));

    TemporalSplit split;
    split.t1 = edges[std::min(idx1, n - 1)].timestamp;
    split.t2 = edges[std::min(idx2, n - 1)].timestamp;

    std::vector<ReviewEdge> train_edges, val_edges, test_edges;
    for (const auto& e : edges) {
        if (e.timestamp < split.t1) {
            train_edges.push_back(e);
        } else if (e.timestamp < split.t2) {
            val_edges.push_back(e);
        } else {
            test_edges.push_back(e);
        }
    }

    split.train = BipartiteGraph::build(train_edges, g.user_space(), g.business_space());

    // Node closure: an evaluation edge survives only with both endpoints in train.
    const auto closed = [&](std::vector<ReviewEdge>& in, uint64_t& dropped) {
        std::vector<ReviewEdge> kept;
        kept.reserve(in.size());
        for (const auto& e : in) {
            if (split.train.has_user(e.user) && split.train.has_business(e.business)) {
                kept.push_back(e);
            } else {
                ++dropped;
            }
        }
        return kept;
    };
    val_edges = closed(val_edges, split.dropped_validation);
    test_edges = closed(test_edges, split.dropped_test);

    split.validation = BipartiteGraph::build(val_edges, g.user_space(), g.business_space());
    split.test = BipartiteGraph::build(test_edges, g.user_space(), g.business_space());
    return split;
}

namespace {

void write_section(std::ofstream& out, const char* name, const BipartiteGraph& g) {
    const auto edges = g.edges();
    out << "section " << name << ' ' << edges.size() << '\n';
    for (const auto& e : edges) {
        out << e.user << ' ' << e.business << ' ' << e.stars << ' ' << e.timestamp << '\n';
    }
}

std::vector<ReviewEdge> read_section(std::istream& in, const std::string& name,
                                     const std::string& path) {
    std::string tag, got;
    std::size_t n = 0;
    if (!(in >> tag >> got >> n) || tag != "section" || got != name)
        throw SchemaError(path + ": expected 'section " + name + "'");
    std::vector<ReviewEdge> edges(n);
    for (auto& e : edges) {
        if (!(in >> e.user >> e.business >> e.stars >> e.timestamp))
            throw SchemaError(path + ": truncated '" + name + "' section");
    }
    return edges;
}

}  // namespace

void save_split(const std::string& path, const TemporalSplit& split) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "ratingraph-split v1\n";
    out << "spaces " << split.train.user_space() << ' ' << split.train.business_space() << '\n';
    out << "cuts " << split.t1 << ' ' << split.t2 << '\n';
    out << "drops " << split.dropped_validation << ' ' << split.dropped_test << '\n';
    write_section(out, "train", split.train);
    write_section(out, "validation", split.validation);
    write_section(out, "test", split.test);
    if (!out) throw IoError("write failed: " + path);
}

TemporalSplit load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header != "ratingraph-split v1")
        throw DependencyError(path + ": not a ratingraph-split v1 file");

    std::string tag;
    uint32_t user_space = 0, business_space = 0;
    TemporalSplit split;
    if (!(in >> tag >> user_space >> business_space) || tag != "spaces")
        throw SchemaError(path + ": missing 'spaces' line");
    if (!(in >> tag >> split.t1 >> split.t2) || tag != "cuts")
        throw SchemaError(path + ": missing 'cuts' line");
    if (!(in >> tag >> split.dropped_validation >> split.dropped_test) || tag != "drops")
        throw SchemaError(path + ": missing 'drops' line");

    split.train = BipartiteGraph::build(read_section(in, "train", path), user_space, business_space);
    split.validation =
        BipartiteGraph::build(read_section(in, "validation", path), user_space, business_space);
    split.test = BipartiteGraph::build(read_section(in, "test", path), user_space, business_space);
    return split;
}

}  // namespace ratingraph
