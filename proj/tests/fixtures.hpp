#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "ratingraph/graph.hpp"
#include "ratingraph/synth.hpp"

namespace ratingraph::testing {

// Fixture G0: users {u1,u2,u3} = {0,1,2}, businesses {b1,b2} = {0,1},
// edges (u1,b1,5), (u2,b1,3), (u1,b2,4), (u3,b2,2) at timestamps 1..4.
inline std::vector<ReviewEdge> g0_edges() {
    return {{0, 0, 5, 1}, {1, 0, 3, 2}, {0, 1, 4, 3}, {2, 1, 2, 4}};
}

inline BipartiteGraph g0() { return BipartiteGraph::build(g0_edges()); }

constexpr UserId kU1 = 0, kU2 = 1, kU3 = 2;
constexpr BusinessId kB1 = 0, kB2 = 1;

// Small seeded random graphs for property tests and oracle sweeps.
inline std::vector<ReviewEdge> random_graph_edges(uint64_t seed, uint32_t users = 12,
                                                  uint32_t businesses = 8, uint64_t edges = 30) {
    SynthConfig cfg;
    cfg.n_users = users;
    cfg.n_businesses = businesses;
    cfg.n_edges = edges;
    cfg.gamma = 2.0;
    cfg.seed = seed;
    return generate(cfg);
}

class TmpDir {
public:
    explicit TmpDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("ratingraph_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TmpDir() { std::filesystem::remove_all(path_); }
    TmpDir(const TmpDir&) = delete;
    TmpDir& operator=(const TmpDir&) = delete;

    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace ratingraph::testing
