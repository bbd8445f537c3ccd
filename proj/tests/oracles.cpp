#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>

namespace ratingraph::oracle {

namespace {

struct DenseView {
    std::vector<std::size_t> present;              // combined ids with degree > 0
    std::vector<int> slot;                         // combined id -> dense slot or -1
    Eigen::MatrixXd adjacency;                     // dense 0/1, symmetric

    explicit DenseView(const BipartiteGraph& g) {
        const std::size_t total = static_cast<std::size_t>(g.user_space()) + g.business_space();
        slot.assign(total, -1);
        for (uint32_t u = 0; u < g.user_space(); ++u) {
            if (g.has_user(u)) {
                slot[u] = static_cast<int>(present.size());
                present.push_back(u);
            }
        }
        for (uint32_t b = 0; b < g.business_space(); ++b) {
            if (g.has_business(b)) {
                slot[g.user_space() + b] = static_cast<int>(present.size());
                present.push_back(g.user_space() + b);
            }
        }
        const auto n = static_cast<Eigen::Index>(present.size());
        adjacency = Eigen::MatrixXd::Zero(n, n);
        for (uint32_t u = 0; u < g.user_space(); ++u) {
            if (!g.has_user(u)) continue;
            for (const auto& e : g.user_neighbors(u)) {
                const int a = slot[u];
                const int b = slot[g.user_space() + e.node];
                adjacency(a, b) = 1.0;
                adjacency(b, a) = 1.0;
            }
        }
    }
};

}  // namespace

std::vector<double> pagerank_dense(const BipartiteGraph& g, double damping) {
    const DenseView view(g);
    const auto n = static_cast<Eigen::Index>(view.present.size());

    // M(i,j) = 1/deg(j) for j adjacent to i; solve (I - d M) p = (1-d)/n.
    Eigen::MatrixXd M = view.adjacency;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double deg = view.adjacency.col(j).sum();
        M.col(j) /= deg;
    }
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - damping * M;
    const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, (1.0 - damping) / static_cast<double>(n));
    const Eigen::VectorXd p = A.partialPivLu().solve(rhs);

    std::vector<double> out(static_cast<std::size_t>(g.user_space()) + g.business_space(), 0.0);
    for (std::size_t i = 0; i < view.present.size(); ++i)
        out[view.present[i]] = p(static_cast<Eigen::Index>(i));
    return out;
}

std::vector<double> centrality_dense(const BipartiteGraph& g) {
    const DenseView view(g);
    const auto n = static_cast<Eigen::Index>(view.present.size());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(view.adjacency);
    const Eigen::VectorXd values = solver.eigenvalues();
    const double lambda_max = values(n - 1);

    // Project the uniform start onto the lambda_max eigenspace; this is the
    // limit the shifted power iteration converges to.
    const Eigen::VectorXd start = Eigen::VectorXd::Constant(n, 1.0);
    Eigen::VectorXd projection = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values(i) > lambda_max - 1e-9) {
            const Eigen::VectorXd v = solver.eigenvectors().col(i);
            projection += v.dot(start) * v;
        }
    }
    projection /= projection.norm();
    if (projection.sum() < 0.0) projection = -projection;

    std::vector<double> out(static_cast<std::size_t>(g.user_space()) + g.business_space(), 0.0);
    for (std::size_t i = 0; i < view.present.size(); ++i)
        out[view.present[i]] = projection(static_cast<Eigen::Index>(i));
    return out;
}

std::array<double, 9> features(const std::vector<ReviewEdge>& edges, UserId u, BusinessId b,
                               const std::vector<double>& pagerank_scores,
                               const std::vector<double>& centrality_scores,
                               uint32_t user_space) {
    const auto degree_user = [&](UserId v) {
        std::size_t d = 0;
        for (const auto& e : edges) d += e.user == v;
        return d;
    };
    const auto degree_business = [&](BusinessId c) {
        std::size_t d = 0;
        for (const auto& e : edges) d += e.business == c;
        return d;
    };
    const auto avg_given = [&](UserId v) {
        double sum = 0.0;
        std::size_t d = 0;
        for (const auto& e : edges) {
            if (e.user == v) {
                sum += e.stars;
                ++d;
            }
        }
        return sum / static_cast<double>(d);
    };
    const auto avg_received = [&](BusinessId c) {
        double sum = 0.0;
        std::size_t d = 0;
        for (const auto& e : edges) {
            if (e.business == c) {
                sum += e.stars;
                ++d;
            }
        }
        return sum / static_cast<double>(d);
    };
    const auto weighted_degree_user = [&](UserId v) {
        double sum = 0.0;
        for (const auto& e : edges) {
            if (e.user == v) sum += e.stars;
        }
        return sum;
    };
    const auto weighted_degree_business = [&](BusinessId c) {
        double sum = 0.0;
        for (const auto& e : edges) {
            if (e.business == c) sum += e.stars;
        }
        return sum;
    };

    std::set<UserId> raters;
    for (const auto& e : edges) {
        if (e.business == b && e.user != u) raters.insert(e.user);
    }
    std::set<BusinessId> businesses;
    for (const auto& e : edges) {
        if (e.user == u && e.business != b) businesses.insert(e.business);
    }

    std::array<double, 9> f{};
    f[0] = static_cast<double>(raters.size());
    f[1] = static_cast<double>(businesses.size());
    for (const UserId v : raters) f[2] += avg_given(v);
    if (!raters.empty()) f[2] /= static_cast<double>(raters.size());
    for (const BusinessId c : businesses) f[3] += avg_received(c);
    if (!businesses.empty()) f[3] /= static_cast<double>(businesses.size());

    {
        double lhs = 0.0;
        std::size_t nl = 0;
        for (const auto& e : edges) {
            if (e.user == u) {
                lhs += avg_received(e.business);
                ++nl;
            }
        }
        double rhs = 0.0;
        std::size_t nr = 0;
        for (const auto& e : edges) {
            if (e.business == b) {
                rhs += avg_given(e.user);
                ++nr;
            }
        }
        f[4] = (lhs / static_cast<double>(nl)) * (rhs / static_cast<double>(nr));
    }

    f[5] = pagerank_scores[u] + pagerank_scores[user_space + b];
    f[6] = centrality_scores[u] + centrality_scores[user_space + b];

    for (const UserId v : raters) f[7] += 1.0 / weighted_degree_user(v);
    for (const BusinessId c : businesses) f[7] += 1.0 / weighted_degree_business(c);

    f[8] = static_cast<double>(degree_user(u)) * static_cast<double>(degree_business(b));
    return f;
}

void NaiveCart::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    nodes_.clear();
    std::vector<int> rows(static_cast<std::size_t>(X.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
    build(X, y, std::move(rows));
}

int NaiveCart::build(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<int> rows) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0;
    for (const int r : rows) sum += y(r);
    nodes_[static_cast<std::size_t>(id)].value = sum / static_cast<double>(rows.size());

    bool pure = true;
    for (const int r : rows) pure = pure && y(r) == y(rows.front());
    if (rows.size() <= 1 || pure) return id;

    const auto sse = [&](const std::vector<int>& subset) {
        double s = 0.0, ss = 0.0;
        for (const int r : subset) {
            s += y(r);
            ss += y(r) * y(r);
        }
        return ss - s * s / static_cast<double>(subset.size());
    };

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    for (int f = 0; f < X.cols(); ++f) {
        std::vector<double> values;
        for (const int r : rows) values.push_back(X(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double threshold = (values[i] + values[i + 1]) / 2.0;
            std::vector<int> left, right;
            for (const int r : rows) (X(r, f) <= threshold ? left : right).push_back(r);
            const double score = sse(left) + sse(right);
            if (score < best_score) {
                best_score = score;
                best_feature = f;
                best_threshold = threshold;
            }
        }
    }
    if (best_feature < 0) return id;

    std::vector<int> left, right;
    for (const int r : rows) (X(r, best_feature) <= best_threshold ? left : right).push_back(r);
    nodes_[static_cast<std::size_t>(id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
    const int l = build(X, y, std::move(left));
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = build(X, y, std::move(right));
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
}

double NaiveCart::predict(const Eigen::RowVectorXd& x) const {
    std::size_t at = 0;
    while (nodes_[at].feature >= 0) {
        at = static_cast<std::size_t>(x(nodes_[at].feature) <= nodes_[at].threshold
                                          ? nodes_[at].left
                                          : nodes_[at].right);
    }
    return nodes_[at].value;
}

std::vector<uint64_t> component_sizes_bfs(const BipartiteGraph& g) {
    const std::size_t total = static_cast<std::size_t>(g.user_space()) + g.business_space();
    std::vector<int> label(total, -1);
    std::vector<uint64_t> sizes;

    const auto present = [&](std::size_t id) {
        return id < g.user_space() ? g.has_user(static_cast<UserId>(id))
                                   : g.has_business(static_cast<BusinessId>(id - g.user_space()));
    };

    for (std::size_t start = 0; start < total; ++start) {
        if (!present(start) || label[start] >= 0) continue;
        const int comp = static_cast<int>(sizes.size());
        sizes.push_back(0);
        std::deque<std::size_t> queue{start};
        label[start] = comp;
        while (!queue.empty()) {
            const std::size_t at = queue.front();
            queue.pop_front();
            ++sizes[static_cast<std::size_t>(comp)];
            if (at < g.user_space()) {
                for (const auto& e : g.user_neighbors(static_cast<UserId>(at))) {
                    const std::size_t to = g.user_space() + e.node;
                    if (label[to] < 0) {
                        label[to] = comp;
                        queue.push_back(to);
                    }
                }
            } else {
                for (const auto& e : g.business_neighbors(static_cast<BusinessId>(at - g.user_space()))) {
                    if (label[e.node] < 0) {
                        label[e.node] = comp;
                        queue.push_back(e.node);
                    }
                }
            }
        }
    }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

}  // namespace ratingraph::oracle
