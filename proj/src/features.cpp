#include "ratingraph/features.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

namespace ratingraph {

std::vector<UserId> common_raters(const BipartiteGraph& g, UserId u, BusinessId b) {
    if (!g.has_user(u)) throw NodeNotFoundError("unknown user " + std::to_string(u));
    std::vector<UserId> out;
    const auto raters = g.business_neighbors(b);
    out.reserve(raters.size());
    for (const auto& e : raters) {
        if (e.node != u) out.push_back(e.node);
    }
    return out;
}

std::vector<BusinessId> common_businesses(const BipartiteGraph& g, UserId u, BusinessId b) {
    if (!g.has_business(b)) throw NodeNotFoundError("unknown business " + std::to_string(b));
    std::vector<BusinessId> out;
    const auto rated = g.user_neighbors(u);
    out.reserve(rated.size());
    for (const auto& e : rated) {
        if (e.node != b) out.push_back(e.node);
    }
    return out;
}

double avg_rating_common_raters(const BipartiteGraph& g, UserId u, BusinessId b) {
    const auto raters = common_raters(g, u, b);
    if (raters.empty()) return 0.0;
    double sum = 0.0;
    for (const UserId v : raters) sum += g.avg_rating_given(v);
    return sum / static_cast<double>(raters.size());
}

double avg_rating_common_businesses(const BipartiteGraph& g, UserId u, BusinessId b) {
    const auto rated = common_businesses(g, u, b);
    if (rated.empty()) return 0.0;
    double sum = 0.0;
    for (const BusinessId c : rated) sum += g.avg_rating_received(c);
    return sum / static_cast<double>(rated.size());
}

double pref_attachment_rating(const BipartiteGraph& g, UserId u, BusinessId b) {
    const auto rated = g.user_neighbors(u);
    const auto raters = g.business_neighbors(b);
    double lhs = 0.0;
    for (const auto& e : rated) lhs += g.avg_rating_received(e.node);
    lhs /= static_cast<double>(rated.size());
    double rhs = 0.0;
    for (const auto& e : raters) rhs += g.avg_rating_given(e.node);
    rhs /= static_cast<double>(raters.size());
    return lhs * rhs;
}

double adamic_adar(const BipartiteGraph& g, UserId u, BusinessId b) {
    // The two common sets live in disjoint id namespaces, so the union is a
    // concatenation. weighted_degree >= 1 for any present node.
    double sum = 0.0;
    for (const auto& e : g.business_neighbors(b)) {
        if (e.node != u) sum += 1.0 / static_cast<double>(g.user_weighted_degree(e.node));
    }
    for (const auto& e : g.user_neighbors(u)) {
        if (e.node != b) sum += 1.0 / static_cast<double>(g.business_weighted_degree(e.node));
    }
    return sum;
}

double pref_attachment_degree(const BipartiteGraph& g, UserId u, BusinessId b) {
    return static_cast<double>(g.user_degree(u)) * static_cast<double>(g.business_degree(b));
}

std::vector<double> pagerank(const BipartiteGraph& g, double damping, double tol, int max_iter) {
    if (g.empty()) throw InputError("pagerank of an empty graph");
    const uint32_t us = g.user_space();
    const uint32_t bs = g.business_space();
    const std::size_t total = static_cast<std::size_t>(us) + bs;
    const double n = static_cast<double>(g.num_users()) + static_cast<double>(g.num_businesses());

    std::vector<double> score(total, 0.0), next(total, 0.0);
    for (uint32_t u = 0; u < us; ++u)
        if (g.has_user(u)) score[u] = 1.0 / n;
    for (uint32_t b = 0; b < bs; ++b)
        if (g.has_business(b)) score[us + b] = 1.0 / n;

    const double base = (1.0 - damping) / n;
    double residual = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        // Push each node's mass to its neighbors; no dangling nodes exist
        // because a present node always has degree >= 1.
        std::fill(next.begin(), next.end(), 0.0);
        for (uint32_t u = 0; u < us; ++u) {
            if (!g.has_user(u)) continue;
            const auto nbrs = g.user_neighbors(u);
            const double share = damping * score[u] / static_cast<double>(nbrs.size());
            for (const auto& e : nbrs) next[us + e.node] += share;
        }
        for (uint32_t b = 0; b < bs; ++b) {
            if (!g.has_business(b)) continue;
            const auto nbrs = g.business_neighbors(b);
            const double share = damping * score[us + b] / static_cast<double>(nbrs.size());
            for (const auto& e : nbrs) next[e.node] += share;
        }
        residual = 0.0;
        for (uint32_t u = 0; u < us; ++u) {
            if (!g.has_user(u)) continue;
            next[u] += base;
            residual += std::abs(next[u] - score[u]);
        }
        for (uint32_t b = 0; b < bs; ++b) {
            if (!g.has_business(b)) continue;
            next[us + b] += base;
            residual += std::abs(next[us + b] - score[us + b]);
        }
        score.swap(next);
        if (residual < tol) return score;
    }
    throw ConvergenceError("pagerank did not converge in " + std::to_string(max_iter) + " iterations",
                           residual);
}

std::vector<double> eigenvector_centrality(const BipartiteGraph& g, double tol, int max_iter) {
    if (g.empty()) throw InputError("eigenvector centrality of an empty graph");
    const uint32_t us = g.user_space();
    const uint32_t bs = g.business_space();
    const std::size_t total = static_cast<std::size_t>(us) + bs;
    const double n = static_cast<double>(g.num_users()) + static_cast<double>(g.num_businesses());

    std::vector<double> x(total, 0.0), y(total, 0.0);
    const double init = 1.0 / std::sqrt(n);
    for (uint32_t u = 0; u < us; ++u)
        if (g.has_user(u)) x[u] = init;
    for (uint32_t b = 0; b < bs; ++b)
        if (g.has_business(b)) x[us + b] = init;

    double delta = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        // y = (A + I) x; the +I shift breaks the +/-lambda symmetry of
        // bipartite adjacency spectra.
        for (std::size_t i = 0; i < total; ++i) y[i] = x[i];
        for (uint32_t u = 0; u < us; ++u) {
            if (!g.has_user(u)) continue;
            for (const auto& e : g.user_neighbors(u)) {
                y[u] += x[us + e.node];
                y[us + e.node] += x[u];
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < total; ++i) norm += y[i] * y[i];
        norm = std::sqrt(norm);
        delta = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            y[i] /= norm;
            delta = std::max(delta, std::abs(y[i] - x[i]));
        }
        x.swap(y);
        if (delta < tol) return x;
    }
    throw ConvergenceError(
        "eigenvector centrality did not converge in " + std::to_string(max_iter) + " iterations",
        delta);
}

FeatureExtractor::FeatureExtractor(const BipartiteGraph& g, FeatureParams params)
    : g_(&g),
      pagerank_(pagerank(g, params.damping, params.pagerank_tol, params.pagerank_max_iter)),
      centrality_(eigenvector_centrality(g, params.centrality_tol, params.centrality_max_iter)) {}

std::array<double, 9> FeatureExtractor::row(UserId u, BusinessId b) const {
    const BipartiteGraph& g = *g_;
    if (!g.has_user(u))
        throw NodeNotFoundError("pair (" + std::to_string(u) + "," + std::to_string(b) +
                                "): user not in train graph");
    if (!g.has_business(b))
        throw NodeNotFoundError("pair (" + std::to_string(u) + "," + std::to_string(b) +
                                "): business not in train graph");

    const auto rated = g.user_neighbors(u);    // u's businesses
    const auto raters = g.business_neighbors(b);  // b's raters

    // Single pass per adjacency list gathers every per-side aggregate.
    double rater_count = 0.0, rater_avg_sum = 0.0, rater_inv_wdeg = 0.0, rater_given_sum = 0.0;
    for (const auto& e : raters) {
        rater_given_sum += g.avg_rating_given(e.node);
        if (e.node == u) continue;
        rater_count += 1.0;
        rater_avg_sum += g.avg_rating_given(e.node);
        rater_inv_wdeg += 1.0 / static_cast<double>(g.user_weighted_degree(e.node));
    }
    double biz_count = 0.0, biz_avg_sum = 0.0, biz_inv_wdeg = 0.0, biz_received_sum = 0.0;
    for (const auto& e : rated) {
        biz_received_sum += g.avg_rating_received(e.node);
        if (e.node == b) continue;
        biz_count += 1.0;
        biz_avg_sum += g.avg_rating_received(e.node);
        biz_inv_wdeg += 1.0 / static_cast<double>(g.business_weighted_degree(e.node));
    }

    std::array<double, 9> f{};
    f[0] = rater_count;
    f[1] = biz_count;
    f[2] = rater_count > 0.0 ? rater_avg_sum / rater_count : 0.0;
    f[3] = biz_count > 0.0 ? biz_avg_sum / biz_count : 0.0;
    f[4] = (biz_received_sum / static_cast<double>(rated.size())) *
           (rater_given_sum / static_cast<double>(raters.size()));
    f[5] = pagerank_[u] + pagerank_[business_score_index(g, b)];
    f[6] = centrality_[u] + centrality_[business_score_index(g, b)];
    f[7] = rater_inv_wdeg + biz_inv_wdeg;
    f[8] = static_cast<double>(rated.size()) * static_cast<double>(raters.size());
    return f;
}

FeatureMatrix featurize(const FeatureExtractor& extractor, std::span<const ReviewEdge> pairs,
                        int workers) {
    FeatureMatrix m;
    m.rows.resize(pairs.size());

    const auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const ReviewEdge& e = pairs[i];
            m.rows[i] = {e.user, e.business, extractor.row(e.user, e.business),
                         static_cast<double>(e.stars)};
        }
    };

    if (workers <= 1 || pairs.size() < 1024) {
        fill(0, pairs.size());
        return m;
    }

    const std::size_t chunk = (pairs.size() + workers - 1) / static_cast<std::size_t>(workers);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(pairs.size(), static_cast<std::size_t>(w) * chunk);
        const std::size_t end = std::min(pairs.size(), begin + chunk);
        threads.emplace_back([&, w, begin, end]() {
            try {
                fill(begin, end);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return m;
}

Standardizer Standardizer::fit(const FeatureMatrix& train) {
    if (train.empty()) throw InputError("cannot fit a standardizer on an empty matrix");
    Standardizer s;
    const double n = static_cast<double>(train.size());
    for (std::size_t j = 0; j < 9; ++j) {
        double sum = 0.0;
        for (const auto& r : train.rows) sum += r.features[j];
        s.means_[j] = sum / n;
    }
    for (std::size_t j = 0; j < 9; ++j) {
        double ss = 0.0;
        for (const auto& r : train.rows) {
            const double d = r.features[j] - s.means_[j];
            ss += d * d;
        }
        // Sample std; single-row or constant columns keep divisor 1.
        const double var = train.size() > 1 ? ss / (n - 1.0) : 0.0;
        s.stds_[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& m) const {
    FeatureMatrix out = m;
    for (auto& r : out.rows) {
        for (std::size_t j = 0; j < 9; ++j) {
            r.features[j] = (r.features[j] - means_[j]) / stds_[j];
        }
    }
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_double_field(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path + ": bad numeric field '" + s + "'", line_no);
    }
}

const std::string kFeatureHeader =
    "user_id,business_id,f1,f2,f3,f4,f5,f6,f7,f8,f9,stars";

}  // namespace

void write_features_csv(const std::string& path, const FeatureMatrix& m, const IdMap& ids) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << kFeatureHeader << '\n';
    for (const auto& r : m.rows) {
        out << ids.user_string(r.user) << ',' << ids.business_string(r.business);
        for (const double f : r.features) out << ',' << format_double(f);
        out << ',' << format_double(r.target) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

FeatureMatrix read_features_csv(const std::string& path, const IdMap& ids) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kFeatureHeader) throw SchemaError(path + ": unexpected header '" + line + "'");

    FeatureMatrix m;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line, ',');
        if (fields.size() != 12)
            throw ParseError(path + ": expected 12 fields, got " + std::to_string(fields.size()),
                             line_no);
        FeatureRow r;
        const auto u = ids.find_user(fields[0]);
        const auto b = ids.find_business(fields[1]);
        if (!u || !b) throw ValidationError(path + ": unknown id at line " + std::to_string(line_no));
        r.user = *u;
        r.business = *b;
        for (std::size_t j = 0; j < 9; ++j) r.features[j] = parse_double_field(fields[2 + j], path, line_no);
        r.target = parse_double_field(fields[11], path, line_no);
        m.rows.push_back(r);
    }
    return m;
}

void save_standardizer(const std::string& path, const Standardizer& s) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "feature,mean,std\n";
    for (std::size_t j = 0; j < 9; ++j) {
        out << kFeatureNames[j] << ',' << format_double(s.means()[j]) << ','
            << format_double(s.stds()[j]) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Standardizer load_standardizer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "feature,mean,std") throw SchemaError(path + ": unexpected header '" + line + "'");

    Standardizer s;
    std::size_t line_no = 1;
    for (std::size_t j = 0; j < 9; ++j) {
        if (!std::getline(in, line)) throw SchemaError(path + ": truncated standardizer file");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split_line(line, ',');
        if (fields.size() != 3 || fields[0] != kFeatureNames[j])
            throw SchemaError(path + ": unexpected row at line " + std::to_string(line_no));
        s.means_[j] = parse_double_field(fields[1], path, line_no);
        s.stds_[j] = parse_double_field(fields[2], path, line_no);
    }
    return s;
}

}  // namespace ratingraph
