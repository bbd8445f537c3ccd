#include "ratingraph/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "ratingraph/evaluation.hpp"
#include "ratingraph/rng.hpp"

namespace ratingraph {

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& X) const {
    if (weights.size() == 0)
        return Eigen::VectorXd::Constant(X.rows(), bias);
    if (X.cols() != weights.size())
        throw ShapeError("linear model expects " + std::to_string(weights.size()) +
                         " columns, got " + std::to_string(X.cols()));
    return (X * weights).array() + bias;
}

Eigen::VectorXd BayesianModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != weights.size())
        throw ShapeError("bayesian model expects " + std::to_string(weights.size()) +
                         " columns, got " + std::to_string(X.cols()));
    return (X * weights).array() + bias;
}

LinearModel fit_baseline(const Eigen::VectorXd& y) {
    if (y.size() == 0) throw InputError("fit_baseline: empty targets");
    LinearModel m;
    m.bias = mean(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
    return m;
}

LinearModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() == 0) throw InputError("fit_linear: empty design matrix");
    if (X.rows() != y.size()) throw ShapeError("fit_linear: row/target count mismatch");

    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.leftCols(X.cols()) = X;
    A.col(X.cols()).setOnes();
    const Eigen::VectorXd theta = A.completeOrthogonalDecomposition().solve(y);

    LinearModel m;
    m.weights = theta.head(X.cols());
    m.bias = theta(X.cols());
    return m;
}

LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
    if (alpha < 0.0) throw ConfigError("ridge alpha must be >= 0");
    if (alpha == 0.0) return fit_linear(X, y);
    if (X.rows() == 0) throw InputError("fit_ridge: empty design matrix");
    if (X.rows() != y.size()) throw ShapeError("fit_ridge: row/target count mismatch");

    const Eigen::Index d = X.cols();
    Eigen::MatrixXd G(d + 1, d + 1);
    G.topLeftCorner(d, d) = X.transpose() * X;
    G.topLeftCorner(d, d).diagonal().array() += alpha;
    G.topRightCorner(d, 1) = X.colwise().sum().transpose();
    G.bottomLeftCorner(1, d) = X.colwise().sum();
    G(d, d) = static_cast<double>(X.rows());

    Eigen::VectorXd rhs(d + 1);
    rhs.head(d) = X.transpose() * y;
    rhs(d) = y.sum();

    const Eigen::VectorXd theta = G.ldlt().solve(rhs);
    LinearModel m;
    m.weights = theta.head(d);
    m.bias = theta(d);
    return m;
}

LinearModel fit_ridge_gd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                         int iterations, double learning_rate) {
    if (alpha < 0.0) throw ConfigError("ridge alpha must be >= 0");
    if (X.rows() == 0) throw InputError("fit_ridge_gd: empty design matrix");
    const double n = static_cast<double>(X.rows());

    Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
    double b = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd r = (X * w).array() + b - y.array();
        // Objective sum r^2 + alpha |w|^2; the 1/n factor only rescales the step.
        const Eigen::VectorXd gw = (2.0 * (X.transpose() * r) + 2.0 * alpha * w) / n;
        const double gb = 2.0 * r.sum() / n;
        w -= learning_rate * gw;
        b -= learning_rate * gb;
    }
    LinearModel m;
    m.weights = w;
    m.bias = b;
    return m;
}

BayesianModel fit_bayesian(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           BayesianHyper hyper, int max_iter, double tol) {
    if (X.rows() == 0) throw InputError("fit_bayesian: empty design matrix");
    if (X.rows() != y.size()) throw ShapeError("fit_bayesian: row/target count mismatch");

    const Eigen::Index n = X.rows();

    // Bias handled by centering; the weight prior then only shrinks the slope.
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    const Eigen::VectorXd s2 = s.array().square();
    const Eigen::VectorXd uty = svd.matrixU().transpose() * yc;

    const double y_var = yc.squaredNorm() / static_cast<double>(n);
    double alpha = y_var > 0.0 ? 1.0 / y_var : 1.0;  // noise precision
    double lambda = 1.0;                             // weight precision

    const auto coefficients = [&](double a, double l) -> Eigen::VectorXd {
        // mu = V diag(s / (s^2 + l/a)) U^T yc
        Eigen::VectorXd scaled(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i)
            scaled(i) = s(i) * uty(i) / (s2(i) + l / a);
        return svd.matrixV() * scaled;
    };

    Eigen::VectorXd w = coefficients(alpha, lambda);
    double change = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        double gamma = 0.0;
        for (Eigen::Index i = 0; i < s2.size(); ++i)
            gamma += alpha * s2(i) / (lambda + alpha * s2(i));
        const double rss = (yc - Xc * w).squaredNorm();
        lambda = (gamma + 2.0 * hyper.lambda_shape) / (w.squaredNorm() + 2.0 * hyper.lambda_rate);
        alpha = (static_cast<double>(n) - gamma + 2.0 * hyper.alpha_shape) /
                (rss + 2.0 * hyper.alpha_rate);

        const Eigen::VectorXd w_new = coefficients(alpha, lambda);
        change = (w_new - w).cwiseAbs().sum();
        w = w_new;
        if (change < tol) {
            BayesianModel m;
            m.weights = w;
            m.bias = y_mean - x_mean.dot(w);
            m.noise_precision = alpha;
            m.weight_precision = lambda;
            m.n_iter = iter + 1;
            return m;
        }
    }
    throw ConvergenceError(
        "bayesian regression did not converge in " + std::to_string(max_iter) + " iterations",
        change);
}

// ---------------------------------------------------------------------------
// MLP

namespace {

constexpr int kStarClasses = 5;

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd z) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        z.row(i) = (z.row(i).array() - m).exp();
        z.row(i) /= z.row(i).sum();
    }
    return z;
}

struct ForwardState {
    std::vector<Eigen::MatrixXd> activations;  // activations[0] = input batch
    Eigen::MatrixXd probs;
};

ForwardState forward(const MlpModel& model, const Eigen::MatrixXd& X) {
    ForwardState st;
    st.activations.reserve(model.weights.size());
    st.activations.push_back(X);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        Eigen::MatrixXd z = (st.activations.back() * model.weights[l].transpose()).rowwise() +
                            model.biases[l].transpose();
        if (l + 1 < model.weights.size()) {
            st.activations.push_back(z.cwiseMax(0.0));  // relu
        } else {
            st.probs = softmax_rows(std::move(z));
        }
    }
    return st;
}

std::vector<int> star_classes(const Eigen::VectorXd& y) {
    std::vector<int> classes(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double v = y(i);
        if (v != std::floor(v) || v < 1.0 || v > 5.0)
            throw ValidationError("mlp targets must be integer stars in 1..5, got " +
                                  std::to_string(v));
        classes[static_cast<std::size_t>(i)] = static_cast<int>(v) - 1;
    }
    return classes;
}

struct AdamState {
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    int64_t t = 0;

    explicit AdamState(const MlpModel& model) {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            mw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
            vw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
            mb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
            vb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
        }
    }

    void step(MlpModel& model, const MlpGradients& g, const TrainConfig& cfg) {
        ++t;
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            mw[l] = cfg.beta1 * mw[l] + (1.0 - cfg.beta1) * g.weight_grads[l];
            vw[l] = cfg.beta2 * vw[l] +
                    (1.0 - cfg.beta2) * g.weight_grads[l].array().square().matrix();
            mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * g.bias_grads[l];
            vb[l] = cfg.beta2 * vb[l] +
                    (1.0 - cfg.beta2) * g.bias_grads[l].array().square().matrix();
            model.weights[l].array() -= cfg.learning_rate * (mw[l].array() / c1) /
                                        ((vw[l].array() / c2).sqrt() + cfg.epsilon);
            model.biases[l].array() -= cfg.learning_rate * (mb[l].array() / c1) /
                                       ((vb[l].array() / c2).sqrt() + cfg.epsilon);
        }
    }
};

}  // namespace

Eigen::MatrixXd MlpModel::predict_proba(const Eigen::MatrixXd& X) const {
    if (X.cols() != input_dim())
        throw ShapeError("mlp expects " + std::to_string(input_dim()) + " columns, got " +
                         std::to_string(X.cols()));
    return forward(*this, X).probs;
}

Eigen::VectorXd MlpModel::predict(const Eigen::MatrixXd& X) const {
    const Eigen::MatrixXd p = predict_proba(X);
    Eigen::VectorXd stars(kStarClasses);
    for (int k = 0; k < kStarClasses; ++k) stars(k) = k + 1;
    return p * stars;
}

MlpModel make_mlp(int input_dim, uint64_t seed) {
    if (input_dim <= 0) throw ConfigError("mlp input dimension must be positive");
    MlpModel m;
    m.dims = {input_dim, 200, 40, 8, kStarClasses};
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
        Rng layer_rng = rng.fork(l);
        const int fan_in = m.dims[l];
        const int fan_out = m.dims[l + 1];
        const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * layer_rng.normal();
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

MlpGradients mlp_loss_and_grad(const MlpModel& model, const Eigen::MatrixXd& X,
                               const std::vector<int>& classes, double l2) {
    if (static_cast<std::size_t>(X.rows()) != classes.size())
        throw ShapeError("mlp_loss_and_grad: batch size mismatch");
    const double batch = static_cast<double>(X.rows());
    const ForwardState st = forward(model, X);

    MlpGradients g;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double p = std::max(st.probs(i, classes[static_cast<std::size_t>(i)]),
                                  std::numeric_limits<double>::min());
        g.loss -= std::log(p);
    }
    g.loss /= batch;
    for (const auto& w : model.weights) g.loss += l2 * w.squaredNorm();

    Eigen::MatrixXd delta = st.probs;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        delta(i, classes[static_cast<std::size_t>(i)]) -= 1.0;
    delta /= batch;

    g.weight_grads.resize(model.weights.size());
    g.bias_grads.resize(model.weights.size());
    for (std::size_t l = model.weights.size(); l-- > 0;) {
        g.weight_grads[l] = delta.transpose() * st.activations[l] + 2.0 * l2 * model.weights[l];
        g.bias_grads[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            const Eigen::MatrixXd back = delta * model.weights[l];
            delta = back.cwiseProduct(
                (st.activations[l].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

MlpModel fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& cfg,
                 const Eigen::MatrixXd* X_val, const Eigen::VectorXd* y_val) {
    if (X.rows() == 0) throw InputError("fit_mlp: empty design matrix");
    if (X.rows() != y.size()) throw ShapeError("fit_mlp: row/target count mismatch");
    if (cfg.batch_size <= 0 || cfg.epochs <= 0 || cfg.learning_rate <= 0.0)
        throw ConfigError("fit_mlp: hyperparameters must be positive");

    const std::vector<int> classes = star_classes(y);
    MlpModel model = make_mlp(static_cast<int>(X.cols()), cfg.seed);
    AdamState adam(model);
    Rng shuffle_rng = Rng(cfg.seed).fork(0xba7c4e5u);

    std::vector<std::size_t> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), 0);

    const bool use_val = X_val != nullptr && y_val != nullptr && X_val->rows() > 0;
    double best_val_rmse = std::numeric_limits<double>::infinity();
    MlpModel best = model;
    int epochs_since_improvement = 0;

    const auto batch_rows = static_cast<std::size_t>(cfg.batch_size);
    Eigen::MatrixXd xb;
    std::vector<int> cb;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch_rows) {
            const std::size_t m = std::min(batch_rows, order.size() - start);
            xb.resize(static_cast<Eigen::Index>(m), X.cols());
            cb.resize(m);
            for (std::size_t i = 0; i < m; ++i) {
                xb.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(order[start + i]));
                cb[i] = classes[order[start + i]];
            }
            const MlpGradients g = mlp_loss_and_grad(model, xb, cb, cfg.l2);
            if (!std::isfinite(g.loss))
                throw ConvergenceError("mlp training diverged (non-finite loss)", g.loss);
            adam.step(model, g, cfg);
        }
        if (use_val) {
            const Eigen::VectorXd pred = model.predict(*X_val);
            const double val_rmse =
                rmse(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                     std::span<const double>(y_val->data(), static_cast<std::size_t>(y_val->size())));
            if (val_rmse < best_val_rmse) {
                best_val_rmse = val_rmse;
                best = model;
                epochs_since_improvement = 0;
            } else if (++epochs_since_improvement >= cfg.patience) {
                return best;
            }
        }
    }
    return use_val ? best : model;
}

// ---------------------------------------------------------------------------
// Random forest

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    std::vector<ForestModel::Node>& nodes;
    // Scratch: (value, target) pairs of the current node for one feature.
    std::vector<std::pair<double, double>> scratch;

    struct PendingNode {
        std::size_t begin, end;   // range in the index buffer
        int32_t parent;           // node to patch, -1 for root
        bool is_left;
    };

    // Builds the tree over rows[begin, end); rows is permuted in place.
    void build(std::vector<uint32_t>& rows) {
        std::vector<PendingNode> stack;
        stack.push_back({0, rows.size(), -1, false});
        while (!stack.empty()) {
            const PendingNode task = stack.back();
            stack.pop_back();
            const int32_t id = static_cast<int32_t>(nodes.size());
            nodes.emplace_back();
            if (task.parent >= 0) {
                (task.is_left ? nodes[static_cast<std::size_t>(task.parent)].left
                              : nodes[static_cast<std::size_t>(task.parent)].right) = id;
            }

            const std::size_t m = task.end - task.begin;
            double sum = 0.0, min_y = y(rows[task.begin]), max_y = min_y;
            for (std::size_t i = task.begin; i < task.end; ++i) {
                const double v = y(rows[i]);
                sum += v;
                min_y = std::min(min_y, v);
                max_y = std::max(max_y, v);
            }
            nodes[static_cast<std::size_t>(id)].value = sum / static_cast<double>(m);
            if (m <= 1 || min_y == max_y) continue;  // pure or single row

            // Best split over all features: minimize the summed child SSE;
            // ties keep the first candidate in (feature asc, threshold asc)
            // order, i.e. lower feature index then lower threshold.
            int best_feature = -1;
            double best_threshold = 0.0;
            double best_score = std::numeric_limits<double>::infinity();
            for (int f = 0; f < X.cols(); ++f) {
                scratch.clear();
                for (std::size_t i = task.begin; i < task.end; ++i)
                    scratch.emplace_back(X(rows[i], f), y(rows[i]));
                std::sort(scratch.begin(), scratch.end());
                if (scratch.front().first == scratch.back().first) continue;

                double left_sum = 0.0, left_sq = 0.0;
                double right_sum = 0.0, right_sq = 0.0;
                for (const auto& [v, t] : scratch) {
                    right_sum += t;
                    right_sq += t * t;
                }
                for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                    const auto& [v, t] = scratch[i];
                    left_sum += t;
                    left_sq += t * t;
                    right_sum -= t;
                    right_sq -= t * t;
                    if (v == scratch[i + 1].first) continue;
                    const double nl = static_cast<double>(i + 1);
                    const double nr = static_cast<double>(scratch.size() - i - 1);
                    const double score =
                        (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
                    if (score < best_score) {
                        best_score = score;
                        best_feature = f;
                        best_threshold = (v + scratch[i + 1].first) / 2.0;
                    }
                }
            }
            if (best_feature < 0) continue;  // all features constant on this node

            nodes[static_cast<std::size_t>(id)].feature = best_feature;
            nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
            const auto mid_it = std::stable_partition(
                rows.begin() + static_cast<std::ptrdiff_t>(task.begin),
                rows.begin() + static_cast<std::ptrdiff_t>(task.end),
                [&](uint32_t r) { return X(r, best_feature) <= best_threshold; });
            const std::size_t mid = static_cast<std::size_t>(mid_it - rows.begin());
            // Right child first so the left subtree is laid out depth-first.
            stack.push_back({mid, task.end, id, false});
            stack.push_back({task.begin, mid, id, true});
        }
    }
};

std::vector<ForestModel::Node> build_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          Rng rng, bool bootstrap) {
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<uint32_t> rows(n);
    if (bootstrap) {
        for (auto& r : rows) r = static_cast<uint32_t>(rng.below(n));
    } else {
        std::iota(rows.begin(), rows.end(), 0u);
    }
    std::vector<ForestModel::Node> nodes;
    nodes.reserve(2 * n);
    TreeBuilder builder{X, y, nodes, {}};
    builder.build(rows);
    return nodes;
}

}  // namespace

double ForestModel::predict_row(const Eigen::RowVectorXd& x) const {
    double sum = 0.0;
    for (const auto& tree : trees) {
        std::size_t at = 0;
        while (tree[at].feature >= 0) {
            at = static_cast<std::size_t>(x(tree[at].feature) <= tree[at].threshold
                                              ? tree[at].left
                                              : tree[at].right);
        }
        sum += tree[at].value;
    }
    return sum / static_cast<double>(trees.size());
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& X) const {
    if (trees.empty()) throw InputError("forest has no trees");
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X.row(i));
    return out;
}

ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ForestConfig& cfg) {
    if (X.rows() == 0) throw InputError("fit_forest: empty design matrix");
    if (X.rows() != y.size()) throw ShapeError("fit_forest: row/target count mismatch");
    if (cfg.n_trees <= 0) throw ConfigError("forest needs at least one tree");

    ForestModel model;
    model.seed = cfg.seed;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    const Rng master(cfg.seed);

    // Per-tree seeds come from the master seed, so the result is identical
    // for any worker count.
    const int workers = std::max(1, cfg.workers);
    if (workers == 1) {
        for (int t = 0; t < cfg.n_trees; ++t)
            model.trees[static_cast<std::size_t>(t)] =
                build_tree(X, y, master.fork(static_cast<uint64_t>(t)), cfg.bootstrap);
        return model;
    }

    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int t = next.fetch_add(1); t < cfg.n_trees; t = next.fetch_add(1)) {
                    model.trees[static_cast<std::size_t>(t)] =
                        build_tree(X, y, master.fork(static_cast<uint64_t>(t)), cfg.bootstrap);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[] = "RGMODEL1";

void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u64(std::ofstream& out, uint64_t v) { put_bytes(out, &v, sizeof v); }
void put_i32(std::ofstream& out, int32_t v) { put_bytes(out, &v, sizeof v); }
void put_f64(std::ofstream& out, double v) { put_bytes(out, &v, sizeof v); }

void put_string(std::ofstream& out, const std::string& s) {
    put_u64(out, s.size());
    put_bytes(out, s.data(), s.size());
}

void put_vector(std::ofstream& out, const Eigen::VectorXd& v) {
    put_u64(out, static_cast<uint64_t>(v.size()));
    put_bytes(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

void put_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
    put_u64(out, static_cast<uint64_t>(m.rows()));
    put_u64(out, static_cast<uint64_t>(m.cols()));
    put_bytes(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

struct Reader {
    std::ifstream in;
    std::string path;

    void get_bytes(void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in) throw SchemaError(path + ": truncated model file");
    }
    uint64_t get_u64() {
        uint64_t v;
        get_bytes(&v, sizeof v);
        return v;
    }
    int32_t get_i32() {
        int32_t v;
        get_bytes(&v, sizeof v);
        return v;
    }
    double get_f64() {
        double v;
        get_bytes(&v, sizeof v);
        return v;
    }
    std::string get_string() {
        const uint64_t n = get_u64();
        if (n > (1ull << 20)) throw SchemaError(path + ": implausible string length");
        std::string s(n, '\0');
        get_bytes(s.data(), n);
        return s;
    }
    Eigen::VectorXd get_vector() {
        const uint64_t n = get_u64();
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        get_bytes(v.data(), sizeof(double) * n);
        return v;
    }
    Eigen::MatrixXd get_matrix() {
        const uint64_t r = get_u64();
        const uint64_t c = get_u64();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        get_bytes(m.data(), sizeof(double) * r * c);
        return m;
    }
};

}  // namespace

// Grants IO access to the private standardizer fields.
class ModelReader {
public:
    static Standardizer make_standardizer(const std::array<double, 9>& means,
                                          const std::array<double, 9>& stds) {
        Standardizer s;
        s.means_ = means;
        s.stds_ = stds;
        return s;
    }
};

void save_model(const std::string& path, const SavedModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    put_bytes(out, kMagic, sizeof(kMagic) - 1);
    put_string(out, m.kind);

    put_i32(out, m.standardizer ? 1 : 0);
    if (m.standardizer) {
        for (const double v : m.standardizer->means()) put_f64(out, v);
        for (const double v : m.standardizer->stds()) put_f64(out, v);
    }

    if (const auto* lin = std::get_if<LinearModel>(&m.model)) {
        put_i32(out, 0);
        put_vector(out, lin->weights);
        put_f64(out, lin->bias);
    } else if (const auto* bayes = std::get_if<BayesianModel>(&m.model)) {
        put_i32(out, 1);
        put_vector(out, bayes->weights);
        put_f64(out, bayes->bias);
        put_f64(out, bayes->noise_precision);
        put_f64(out, bayes->weight_precision);
        put_i32(out, bayes->n_iter);
    } else if (const auto* mlp = std::get_if<MlpModel>(&m.model)) {
        put_i32(out, 2);
        put_u64(out, mlp->dims.size());
        for (const int d : mlp->dims) put_i32(out, d);
        for (std::size_t l = 0; l < mlp->weights.size(); ++l) {
            put_matrix(out, mlp->weights[l]);
            put_vector(out, mlp->biases[l]);
        }
    } else if (const auto* forest = std::get_if<ForestModel>(&m.model)) {
        put_i32(out, 3);
        put_u64(out, forest->seed);
        put_u64(out, forest->trees.size());
        for (const auto& tree : forest->trees) {
            put_u64(out, tree.size());
            for (const auto& node : tree) {
                put_i32(out, node.feature);
                put_f64(out, node.threshold);
                put_i32(out, node.left);
                put_i32(out, node.right);
                put_f64(out, node.value);
            }
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

SavedModel load_model(const std::string& path) {
    Reader r{std::ifstream(path, std::ios::binary), path};
    if (!r.in) throw IoError("cannot open " + path);
    char magic[sizeof(kMagic) - 1];
    r.get_bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw DependencyError(path + ": not a ratingraph model file");

    SavedModel m;
    m.kind = r.get_string();
    if (r.get_i32() == 1) {
        std::array<double, 9> means{}, stds{};
        for (double& v : means) v = r.get_f64();
        for (double& v : stds) v = r.get_f64();
        m.standardizer = ModelReader::make_standardizer(means, stds);
    }

    const int32_t payload = r.get_i32();
    switch (payload) {
        case 0: {
            LinearModel lin;
            lin.weights = r.get_vector();
            lin.bias = r.get_f64();
            m.model = std::move(lin);
            break;
        }
        case 1: {
            BayesianModel bayes;
            bayes.weights = r.get_vector();
            bayes.bias = r.get_f64();
            bayes.noise_precision = r.get_f64();
            bayes.weight_precision = r.get_f64();
            bayes.n_iter = r.get_i32();
            m.model = std::move(bayes);
            break;
        }
        case 2: {
            MlpModel mlp;
            const uint64_t n_dims = r.get_u64();
            mlp.dims.resize(n_dims);
            for (auto& d : mlp.dims) d = r.get_i32();
            for (std::size_t l = 0; l + 1 < n_dims; ++l) {
                mlp.weights.push_back(r.get_matrix());
                mlp.biases.push_back(r.get_vector());
            }
            m.model = std::move(mlp);
            break;
        }
        case 3: {
            ForestModel forest;
            forest.seed = r.get_u64();
            forest.trees.resize(r.get_u64());
            for (auto& tree : forest.trees) {
                tree.resize(r.get_u64());
                for (auto& node : tree) {
                    node.feature = r.get_i32();
                    node.threshold = r.get_f64();
                    node.left = r.get_i32();
                    node.right = r.get_i32();
                    node.value = r.get_f64();
                }
            }
            m.model = std::move(forest);
            break;
        }
        default:
            throw SchemaError(path + ": unknown model payload tag " + std::to_string(payload));
    }
    return m;
}

Eigen::VectorXd model_predict(const SavedModel& m, const Eigen::MatrixXd& X) {
    return std::visit([&](const auto& model) { return model.predict(X); }, m.model);
}

Eigen::MatrixXd design_matrix(const FeatureMatrix& m) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(m.size()), 9);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < 9; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.rows[i].features[j];
    return X;
}

Eigen::VectorXd target_vector(const FeatureMatrix& m) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) y(static_cast<Eigen::Index>(i)) = m.rows[i].target;
    return y;
}

}  // namespace ratingraph
