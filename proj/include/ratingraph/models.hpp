#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ratingraph/features.hpp"

namespace ratingraph {

// Closed-form linear family; an empty weight vector denotes the constant
// (baseline) predictor.
struct LinearModel {
    Eigen::VectorXd weights;
    double bias = 0.0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Linear model with the noise/weight precisions estimated alongside it.
struct BayesianModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    double noise_precision = 0.0;   // alpha
    double weight_precision = 0.0;  // lambda
    int n_iter = 0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Four Gamma hyperprior shape/rate constants of the evidence approximation.
struct BayesianHyper {
    double alpha_shape = 1e-6;
    double alpha_rate = 1e-6;
    double lambda_shape = 1e-6;
    double lambda_rate = 1e-6;
};

struct TrainConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double l2 = 0.0001;
    int batch_size = 200;
    int epochs = 30;
    int patience = 5;  // early-stop patience on validation RMSE
    uint64_t seed = 0;
};

// Classifier over the 5 star classes, evaluated as a regressor through the
// softmax expectation sum_k k * p_k.
struct MlpModel {
    std::vector<int> dims;  // {input, 200, 40, 8, 5}
    std::vector<Eigen::MatrixXd> weights;  // weights[l]: dims[l+1] x dims[l]
    std::vector<Eigen::VectorXd> biases;

    int input_dim() const { return dims.empty() ? 0 : dims.front(); }

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const;  // n x 5
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;        // expectation in [1,5]
};

struct MlpGradients {
    double loss = 0.0;
    std::vector<Eigen::MatrixXd> weight_grads;
    std::vector<Eigen::VectorXd> bias_grads;
};

struct ForestConfig {
    int n_trees = 100;
    uint64_t seed = 0;
    bool bootstrap = true;  // test hook; production always resamples
    int workers = 1;
};

// Bagged CART regression trees: every feature considered at every split,
// best split by variance reduction, grown to purity (min leaf size 1).
struct ForestModel {
    struct Node {
        int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int32_t left = -1;
        int32_t right = -1;
        double value = 0.0;
    };

    std::vector<std::vector<Node>> trees;
    uint64_t seed = 0;

    double predict_row(const Eigen::RowVectorXd& x) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Constant train-mean predictor. Empty targets throw InputError.
LinearModel fit_baseline(const Eigen::VectorXd& y);

// Ordinary least squares via complete orthogonal decomposition; the minimum-
// norm solution breaks ties on rank-deficient inputs.
LinearModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Squared loss + alpha * |w|^2 (bias unpenalized), solved by the augmented
// normal equations. alpha < 0 throws ConfigError; alpha == 0 delegates to
// fit_linear.
LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha = 0.0001);

// Full-batch gradient-descent solver for the same ridge objective; kept as an
// independent cross-check of the closed form.
LinearModel fit_ridge_gd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                         int iterations = 20000, double learning_rate = 0.5);

// Evidence-approximation Bayesian linear regression (Gaussian weight prior,
// Gamma hyperpriors); returns the posterior-mean weights. Throws
// ConvergenceError when the weight update has not settled after max_iter.
BayesianModel fit_bayesian(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           BayesianHyper hyper = {}, int max_iter = 300, double tol = 1e-4);

// Fresh network with He-initialized weights.
MlpModel make_mlp(int input_dim, uint64_t seed);

// Cross-entropy + l2 * sum W^2 loss and its analytic gradients on one batch;
// exposed so finite-difference checks can target the exact training loss.
MlpGradients mlp_loss_and_grad(const MlpModel& model, const Eigen::MatrixXd& X,
                               const std::vector<int>& classes, double l2);

// Adam / minibatch training on integer star targets (1..5). When validation
// data is given, keeps the epoch snapshot with the best validation RMSE and
// stops after cfg.patience epochs without improvement. NaN loss throws
// ConvergenceError.
MlpModel fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& cfg,
                 const Eigen::MatrixXd* X_val = nullptr, const Eigen::VectorXd* y_val = nullptr);

ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ForestConfig& cfg = {});

// Tagged model wrapper for serialization and uniform prediction.
struct SavedModel {
    std::string kind;  // baseline | linear | ridge | bayesian | mlp | forest | fused_mlp
    std::variant<LinearModel, BayesianModel, MlpModel, ForestModel> model;
    std::optional<Standardizer> standardizer;
};

// Versioned binary container; load + predict reproduces the saved model's
// predictions bit-exactly.
void save_model(const std::string& path, const SavedModel& m);
SavedModel load_model(const std::string& path);

// Dispatching predict; width mismatches throw ShapeError.
Eigen::VectorXd model_predict(const SavedModel& m, const Eigen::MatrixXd& X);

// FeatureMatrix -> dense design matrix / target vector.
Eigen::MatrixXd design_matrix(const FeatureMatrix& m);
Eigen::VectorXd target_vector(const FeatureMatrix& m);

}  // namespace ratingraph
