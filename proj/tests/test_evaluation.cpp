#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "ratingraph/evaluation.hpp"
#include "ratingraph/models.hpp"
#include "ratingraph/rng.hpp"

using namespace ratingraph;

namespace {
std::vector<double> vec(std::initializer_list<double> v) { return v; }
}  // namespace

TEST_CASE("rmse identities") {
    CHECK(rmse(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
    CHECK(rmse(vec({3, 3}), vec({1, 5})) == 2.0);
    CHECK(rmse(vec({0, 0, 0, 0}), vec({1, 1, 1, 1})) == 1.0);
    CHECK_THROWS_AS(rmse(vec({1}), vec({1, 2})), InputError);
    CHECK_THROWS_AS(rmse({}, {}), InputError);
}

TEST_CASE("relerror identities") {
    CHECK(relerror(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
    CHECK(relerror(vec({3, 3}), vec({1, 5})) == 40.0);  // 100 * mean(2,2) / max 5
    CHECK_THROWS_AS(relerror(vec({-1, -2}), vec({-3, -4})), InputError);
}

TEST_CASE("relerror is scale consistent") {
    Rng rng(3);
    std::vector<double> yhat, y;
    for (int i = 0; i < 50; ++i) {
        yhat.push_back(1.0 + 4.0 * rng.uniform());
        y.push_back(1.0 + 4.0 * rng.uniform());
    }
    const double base = relerror(yhat, y);
    for (double& v : yhat) v *= 7.5;
    for (double& v : y) v *= 7.5;
    CHECK(relerror(yhat, y) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("relerror stays within [0, 100] for positive data") {
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> yhat, y;
        for (int i = 0; i < 30; ++i) {
            yhat.push_back(0.1 + 5.0 * rng.uniform());
            y.push_back(0.1 + 5.0 * rng.uniform());
        }
        const double r = relerror(yhat, y);
        CHECK(r >= 0.0);
        CHECK(r <= 100.0);
    }
}

TEST_CASE("r2 identities") {
    CHECK(r2_score(vec({1, 2, 3}), vec({1, 2, 3})) == 1.0);
    // Predicting the mean everywhere scores exactly 0.
    CHECK(r2_score(vec({3, 3}), vec({1, 5})) == 0.0);
    CHECK(r2_score(vec({2, 2, 4, 4}), vec({1, 2, 3, 4})) == 1.0 - 2.0 / 5.0);
    CHECK_THROWS_AS(r2_score(vec({1, 2}), vec({3, 3})), InputError);  // zero target variance
}

TEST_CASE("baseline r2 on its own training targets is exactly 0") {
    Rng rng(9);
    Eigen::VectorXd y(101);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = 1.0 + rng.below(5);
    const LinearModel baseline = fit_baseline(y);
    const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(y.size(), 9);
    const Eigen::VectorXd pred = baseline.predict(X);
    const double r2 = r2_score({pred.data(), static_cast<std::size_t>(pred.size())},
                               {y.data(), static_cast<std::size_t>(y.size())});
    CHECK(r2 == 0.0);
}

TEST_CASE("rmse is invariant under permutation of pairs") {
    Rng rng(5);
    std::vector<double> yhat, y;
    for (int i = 0; i < 64; ++i) {
        yhat.push_back(rng.uniform() * 5);
        y.push_back(rng.uniform() * 5);
    }
    const double base = rmse(yhat, y);

    std::vector<std::size_t> order(yhat.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<double> ph, pa;
    for (const std::size_t i : order) {
        ph.push_back(yhat[i]);
        pa.push_back(y[i]);
    }
    CHECK(rmse(ph, pa) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("rmse^2 * n equals the sum of squared residuals") {
    Rng rng(6);
    std::vector<double> yhat, y;
    double ss = 0.0;
    for (int i = 0; i < 77; ++i) {
        yhat.push_back(rng.uniform() * 5);
        y.push_back(rng.uniform() * 5);
        ss += (yhat.back() - y.back()) * (yhat.back() - y.back());
    }
    const double r = rmse(yhat, y);
    CHECK(std::abs(r * r * 77 - ss) / ss < 1e-9);
}

TEST_CASE("metrics csv round-trips") {
    testing::TmpDir tmp("metrics_io");
    std::vector<MetricsReport> reports{
        {"baseline", "train", 1.50142049076, 25.7312431633, 0.0, 599133},
        {"forest", "test", 1.19281377927, 18.7137709175, 0.335125985417, 73730},
    };
    write_metrics_csv(tmp.file("metrics.csv"), reports);
    const auto loaded = read_metrics_csv(tmp.file("metrics.csv"));
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0] == reports[0]);
    CHECK(loaded[1] == reports[1]);
}

TEST_CASE("render_tables groups by dataset with display names") {
    std::vector<MetricsReport> reports{
        {"baseline", "train", 1.5, 25.7, 0.0, 100},
        {"mlp", "train", 1.26, 18.8, 0.29, 100},
        {"baseline", "test", 1.46, 24.7, -0.0008, 50},
    };
    const std::string out = render_tables(reports);
    CHECK(out.find("Results on training set") != std::string::npos);
    CHECK(out.find("Results on test set") != std::string::npos);
    CHECK(out.find("Neural Network") != std::string::npos);
    CHECK(out.find("Baseline") != std::string::npos);
    CHECK(out.find("validation") == std::string::npos);  // absent dataset, no table
}
