#pragma once

#include <span>
#include <string>
#include <vector>

#include "ratingraph/errors.hpp"

namespace ratingraph {

// Left-to-right mean; shared by the metrics and the baseline model so that
// the train-mean predictor scores R^2 = 0.0 on its own training set exactly.
double mean(std::span<const double> v);

// sqrt(mean squared error). Empty or mismatched inputs throw InputError.
double rmse(std::span<const double> predicted, std::span<const double> actual);

// 100 * mean(|err|) / M with M the maximum over all predicted and true values
// in the evaluation set. M <= 0 throws InputError.
double relerror(std::span<const double> predicted, std::span<const double> actual);

// 1 - SS_res / SS_tot. Zero target variance throws InputError.
double r2_score(std::span<const double> predicted, std::span<const double> actual);

struct MetricsReport {
    std::string model;
    std::string dataset;  // train | validation | test
    double rmse = 0.0;
    double relerror = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport compute_report(const std::string& model, const std::string& dataset,
                             std::span<const double> predicted, std::span<const double> actual);

// Results file: "model,dataset,rmse,relerror,r2,n" rows at full precision.
void write_metrics_csv(const std::string& path, std::span<const MetricsReport> reports);
std::vector<MetricsReport> read_metrics_csv(const std::string& path);

// Human-readable display name for a model key ("ridge" -> "Ridge Regression").
std::string model_display_name(const std::string& key);

// Renders one table per dataset with Model / RMSE / RELERROR / R^2 columns.
std::string render_tables(std::span<const MetricsReport> reports);

}  // namespace ratingraph
