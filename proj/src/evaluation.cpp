#include "ratingraph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ratingraph {

double mean(std::span<const double> v) {
    if (v.empty()) throw InputError("mean of an empty vector");
    double sum = 0.0;
    for (const double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

namespace {

void check_lengths(std::span<const double> predicted, std::span<const double> actual,
                   const char* what) {
    if (predicted.size() != actual.size())
        throw InputError(std::string(what) + ": length mismatch (" +
                         std::to_string(predicted.size()) + " vs " +
                         std::to_string(actual.size()) + ")");
    if (predicted.empty()) throw InputError(std::string(what) + ": empty input");
}

}  // namespace

double rmse(std::span<const double> predicted, std::span<const double> actual) {
    check_lengths(predicted, actual, "rmse");
    double ss = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(predicted.size()));
}

double relerror(std::span<const double> predicted, std::span<const double> actual) {
    check_lengths(predicted, actual, "relerror");
    double m = predicted[0];
    for (const double v : predicted) m = std::max(m, v);
    for (const double v : actual) m = std::max(m, v);
    if (!(m > 0.0)) throw InputError("relerror: max of predicted and true values is not positive");
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) abs_sum += std::abs(predicted[i] - actual[i]);
    return 100.0 * (abs_sum / static_cast<double>(predicted.size())) / m;
}

double r2_score(std::span<const double> predicted, std::span<const double> actual) {
    check_lengths(predicted, actual, "r2_score");
    const double y_bar = mean(actual);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double r = actual[i] - predicted[i];
        const double t = actual[i] - y_bar;
        ss_res += r * r;
        ss_tot += t * t;
    }
    if (ss_tot == 0.0) throw InputError("r2_score undefined: targets have zero variance");
    return 1.0 - ss_res / ss_tot;
}

MetricsReport compute_report(const std::string& model, const std::string& dataset,
                             std::span<const double> predicted, std::span<const double> actual) {
    MetricsReport r;
    r.model = model;
    r.dataset = dataset;
    r.rmse = rmse(predicted, actual);
    r.relerror = relerror(predicted, actual);
    r.r2 = r2_score(predicted, actual);
    r.n = predicted.size();
    return r;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const std::string kMetricsHeader = "model,dataset,rmse,relerror,r2,n";

}  // namespace

void write_metrics_csv(const std::string& path, std::span<const MetricsReport> reports) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << kMetricsHeader << '\n';
    for (const auto& r : reports) {
        out << r.model << ',' << r.dataset << ',' << fmt(r.rmse) << ',' << fmt(r.relerror) << ','
            << fmt(r.r2) << ',' << r.n << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<MetricsReport> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMetricsHeader) throw SchemaError(path + ": unexpected header '" + line + "'");

    std::vector<MetricsReport> reports;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        MetricsReport r;
        std::string field;
        try {
            std::getline(ss, r.model, ',');
            std::getline(ss, r.dataset, ',');
            std::getline(ss, field, ',');
            r.rmse = std::stod(field);
            std::getline(ss, field, ',');
            r.relerror = std::stod(field);
            std::getline(ss, field, ',');
            r.r2 = std::stod(field);
            std::getline(ss, field, ',');
            r.n = static_cast<std::size_t>(std::stoull(field));
        } catch (const std::exception&) {
            throw ParseError(path + ": bad metrics row", line_no);
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

std::string model_display_name(const std::string& key) {
    if (key == "baseline") return "Baseline";
    if (key == "linear") return "Linear Regression";
    if (key == "ridge") return "Ridge Regression";
    if (key == "bayesian") return "Bayesian Regression";
    if (key == "mlp") return "Neural Network";
    if (key == "forest") return "Random Forest";
    if (key == "fused_mlp") return "Fused Neural Network";
    return key;
}

std::string render_tables(std::span<const MetricsReport> reports) {
    std::ostringstream out;
    const char* datasets[] = {"train", "validation", "test"};
    const char* titles[] = {"Results on training set", "Results on validation set",
                            "Results on test set"};
    for (int d = 0; d < 3; ++d) {
        bool any = false;
        for (const auto& r : reports) any = any || r.dataset == datasets[d];
        if (!any) continue;
        out << titles[d] << '\n';
        char line[160];
        std::snprintf(line, sizeof(line), "%-24s %-16s %-16s %-16s\n", "Model", "RMSE", "RELERROR",
                      "R^2");
        out << line;
        for (const auto& r : reports) {
            if (r.dataset != datasets[d]) continue;
            std::snprintf(line, sizeof(line), "%-24s %-16.12g %-16.12g %-16.12g\n",
                          model_display_name(r.model).c_str(), r.rmse, r.relerror, r.r2);
            out << line;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace ratingraph
