#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratingraph/pipeline.hpp"

namespace {

struct Args {
    std::string config_path;
    std::string out_dir;
    int64_t limit = -1;
    int workers = 0;
    std::vector<std::string> overrides;
};

void add_stage(CLI::App& app, const std::string& name, const std::string& description,
               std::vector<std::pair<std::string, Args>>& invocations) {
    CLI::App* sub = app.add_subcommand(name, description);
    auto args = std::make_shared<Args>();
    sub->add_option("-c,--config", args->config_path, "pipeline config file (key = value lines)");
    sub->add_option("-o,--out", args->out_dir, "output directory (overrides config out_dir)");
    sub->add_option("--limit", args->limit, "keep only the first N edges after sorting");
    sub->add_option("--workers", args->workers, "worker threads for parallel stages");
    sub->add_option("--set", args->overrides, "override a config key, e.g. --set seed=7")
        ->take_all();
    sub->callback([&invocations, name, args]() { invocations.emplace_back(name, *args); });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ratingraph: review-graph star rating prediction pipeline"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, Args>> invocations;
    add_stage(app, "ingest", "parse raw reviews into the edge interchange format", invocations);
    add_stage(app, "synth", "generate a synthetic review graph", invocations);
    add_stage(app, "split", "build the temporal train/validation/test split", invocations);
    add_stage(app, "featurize", "extract and standardize the 9 pair features", invocations);
    add_stage(app, "train", "train the configured models", invocations);
    add_stage(app, "evaluate", "compute RMSE / RELERROR / R^2 for each model", invocations);
    add_stage(app, "stats", "descriptive graph statistics", invocations);
    add_stage(app, "report", "render metric tables from metrics.csv", invocations);

    CLI11_PARSE(app, argc, argv);

    const auto& [stage, args] = invocations.front();
    try {
        ratingraph::PipelineConfig cfg = args.config_path.empty()
                                             ? ratingraph::PipelineConfig::from_map({})
                                             : ratingraph::PipelineConfig::load(args.config_path);
        for (const std::string& kv : args.overrides) {
            const std::size_t eq = kv.find('=');
            if (eq == std::string::npos)
                throw ratingraph::ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        ratingraph::StageOptions opts;
        opts.out_dir = args.out_dir;
        opts.limit = args.limit;
        opts.workers = args.workers;
        ratingraph::run_stage(stage, cfg, opts);
        return 0;
    } catch (const ratingraph::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ratingraph::DependencyError& e) {
        std::fprintf(stderr, "dependency error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
