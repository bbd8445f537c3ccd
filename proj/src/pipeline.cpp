#include "ratingraph/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>

#include <json.hpp>

#include "ratingraph/evaluation.hpp"
#include "ratingraph/fusion.hpp"
#include "ratingraph/ingest.hpp"
#include "ratingraph/models.hpp"
#include "ratingraph/netstats.hpp"
#include "ratingraph/synth.hpp"

namespace fs = std::filesystem;

namespace ratingraph {

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    PipelineConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

PipelineConfig PipelineConfig::from_map(std::map<std::string, std::string> kv) {
    PipelineConfig cfg;
    cfg.kv_ = std::move(kv);
    return cfg;
}

std::string PipelineConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

std::string PipelineConfig::require(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required config key '" + key + "'");
    return it->second;
}

int64_t PipelineConfig::get_int(const std::string& key, int64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t used = 0;
        const int64_t v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an integer: '" + it->second + "'");
    }
}

double PipelineConfig::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: '" + it->second + "'");
    }
}

std::vector<std::string> PipelineConfig::get_list(const std::string& key,
                                                  const std::string& fallback) const {
    const std::string raw = get(key, fallback);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= raw.size()) {
        std::size_t pos = raw.find(',', start);
        if (pos == std::string::npos) pos = raw.size();
        std::string item = raw.substr(start, pos - start);
        const auto b = item.find_first_not_of(" \t");
        if (b != std::string::npos) {
            const auto e = item.find_last_not_of(" \t");
            out.push_back(item.substr(b, e - b + 1));
        }
        start = pos + 1;
    }
    return out;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for hashing");
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

namespace {

using nlohmann::json;

struct StageContext {
    const PipelineConfig& cfg;
    StageOptions opts;
    fs::path out;
    std::map<std::string, std::string> inputs;  // artifact name -> hash
    std::vector<std::string> outputs;

    StageContext(const PipelineConfig& c, const StageOptions& o) : cfg(c), opts(o) {
        const std::string dir = !o.out_dir.empty() ? o.out_dir : c.get("out_dir", "");
        if (dir.empty()) throw ConfigError("missing required config key 'out_dir'");
        out = dir;
        fs::create_directories(out);
        if (opts.workers == 0) opts.workers = static_cast<int>(c.get_int("workers", 1));
        if (opts.workers < 1) throw ConfigError("workers must be >= 1");
    }

    std::string artifact(const std::string& name) const { return (out / name).string(); }

    // Registers an upstream artifact, failing with the stage to run first.
    std::string input(const std::string& name, const std::string& producer) {
        const std::string path = artifact(name);
        if (!fs::exists(path))
            throw DependencyError("missing artifact '" + name + "'; run `ratingraph " + producer +
                                  "` first");
        inputs[name] = file_hash(path);
        return path;
    }

    // All artifact writes go through a temp file + rename.
    void write_artifact(const std::string& name, const std::function<void(const std::string&)>& writer) {
        const std::string final_path = artifact(name);
        const std::string tmp_path = final_path + ".tmp";
        writer(tmp_path);
        fs::rename(tmp_path, final_path);
        outputs.push_back(name);
    }

    void write_manifest(const std::string& stage) {
        json m;
        m["stage"] = stage;
        m["artifact_version"] = 1;
        json conf = json::object();
        for (const auto& [k, v] : cfg.entries()) {
            if (k == "out_dir") continue;  // run-local, would break byte-compare of reruns
            conf[k] = v;
        }
        m["config"] = conf;
        m["limit"] = opts.limit;
        m["workers"] = opts.workers;
        m["inputs"] = inputs;
        std::sort(outputs.begin(), outputs.end());
        m["outputs"] = outputs;
        write_artifact("manifest_" + stage + ".json", [&](const std::string& p) {
            std::ofstream f(p);
            if (!f) throw IoError("cannot write " + p);
            f << m.dump(2) << '\n';
        });
    }
};

void apply_limit(std::vector<ReviewEdge>& edges, int64_t limit) {
    if (limit >= 0 && static_cast<std::size_t>(limit) < edges.size())
        edges.resize(static_cast<std::size_t>(limit));
}

TrainConfig mlp_config(const PipelineConfig& cfg) {
    TrainConfig tc;
    tc.learning_rate = cfg.get_double("mlp_learning_rate", tc.learning_rate);
    tc.l2 = cfg.get_double("mlp_l2", tc.l2);
    tc.batch_size = static_cast<int>(cfg.get_int("mlp_batch_size", tc.batch_size));
    tc.epochs = static_cast<int>(cfg.get_int("mlp_epochs", tc.epochs));
    tc.patience = static_cast<int>(cfg.get_int("mlp_patience", tc.patience));
    tc.seed = static_cast<uint64_t>(cfg.get_int("seed", 0));
    return tc;
}

void canonicalize_rows(FeatureMatrix& m) {
    std::sort(m.rows.begin(), m.rows.end(), [](const FeatureRow& a, const FeatureRow& b) {
        if (a.user != b.user) return a.user < b.user;
        return a.business < b.business;
    });
}

// ---------------------------------------------------------------------------

void stage_ingest(StageContext& ctx) {
    const auto inputs = ctx.cfg.get_list("input", "");
    if (inputs.empty()) throw ConfigError("ingest: missing required config key 'input'");

    IdMap ids;
    std::vector<ReviewEdge> edges;
    for (const std::string& file : inputs) {
        if (!fs::exists(file)) throw DependencyError("ingest: input file not found: " + file);
        ctx.inputs[fs::path(file).filename().string()] = file_hash(file);

        std::ifstream probe(file);
        std::string first;
        std::getline(probe, first);
        probe.close();
        const bool is_json = first.find_first_not_of(" \t\r") != std::string::npos &&
                             first[first.find_first_not_of(" \t\r")] == '{';
        std::vector<ReviewEdge> part =
            is_json ? read_reviews_json(file, ids) : read_edges_csv(file, ids);
        edges.insert(edges.end(), part.begin(), part.end());
    }

    if (ctx.cfg.has("cutoff")) {
        const int64_t cutoff = parse_datetime(ctx.cfg.require("cutoff"));
        edges = filter_by_date(edges, cutoff);
    }
    edges = dedupe_edges(edges);
    sort_edges(edges);
    apply_limit(edges, ctx.opts.limit);

    ctx.write_artifact("edges.csv",
                       [&](const std::string& p) { write_edges_csv(p, edges, ids); });
    ctx.write_artifact("idmap.csv", [&](const std::string& p) { save_idmap(p, ids); });
    ctx.write_manifest("ingest");
}

void stage_synth(StageContext& ctx) {
    SynthConfig sc;
    sc.n_users = static_cast<uint32_t>(ctx.cfg.get_int("synth_users", 1000));
    sc.n_businesses = static_cast<uint32_t>(ctx.cfg.get_int("synth_businesses", 300));
    sc.n_edges = static_cast<uint64_t>(ctx.cfg.get_int("synth_edges", 5000));
    sc.gamma = ctx.cfg.get_double("synth_gamma", 2.5);
    sc.t_min = ctx.cfg.get_int("synth_t_min", sc.t_min);
    sc.t_max = ctx.cfg.get_int("synth_t_max", sc.t_max);
    sc.seed = static_cast<uint64_t>(ctx.cfg.get_int("seed", 1));
    if (ctx.cfg.has("synth_rating_probs")) {
        const auto probs = ctx.cfg.get_list("synth_rating_probs", "");
        if (probs.size() != 5) throw ConfigError("synth_rating_probs needs 5 comma-separated values");
        for (std::size_t k = 0; k < 5; ++k) {
            try {
                sc.rating_probs[k] = std::stod(probs[k]);
            } catch (const std::exception&) {
                throw ConfigError("synth_rating_probs: bad value '" + probs[k] + "'");
            }
        }
    }

    std::vector<ReviewEdge> edges = generate(sc);
    apply_limit(edges, ctx.opts.limit);

    // Intern every node index so handle i belongs to string "u<i>" / "b<i>".
    IdMap ids;
    for (uint32_t u = 0; u < sc.n_users; ++u) ids.intern_user("u" + std::to_string(u));
    for (uint32_t b = 0; b < sc.n_businesses; ++b) ids.intern_business("b" + std::to_string(b));

    ctx.write_artifact("edges.csv",
                       [&](const std::string& p) { write_edges_csv(p, edges, ids); });
    ctx.write_artifact("idmap.csv", [&](const std::string& p) { save_idmap(p, ids); });
    ctx.write_manifest("synth");
}

void stage_split(StageContext& ctx) {
    IdMap ids = load_idmap(ctx.input("idmap.csv", "ingest (or synth)"));
    std::vector<ReviewEdge> edges =
        read_edges_csv(ctx.input("edges.csv", "ingest (or synth)"), ids, /*lookup_only=*/true);
    sort_edges(edges);
    apply_limit(edges, ctx.opts.limit);

    const BipartiteGraph g = BipartiteGraph::build(edges);
    const TemporalSplit split = temporal_split(g, ctx.cfg.get_double("train_frac", 0.8),
                                               ctx.cfg.get_double("val_frac", 0.1));

    ctx.write_artifact("split.graph", [&](const std::string& p) { save_split(p, split); });
    ctx.write_manifest("split");
}

void stage_featurize(StageContext& ctx) {
    const IdMap ids = load_idmap(ctx.input("idmap.csv", "ingest (or synth)"));
    const TemporalSplit split = load_split(ctx.input("split.graph", "split"));

    FeatureParams params;
    params.damping = ctx.cfg.get_double("pagerank_damping", params.damping);
    params.pagerank_tol = ctx.cfg.get_double("pagerank_tol", params.pagerank_tol);
    params.pagerank_max_iter =
        static_cast<int>(ctx.cfg.get_int("pagerank_max_iter", params.pagerank_max_iter));
    params.centrality_tol = ctx.cfg.get_double("centrality_tol", params.centrality_tol);
    params.centrality_max_iter =
        static_cast<int>(ctx.cfg.get_int("centrality_max_iter", params.centrality_max_iter));

    const FeatureExtractor extractor(split.train, params);
    FeatureMatrix train = featurize(extractor, split.train.edges(), ctx.opts.workers);
    FeatureMatrix validation = featurize(extractor, split.validation.edges(), ctx.opts.workers);
    FeatureMatrix test = featurize(extractor, split.test.edges(), ctx.opts.workers);

    const Standardizer standardizer = Standardizer::fit(train);
    train = standardizer.apply(train);
    validation = standardizer.apply(validation);
    test = standardizer.apply(test);

    ctx.write_artifact("features_train.csv",
                       [&](const std::string& p) { write_features_csv(p, train, ids); });
    ctx.write_artifact("features_validation.csv",
                       [&](const std::string& p) { write_features_csv(p, validation, ids); });
    ctx.write_artifact("features_test.csv",
                       [&](const std::string& p) { write_features_csv(p, test, ids); });
    ctx.write_artifact("standardizer.csv",
                       [&](const std::string& p) { save_standardizer(p, standardizer); });

    if (ctx.cfg.has("embeddings")) {
        const std::string emb_path = ctx.cfg.require("embeddings");
        if (!fs::exists(emb_path))
            throw DependencyError("featurize: embeddings file not found: " + emb_path);
        ctx.inputs[fs::path(emb_path).filename().string()] = file_hash(emb_path);
        const EmbeddingTable table = load_embeddings(emb_path, ids);
        ctx.write_artifact("fused_train.fmat",
                           [&](const std::string& p) { save_fused(p, fuse(train, table)); });
        ctx.write_artifact("fused_validation.fmat",
                           [&](const std::string& p) { save_fused(p, fuse(validation, table)); });
        ctx.write_artifact("fused_test.fmat",
                           [&](const std::string& p) { save_fused(p, fuse(test, table)); });
    }
    ctx.write_manifest("featurize");
}

struct LoadedFeatures {
    FeatureMatrix train, validation, test;
    Eigen::MatrixXd X_train, X_val, X_test;
    Eigen::VectorXd y_train, y_val, y_test;
};

LoadedFeatures load_features(StageContext& ctx, const IdMap& ids) {
    LoadedFeatures f;
    f.train = read_features_csv(ctx.input("features_train.csv", "featurize"), ids);
    f.validation = read_features_csv(ctx.input("features_validation.csv", "featurize"), ids);
    f.test = read_features_csv(ctx.input("features_test.csv", "featurize"), ids);
    // Canonical row order: permuting the stored rows cannot change the fit.
    canonicalize_rows(f.train);
    canonicalize_rows(f.validation);
    canonicalize_rows(f.test);
    f.X_train = design_matrix(f.train);
    f.X_val = design_matrix(f.validation);
    f.X_test = design_matrix(f.test);
    f.y_train = target_vector(f.train);
    f.y_val = target_vector(f.validation);
    f.y_test = target_vector(f.test);
    return f;
}

void sort_fused(FusedMatrix& m) {
    std::vector<std::size_t> order(m.pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return m.pairs[a] < m.pairs[b];
    });
    FusedMatrix sorted;
    sorted.X.resize(m.X.rows(), m.X.cols());
    sorted.y.resize(m.y.size());
    sorted.pairs.resize(m.pairs.size());
    sorted.missing = m.missing;
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted.X.row(static_cast<Eigen::Index>(i)) = m.X.row(static_cast<Eigen::Index>(order[i]));
        sorted.y(static_cast<Eigen::Index>(i)) = m.y(static_cast<Eigen::Index>(order[i]));
        sorted.pairs[i] = m.pairs[order[i]];
    }
    m = std::move(sorted);
}

void stage_train(StageContext& ctx) {
    const IdMap ids = load_idmap(ctx.input("idmap.csv", "ingest (or synth)"));
    LoadedFeatures f = load_features(ctx, ids);
    const Standardizer standardizer =
        load_standardizer(ctx.input("standardizer.csv", "featurize"));

    const auto models = ctx.cfg.get_list("models", "baseline,linear,ridge,bayesian,mlp,forest");
    const TrainConfig tc = mlp_config(ctx.cfg);
    const uint64_t seed = static_cast<uint64_t>(ctx.cfg.get_int("seed", 0));

    for (const std::string& name : models) {
        SavedModel saved;
        saved.kind = name;
        saved.standardizer = standardizer;
        if (name == "baseline") {
            saved.model = fit_baseline(f.y_train);
        } else if (name == "linear") {
            saved.model = fit_linear(f.X_train, f.y_train);
        } else if (name == "ridge") {
            saved.model = fit_ridge(f.X_train, f.y_train, ctx.cfg.get_double("ridge_alpha", 0.0001));
        } else if (name == "bayesian") {
            saved.model = fit_bayesian(f.X_train, f.y_train);
        } else if (name == "mlp") {
            saved.model = fit_mlp(f.X_train, f.y_train, tc, &f.X_val, &f.y_val);
        } else if (name == "forest") {
            ForestConfig fc;
            fc.n_trees = static_cast<int>(ctx.cfg.get_int("forest_trees", 100));
            fc.seed = seed;
            fc.workers = ctx.opts.workers;
            saved.model = fit_forest(f.X_train, f.y_train, fc);
        } else if (name == "fused_mlp") {
            FusedMatrix ftrain = load_fused(ctx.input("fused_train.fmat", "featurize (with embeddings)"));
            FusedMatrix fval =
                load_fused(ctx.input("fused_validation.fmat", "featurize (with embeddings)"));
            sort_fused(ftrain);
            sort_fused(fval);
            saved.model = fit_fused_mlp(ftrain, tc, &fval);
        } else {
            throw ConfigError("unknown model '" + name + "' in models list");
        }
        ctx.write_artifact("model_" + name + ".bin",
                           [&](const std::string& p) { save_model(p, saved); });
    }
    ctx.write_manifest("train");
}

void stage_evaluate(StageContext& ctx) {
    const IdMap ids = load_idmap(ctx.input("idmap.csv", "ingest (or synth)"));
    LoadedFeatures f = load_features(ctx, ids);
    const auto models = ctx.cfg.get_list("models", "baseline,linear,ridge,bayesian,mlp,forest");

    std::vector<MetricsReport> reports;
    const auto add = [&](const std::string& name, const std::string& dataset,
                         const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
        reports.push_back(compute_report(
            name, dataset, std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
            std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size()))));
    };

    for (const std::string& name : models) {
        const SavedModel saved = load_model(ctx.input("model_" + name + ".bin", "train"));
        if (name == "fused_mlp") {
            FusedMatrix ftr = load_fused(ctx.input("fused_train.fmat", "featurize (with embeddings)"));
            FusedMatrix fva =
                load_fused(ctx.input("fused_validation.fmat", "featurize (with embeddings)"));
            FusedMatrix fte = load_fused(ctx.input("fused_test.fmat", "featurize (with embeddings)"));
            sort_fused(ftr);
            sort_fused(fva);
            sort_fused(fte);
            add(name, "train", model_predict(saved, ftr.X), ftr.y);
            add(name, "validation", model_predict(saved, fva.X), fva.y);
            add(name, "test", model_predict(saved, fte.X), fte.y);
        } else {
            add(name, "train", model_predict(saved, f.X_train), f.y_train);
            add(name, "validation", model_predict(saved, f.X_val), f.y_val);
            add(name, "test", model_predict(saved, f.X_test), f.y_test);
        }
    }

    ctx.write_artifact("metrics.csv",
                       [&](const std::string& p) { write_metrics_csv(p, reports); });
    ctx.write_manifest("evaluate");
}

void stage_stats(StageContext& ctx) {
    IdMap ids = load_idmap(ctx.input("idmap.csv", "ingest (or synth)"));
    std::vector<ReviewEdge> edges =
        read_edges_csv(ctx.input("edges.csv", "ingest (or synth)"), ids, /*lookup_only=*/true);
    sort_edges(edges);
    apply_limit(edges, ctx.opts.limit);
    const BipartiteGraph g = BipartiteGraph::build(edges);

    const TimeBin bin = ctx.cfg.get("stats_time_bin", "month") == "day" ? TimeBin::day : TimeBin::month;
    const TimeHistogram over_time = reviews_over_time(edges, bin);
    const Histogram deg_users = degree_histogram(g, Side::users);
    const Histogram deg_businesses = degree_histogram(g, Side::businesses);

    ctx.write_artifact("stats_degree_users.csv",
                       [&](const std::string& p) { write_histogram_csv(p, deg_users); });
    ctx.write_artifact("stats_degree_businesses.csv",
                       [&](const std::string& p) { write_histogram_csv(p, deg_businesses); });
    ctx.write_artifact("stats_ratings_per_edge.csv", [&](const std::string& p) {
        write_histogram_csv(p, rating_histogram(g, RatingMode::per_edge));
    });
    ctx.write_artifact("stats_ratings_user_avg.csv", [&](const std::string& p) {
        write_histogram_csv(p, rating_histogram(g, RatingMode::per_user_average));
    });
    ctx.write_artifact("stats_ratings_business_avg.csv", [&](const std::string& p) {
        write_histogram_csv(p, rating_histogram(g, RatingMode::per_business_average));
    });
    ctx.write_artifact("stats_components.csv", [&](const std::string& p) {
        const auto sizes = component_sizes(g);
        write_components_csv(p, sizes);
    });
    ctx.write_artifact("stats_reviews_over_time.csv",
                       [&](const std::string& p) { write_time_histogram_csv(p, over_time); });

    ctx.write_artifact("summary.txt", [&](const std::string& p) {
        std::ofstream out(p);
        if (!out) throw IoError("cannot write " + p);
        char buf[128];
        out << "users " << g.num_users() << '\n';
        out << "businesses " << g.num_businesses() << '\n';
        out << "edges " << g.num_edges() << '\n';
        std::snprintf(buf, sizeof buf, "edge_density %.17g\n", g.edge_density());
        out << buf;
        std::snprintf(buf, sizeof buf, "reviews_over_time_cv %.17g\n",
                      coefficient_of_variation(over_time));
        out << buf;
        const auto slope_line = [&](const char* label, const Histogram& h) {
            try {
                std::snprintf(buf, sizeof buf, "%s %.17g\n", label, log_log_slope(h, 5));
                out << buf;
            } catch (const StatError&) {
                out << label << " n/a\n";
            }
        };
        slope_line("degree_slope_users", deg_users);
        slope_line("degree_slope_businesses", deg_businesses);
        if (!out) throw IoError("write failed: " + p);
    });
    ctx.write_manifest("stats");
}

void stage_report(StageContext& ctx) {
    const auto reports = read_metrics_csv(ctx.input("metrics.csv", "evaluate"));
    const std::string rendered = render_tables(reports);
    ctx.write_artifact("report.txt", [&](const std::string& p) {
        std::ofstream out(p);
        if (!out) throw IoError("cannot write " + p);
        out << rendered;
    });
    std::fputs(rendered.c_str(), stdout);
    ctx.write_manifest("report");
}

}  // namespace

void run_stage(const std::string& stage, const PipelineConfig& cfg, const StageOptions& opts) {
    StageContext ctx(cfg, opts);
    if (stage == "ingest") {
        stage_ingest(ctx);
    } else if (stage == "synth") {
        stage_synth(ctx);
    } else if (stage == "split") {
        stage_split(ctx);
    } else if (stage == "featurize") {
        stage_featurize(ctx);
    } else if (stage == "train") {
        stage_train(ctx);
    } else if (stage == "evaluate") {
        stage_evaluate(ctx);
    } else if (stage == "stats") {
        stage_stats(ctx);
    } else if (stage == "report") {
        stage_report(ctx);
    } else {
        throw ConfigError("unknown stage '" + stage + "'");
    }
}

}  // namespace ratingraph
