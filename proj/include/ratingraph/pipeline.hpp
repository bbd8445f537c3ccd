#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ratingraph/errors.hpp"

namespace ratingraph {

// Flat key = value configuration ('#' starts a comment). Typed getters throw
// ConfigError naming the offending key.
class PipelineConfig {
public:
    static PipelineConfig load(const std::string& path);
    static PipelineConfig from_map(std::map<std::string, std::string> kv);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

struct StageOptions {
    std::string out_dir;  // overrides the config's out_dir when non-empty
    int64_t limit = -1;   // keep only the first N edges after the canonical sort
    int workers = 0;      // 0 = config value (default 1)
};

// Stage names: ingest | synth | split | featurize | train | evaluate | stats
// | report. Artifacts land in out_dir and are written atomically (temp file +
// rename); each stage writes a manifest_<stage>.json recording input hashes,
// the config, and its outputs. Throws ConfigError / DependencyError / Error
// subclasses; the CLI maps those onto exit codes 2 / 3 / 4.
void run_stage(const std::string& stage, const PipelineConfig& cfg, const StageOptions& opts = {});

// FNV-1a 64 over the file bytes, hex-encoded; used for manifest input hashes.
std::string file_hash(const std::string& path);

}  // namespace ratingraph
