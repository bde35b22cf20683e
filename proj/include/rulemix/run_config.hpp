#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rulemix/corpus.hpp"
#include "rulemix/llm_client.hpp"
#include "rulemix/scoring.hpp"

namespace rulemix::config {

/// Settings shared by every pipeline command. Populated from a flat
/// key = value file; API keys are named by environment variable and read
/// from the environment only.
struct RunConfig {
    std::filesystem::path seed_pool;
    corpus::PoolFormat pool_format = corpus::PoolFormat::Jsonl;
    std::filesystem::path workdir = "work";
    std::filesystem::path cache_dir;  // defaults to <workdir>/cache
    std::size_t target_n = 13000;
    std::uint64_t random_seed = 17;
    int max_attempts = 3;
    std::size_t workers = 4;
    scoring::PplScope ppl_scope = scoring::PplScope::ResponseGivenInstruction;
    int unchanged_digits = 2;
    double rate_limit_rps = 0.0;  // <= 0 disables rate limiting
    double price_per_request = 0.0;  // USD, for --dry-run cost estimates

    llm::EndpointConfig rewriter;
    llm::EndpointConfig judge;
    llm::EndpointConfig ppl;

    std::filesystem::path cache_directory() const {
        return cache_dir.empty() ? workdir / "cache" : cache_dir;
    }

    void validate() const;
};

/// Built-in defaults (rewriter temperature 1.0, judge/ppl temperature 0).
RunConfig default_run_config();

/// Parses "key = value" lines; '#' starts a comment line; unknown or
/// duplicate keys are errors. See README for the key list.
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one key=value assignment (shared by file parsing and --set).
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace rulemix::config
