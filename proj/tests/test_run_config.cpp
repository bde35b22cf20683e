#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "rulemix/errors.hpp"
#include "rulemix/run_config.hpp"

using namespace rulemix;
using namespace rulemix::config;
using testutil::TempDir;

TEST_CASE("defaults are sane and validate") {
    const auto config = default_run_config();
    CHECK(config.target_n == 13000);
    CHECK(config.max_attempts == 3);
    CHECK(config.ppl_scope == scoring::PplScope::ResponseGivenInstruction);
    CHECK(config.unchanged_digits == 2);
    CHECK(config.rewriter.temperature == 1.0);
    CHECK(config.judge.temperature == 0.0);
    CHECK(config.ppl.temperature == 0.0);
    CHECK(config.cache_directory() == std::filesystem::path("work") / "cache");
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("config files parse flat keys, comments, and endpoint prefixes") {
    TempDir dir("cfg");
    const auto path = dir.path() / "run.conf";
    std::ofstream(path) << R"(# pipeline settings
seed_pool = /data/pool.jsonl
pool_format = mmlu-csv
workdir = /tmp/runs/a

target_n = 250
random_seed = 99
workers = 2
ppl_scope = full-pair
rate_limit_rps = 1.5

rewriter.base_url = https://llm.example.com
rewriter.model = rewriter-large
rewriter.temperature = 0.9
rewriter.api_key_env = EXAMPLE_KEY
judge.model = judge-model
judge.timeout_s = 120
ppl.max_retries = 7
)";
    const auto config = load_run_config(path);
    CHECK(config.seed_pool == "/data/pool.jsonl");
    CHECK(config.pool_format == corpus::PoolFormat::MmluCsv);
    CHECK(config.workdir == "/tmp/runs/a");
    CHECK(config.cache_directory() == std::filesystem::path("/tmp/runs/a") / "cache");
    CHECK(config.target_n == 250);
    CHECK(config.random_seed == 99);
    CHECK(config.workers == 2);
    CHECK(config.ppl_scope == scoring::PplScope::FullPair);
    CHECK(config.rate_limit_rps == 1.5);
    CHECK(config.rewriter.base_url == "https://llm.example.com");
    CHECK(config.rewriter.model == "rewriter-large");
    CHECK(config.rewriter.temperature == 0.9);
    CHECK(config.rewriter.api_key_env == "EXAMPLE_KEY");
    CHECK(config.judge.model == "judge-model");
    CHECK(config.judge.timeout == std::chrono::seconds(120));
    CHECK(config.ppl.max_transport_retries == 7);
    // Untouched endpoints keep their defaults.
    CHECK(config.judge.base_url == "http://localhost:8000");
}

TEST_CASE("config parse errors carry the line number") {
    TempDir dir("cfgbad");
    const auto path = dir.path() / "run.conf";

    std::ofstream(path) << "target_n = 10\nnot a key value line\n";
    try {
        load_run_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    std::ofstream(path) << "mystery_key = 1\n";
    CHECK_THROWS_AS(load_run_config(path), ConfigError);

    std::ofstream(path) << "target_n = 10\ntarget_n = 20\n";
    try {
        load_run_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("duplicate key") != std::string::npos);
    }

    std::ofstream(path) << "target_n = ten\n";
    CHECK_THROWS_AS(load_run_config(path), ConfigError);

    std::ofstream(path) << "rewriter.volume = 11\n";
    CHECK_THROWS_AS(load_run_config(path), ConfigError);

    CHECK_THROWS_AS(load_run_config(dir.path() / "missing.conf"), ConfigError);
}

TEST_CASE("apply_config_entry powers --set overrides") {
    auto config = default_run_config();
    apply_config_entry(config, "target_n", "42");
    CHECK(config.target_n == 42);
    apply_config_entry(config, "judge.temperature", "0.25");
    CHECK(config.judge.temperature == 0.25);
    apply_config_entry(config, "unchanged_digits", "3");
    CHECK(config.unchanged_digits == 3);
    CHECK_THROWS_AS(apply_config_entry(config, "nope", "1"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(config, "workers", "many"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(config, "pool_format", "xml"), ConfigError);
}

TEST_CASE("validation bounds the numeric settings") {
    auto config = default_run_config();
    config.target_n = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = default_run_config();
    config.max_attempts = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = default_run_config();
    config.workers = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = default_run_config();
    config.unchanged_digits = 10;
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = default_run_config();
    config.rewriter.base_url = "ftp://wrong";
    CHECK_THROWS_AS(config.validate(), ConfigError);
}
