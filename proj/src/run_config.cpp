#include "rulemix/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "rulemix/errors.hpp"
#include "rulemix/text.hpp"

namespace rulemix::config {

namespace {

std::int64_t parse_int(const std::string& key, const std::string& value) {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("config key '" + key + "' needs an integer, got '" + value + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs a number, got '" + value + "'");
    }
}

bool apply_endpoint_entry(llm::EndpointConfig& endpoint, const std::string& key,
                          const std::string& field, const std::string& value) {
    if (field == "base_url")
        endpoint.base_url = value;
    else if (field == "model")
        endpoint.model = value;
    else if (field == "temperature")
        endpoint.temperature = parse_real(key, value);
    else if (field == "max_tokens")
        endpoint.max_tokens = static_cast<int>(parse_int(key, value));
    else if (field == "api_key_env")
        endpoint.api_key_env = value;
    else if (field == "timeout_s")
        endpoint.timeout = std::chrono::seconds(parse_int(key, value));
    else if (field == "max_retries")
        endpoint.max_transport_retries = static_cast<int>(parse_int(key, value));
    else
        return false;
    return true;
}

}  // namespace

void RunConfig::validate() const {
    if (target_n < 1) throw ConfigError("target_n must be >= 1");
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (unchanged_digits < 0 || unchanged_digits > 9)
        throw ConfigError("unchanged_digits must be in [0,9]");
    rewriter.validate();
    judge.validate();
    ppl.validate();
}

RunConfig default_run_config() {
    RunConfig config;
    config.rewriter.base_url = "http://localhost:8000";
    config.rewriter.model = "gpt-4";
    config.rewriter.temperature = 1.0;
    config.judge = config.rewriter;
    config.judge.temperature = 0.0;
    config.ppl = config.judge;
    return config;
}

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "seed_pool")
        config.seed_pool = value;
    else if (key == "pool_format")
        config.pool_format = corpus::parse_pool_format(value);
    else if (key == "workdir")
        config.workdir = value;
    else if (key == "cache_dir")
        config.cache_dir = value;
    else if (key == "target_n")
        config.target_n = static_cast<std::size_t>(parse_int(key, value));
    else if (key == "random_seed")
        config.random_seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "max_attempts")
        config.max_attempts = static_cast<int>(parse_int(key, value));
    else if (key == "workers")
        config.workers = static_cast<std::size_t>(parse_int(key, value));
    else if (key == "ppl_scope")
        config.ppl_scope = scoring::parse_ppl_scope(value);
    else if (key == "unchanged_digits")
        config.unchanged_digits = static_cast<int>(parse_int(key, value));
    else if (key == "rate_limit_rps")
        config.rate_limit_rps = parse_real(key, value);
    else if (key == "price_per_request")
        config.price_per_request = parse_real(key, value);
    else if (key.rfind("rewriter.", 0) == 0) {
        if (!apply_endpoint_entry(config.rewriter, key, key.substr(9), value))
            throw ConfigError("unknown config key '" + key + "'");
    } else if (key.rfind("judge.", 0) == 0) {
        if (!apply_endpoint_entry(config.judge, key, key.substr(6), value))
            throw ConfigError("unknown config key '" + key + "'");
    } else if (key.rfind("ppl.", 0) == 0) {
        if (!apply_endpoint_entry(config.ppl, key, key.substr(4), value))
            throw ConfigError("unknown config key '" + key + "'");
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    RunConfig config = default_run_config();
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string trimmed = text::trim(line);
        const std::string_view stripped{trimmed};
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key{text::trim(stripped.substr(0, eq))};
        const std::string value{text::trim(stripped.substr(eq + 1))};
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": duplicate key '" +
                              key + "'");
        try {
            apply_config_entry(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return config;
}

}  // namespace rulemix::config
