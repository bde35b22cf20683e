#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "rulemix/llm_client.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rulemix/errors.hpp"

namespace rulemix::llm {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::chrono::milliseconds kBackoffBase{250};
constexpr char kFieldSep = '\x1f';

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::chrono::milliseconds backoff_delay(int attempt, double jitter) {
    const double base = static_cast<double>(kBackoffBase.count()) * std::pow(2.0, attempt);
    return std::chrono::milliseconds(static_cast<std::int64_t>(base * (1.0 + jitter)));
}

double default_jitter() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

std::string snippet(const std::string& body) {
    return body.size() <= 200 ? body : body.substr(0, 200) + "...";
}

class HttplibTransport : public Transport {
public:
    HttpResponse post(const std::string& base_url, const std::string& path, const std::string& body,
                      const Headers& headers, std::chrono::milliseconds timeout) override {
        httplib::Client client(base_url);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
        httplib::Headers hh;
        for (const auto& [k, v] : headers) hh.emplace(k, v);
        auto result = client.Post(path, hh, body, "application/json");
        if (!result)
            throw LlmError(LlmError::Kind::Transport,
                           "transport failure: " + httplib::to_string(result.error()));
        return {result->status, result->body};
    }
};

}  // namespace

void EndpointConfig::validate() const {
    if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
        throw ConfigError("endpoint base_url must start with http:// or https://: '" + base_url + "'");
    if (model.empty()) throw ConfigError("endpoint model must not be empty");
    if (temperature < 0.0) throw ConfigError("endpoint temperature must be >= 0");
    if (max_tokens < 1) throw ConfigError("endpoint max_tokens must be >= 1");
    if (timeout.count() <= 0) throw ConfigError("endpoint timeout must be positive");
    if (max_transport_retries < 0) throw ConfigError("endpoint max_transport_retries must be >= 0");
}

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

HttpResponse NoNetworkTransport::post(const std::string&, const std::string& path, const std::string&,
                                      const Headers&, std::chrono::milliseconds) {
    calls_.fetch_add(1);
    throw LlmError(LlmError::Kind::ReplayMiss,
                   "replay mode attempted a network request to " + path +
                       " — the cassette is missing this entry");
}

std::optional<std::string> MemoryCache::get(const std::string& key) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void MemoryCache::put(const std::string& key, const std::string& value, const std::string&) {
    std::lock_guard lock(mu_);
    entries_.emplace(key, value);  // write-once: emplace keeps the first value
}

std::size_t MemoryCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path DiskCache::entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> DiskCache::get(const std::string& key) {
    const auto path = entry_path(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        json entry = json::parse(in);
        return entry.at("completion").get<std::string>();
    } catch (const json::exception&) {
        return std::nullopt;  // unreadable entry behaves like a miss
    }
}

void DiskCache::put(const std::string& key, const std::string& value, const std::string& meta_json) {
    std::lock_guard lock(mu_);
    const auto path = entry_path(key);
    if (std::filesystem::exists(path)) return;  // write-once
    std::filesystem::create_directories(path.parent_path());
    ordered_json entry;
    entry["key"] = key;
    entry["completion"] = value;
    entry["meta"] = meta_json.empty() ? json::object() : json::parse(meta_json);
    entry["timestamp"] =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
            .count();
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw PipelineError("cannot write cache entry " + tmp);
        out << entry.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

void append_cassette(const std::filesystem::path& path, const CassetteEntry& entry) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw PipelineError("cannot append cassette " + path.string());
    ordered_json obj;
    obj["key"] = entry.key;
    obj["kind"] = entry.kind;
    obj["request"] = json::parse(entry.request_json);
    obj["response"] = entry.response;
    out << obj.dump() << '\n';
}

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open cassette " + path.string());
    std::vector<CassetteEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            json obj = json::parse(line);
            entries.push_back({obj.at("key").get<std::string>(), obj.at("kind").get<std::string>(),
                               obj.at("request").dump(), obj.at("response").get<std::string>()});
        } catch (const json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return entries;
}

std::shared_ptr<MemoryCache> cache_from_cassette(const std::filesystem::path& path) {
    auto cache = std::make_shared<MemoryCache>();
    for (const auto& entry : load_cassette(path)) cache->put(entry.key, entry.response, "{}");
    return cache;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw PipelineError("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string serialize_logprobs(const std::vector<TokenLogprob>& table) {
    json arr = json::array();
    for (const auto& t : table) arr.push_back(json::array({t.token, t.logprob}));
    return arr.dump();
}

std::vector<TokenLogprob> deserialize_logprobs(const std::string& payload) {
    std::vector<TokenLogprob> out;
    json arr = json::parse(payload);
    for (const auto& item : arr) out.push_back({item.at(0).get<std::string>(), item.at(1).get<double>()});
    return out;
}

RateLimiter::RateLimiter(double requests_per_second, Sleeper sleeper)
    : rate_(requests_per_second),
      tokens_(requests_per_second > 0 ? requests_per_second : 0),
      last_(std::chrono::steady_clock::now()),
      sleeper_(sleeper ? std::move(sleeper) : default_sleep) {}

void RateLimiter::acquire() {
    if (rate_ <= 0) return;
    while (true) {
        std::chrono::milliseconds wait{0};
        {
            std::lock_guard lock(mu_);
            const auto now = std::chrono::steady_clock::now();
            const double elapsed = std::chrono::duration<double>(now - last_).count();
            last_ = now;
            tokens_ = std::min(rate_, tokens_ + elapsed * rate_);
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::milliseconds(
                static_cast<std::int64_t>(std::ceil((1.0 - tokens_) / rate_ * 1000.0)));
        }
        sleeper_(wait);
    }
}

LlmClient::LlmClient(EndpointConfig config, std::shared_ptr<Transport> transport,
                     std::shared_ptr<ResponseCache> cache, ClientHooks hooks)
    : config_(std::move(config)), transport_(std::move(transport)), cache_(std::move(cache)),
      hooks_(std::move(hooks)) {
    config_.validate();
    if (!hooks_.sleeper) hooks_.sleeper = default_sleep;
    if (!hooks_.jitter) hooks_.jitter = default_jitter;
}

void LlmClient::record_to(const std::filesystem::path& cassette_path) { cassette_path_ = cassette_path; }

void LlmClient::set_rate_limiter(std::shared_ptr<RateLimiter> limiter) { limiter_ = std::move(limiter); }

std::string LlmClient::completion_key(const EndpointConfig& config, std::string_view prompt,
                                      std::string_view salt) {
    std::string material = "chat";
    material += kFieldSep;
    material += config.model;
    material += kFieldSep;
    material += format_double(config.temperature);
    material += kFieldSep;
    material += prompt;
    if (!salt.empty()) {
        material += kFieldSep;
        material += salt;
    }
    return sha256_hex(material);
}

std::string LlmClient::logprobs_key(const EndpointConfig& config, std::string_view text,
                                    std::string_view conditioning) {
    std::string material = "logprobs";
    material += kFieldSep;
    material += config.model;
    material += kFieldSep;
    material += conditioning;
    material += '\x1e';
    material += text;
    return sha256_hex(material);
}

bool LlmClient::completion_cached(const std::string& prompt, const std::string& salt) const {
    return cache_->get(completion_key(config_, prompt, salt)).has_value();
}

bool LlmClient::logprobs_cached(const std::string& text, const std::string& conditioning) const {
    return cache_->get(logprobs_key(config_, text, conditioning)).has_value();
}

std::string LlmClient::post_with_retries(const std::string& path, const std::string& body) {
    Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0')
            throw ConfigError("environment variable " + config_.api_key_env +
                              " is not set (required for live requests)");
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    for (int attempt = 0;; ++attempt) {
        if (limiter_) limiter_->acquire();
        live_requests_.fetch_add(1);
        std::string reason;
        try {
            HttpResponse resp = transport_->post(config_.base_url, path, body, headers, config_.timeout);
            if (resp.status == 200) return resp.body;
            if (resp.status == 429 || resp.status >= 500) {
                reason = "HTTP " + std::to_string(resp.status);
            } else {
                throw LlmError(LlmError::Kind::TerminalHttp,
                               "HTTP " + std::to_string(resp.status) + ": " + snippet(resp.body));
            }
        } catch (const LlmError& e) {
            if (e.kind() != LlmError::Kind::Transport) throw;
            reason = e.what();
        }
        if (attempt >= config_.max_transport_retries)
            throw LlmError(LlmError::Kind::RetriesExhausted,
                           "gave up after " + std::to_string(attempt + 1) + " attempts: " + reason);
        hooks_.sleeper(backoff_delay(attempt, hooks_.jitter()));
    }
}

std::string LlmClient::complete(const std::string& prompt, const CompleteOptions& options) {
    const std::string key = completion_key(config_, prompt, options.cache_salt);
    if (!options.bypass_cache) {
        if (auto hit = cache_->get(key)) return *hit;
    }

    ordered_json request;
    request["model"] = config_.model;
    request["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
    request["temperature"] = config_.temperature;
    request["max_tokens"] = config_.max_tokens;

    const std::string body = post_with_retries("/v1/chat/completions", request.dump());
    std::string content;
    try {
        json parsed = json::parse(body);
        content = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw LlmError(LlmError::Kind::MalformedResponse,
                       std::string("unusable completion body: ") + e.what() + ": " + snippet(body));
    }

    ordered_json meta;
    meta["model"] = config_.model;
    meta["temperature"] = config_.temperature;
    cache_->put(key, content, meta.dump());

    if (!cassette_path_.empty()) {
        ordered_json req_audit;
        req_audit["model"] = config_.model;
        req_audit["temperature"] = config_.temperature;
        req_audit["prompt"] = prompt;
        if (!options.cache_salt.empty()) req_audit["salt"] = options.cache_salt;
        std::lock_guard lock(cassette_mu_);
        append_cassette(cassette_path_, {key, "chat", req_audit.dump(), content});
    }
    return content;
}

std::vector<TokenLogprob> LlmClient::logprobs(const std::string& text, const std::string& conditioning) {
    if (text.empty()) throw LlmError(LlmError::Kind::EmptySpan, "empty scored span");
    const std::string key = logprobs_key(config_, text, conditioning);
    if (auto hit = cache_->get(key)) return deserialize_logprobs(*hit);

    ordered_json request;
    request["model"] = config_.model;
    request["prompt"] = conditioning + text;
    request["max_tokens"] = 0;
    request["echo"] = true;
    request["logprobs"] = 0;
    request["temperature"] = 0.0;

    const std::string body = post_with_retries("/v1/completions", request.dump());
    std::vector<TokenLogprob> table;
    try {
        json parsed = json::parse(body);
        const json& choice = parsed.at("choices").at(0);
        if (!choice.contains("logprobs") || choice["logprobs"].is_null())
            throw LlmError(LlmError::Kind::CapabilityMissing,
                           "endpoint returned no logprobs for model " + config_.model);
        const json& lp = choice["logprobs"];
        const auto& tokens = lp.at("tokens");
        const auto& values = lp.at("token_logprobs");
        const auto& offsets = lp.at("text_offset");
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (values.at(i).is_null()) continue;  // first token has no context
            if (offsets.at(i).get<std::size_t>() < conditioning.size()) continue;
            table.push_back({tokens.at(i).get<std::string>(), values.at(i).get<double>()});
        }
    } catch (const json::exception& e) {
        throw LlmError(LlmError::Kind::MalformedResponse,
                       std::string("unusable logprobs body: ") + e.what() + ": " + snippet(body));
    }
    if (table.empty())
        throw LlmError(LlmError::Kind::EmptySpan, "scored span produced no tokens with logprobs");

    cache_->put(key, serialize_logprobs(table), "{}");
    if (!cassette_path_.empty()) {
        ordered_json req_audit;
        req_audit["model"] = config_.model;
        req_audit["conditioning"] = conditioning;
        req_audit["text"] = text;
        std::lock_guard lock(cassette_mu_);
        append_cassette(cassette_path_, {key, "logprobs", req_audit.dump(), serialize_logprobs(table)});
    }
    return table;
}

void parallel_for(std::size_t n, std::size_t width, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    width = std::max<std::size_t>(1, std::min(width, n));
    if (width == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> workers;
    workers.reserve(width);
    for (std::size_t w = 0; w < width; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rulemix::llm
