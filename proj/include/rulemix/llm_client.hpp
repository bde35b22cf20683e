#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rulemix::llm {

struct EndpointConfig {
    std::string base_url = "https://api.openai.com";
    std::string model = "gpt-4o";
    double temperature = 1.0;
    int max_tokens = 1024;
    std::string api_key_env = "OPENAI_API_KEY";  // key comes from the environment only
    std::chrono::milliseconds timeout{60000};
    int max_transport_retries = 4;

    void validate() const;  // throws ConfigError
};

class LlmError : public std::runtime_error {
public:
    enum class Kind {
        Transport,          // connection/timeout level, retriable
        RetriesExhausted,   // transient failures beyond the retry budget
        TerminalHttp,       // 4xx other than 429
        MalformedResponse,  // 200 with an unusable body
        CapabilityMissing,  // endpoint cannot return logprobs
        EmptySpan,          // nothing to score
        ReplayMiss,         // replay mode was asked for an unrecorded request
    };
    LlmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const std::string& base_url, const std::string& path,
                              const std::string& body, const Headers& headers,
                              std::chrono::milliseconds timeout) = 0;
};

/// Real HTTP transport (cpp-httplib).
std::shared_ptr<Transport> make_http_transport();

/// Replay-mode transport: every call is a bug. Counts attempts and throws.
class NoNetworkTransport : public Transport {
public:
    HttpResponse post(const std::string&, const std::string&, const std::string&, const Headers&,
                      std::chrono::milliseconds) override;
    std::size_t calls() const { return calls_.load(); }

private:
    std::atomic<std::size_t> calls_{0};
};

class ResponseCache {
public:
    virtual ~ResponseCache() = default;
    virtual std::optional<std::string> get(const std::string& key) = 0;
    /// Write-once: a second put for an existing key is a no-op.
    virtual void put(const std::string& key, const std::string& value,
                     const std::string& meta_json) = 0;
};

class MemoryCache : public ResponseCache {
public:
    std::optional<std::string> get(const std::string& key) override;
    void put(const std::string& key, const std::string& value, const std::string& meta_json) override;
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> entries_;
};

/// Content-addressed on-disk cache: <dir>/<k[0..1]>/<key>.json, one entry
/// per key, written atomically (temp file + rename), never overwritten.
class DiskCache : public ResponseCache {
public:
    explicit DiskCache(std::filesystem::path dir);
    std::optional<std::string> get(const std::string& key) override;
    void put(const std::string& key, const std::string& value, const std::string& meta_json) override;

private:
    std::filesystem::path entry_path(const std::string& key) const;
    std::filesystem::path dir_;
    std::mutex mu_;
};

struct CassetteEntry {
    std::string key;
    std::string kind;          // "chat" | "logprobs"
    std::string request_json;  // audit copy of the request fields
    std::string response;      // completion text, or serialized logprob table
};

void append_cassette(const std::filesystem::path& path, const CassetteEntry& entry);
std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path);

/// Loads a cassette into a memory cache for replay runs.
std::shared_ptr<MemoryCache> cache_from_cassette(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
};

std::string serialize_logprobs(const std::vector<TokenLogprob>& table);
std::vector<TokenLogprob> deserialize_logprobs(const std::string& payload);

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Token bucket over requests per second; rate <= 0 disables limiting.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second, Sleeper sleeper = {});
    void acquire();

private:
    double rate_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
    Sleeper sleeper_;
};

struct CompleteOptions {
    /// Extra key material, e.g. a retry ordinal, so a fresh sample can be
    /// requested without invalidating the base key.
    std::string cache_salt;
    bool bypass_cache = false;
};

struct ClientHooks {
    Sleeper sleeper;                  // injected in tests to observe backoff
    std::function<double()> jitter;   // uniform [0,1)
};

class LlmClient {
public:
    LlmClient(EndpointConfig config, std::shared_ptr<Transport> transport,
              std::shared_ptr<ResponseCache> cache, ClientHooks hooks = {});

    /// Single-user-message chat completion. Cache hits perform no I/O;
    /// misses retry transient failures with exponential backoff and jitter.
    std::string complete(const std::string& prompt, const CompleteOptions& options = {});

    /// Per-token log-probabilities for `text`, conditioned on (but not
    /// scoring) `conditioning`. Requires an echo+logprobs capable endpoint.
    std::vector<TokenLogprob> logprobs(const std::string& text, const std::string& conditioning);

    bool completion_cached(const std::string& prompt, const std::string& salt = {}) const;

    bool logprobs_cached(const std::string& text, const std::string& conditioning) const;

    /// Append live responses to a cassette file.
    void record_to(const std::filesystem::path& cassette_path);
    void set_rate_limiter(std::shared_ptr<RateLimiter> limiter);

    std::size_t live_requests() const { return live_requests_.load(); }
    const EndpointConfig& config() const { return config_; }

    static std::string completion_key(const EndpointConfig& config, std::string_view prompt,
                                      std::string_view salt = {});
    static std::string logprobs_key(const EndpointConfig& config, std::string_view text,
                                    std::string_view conditioning);

private:
    std::string post_with_retries(const std::string& path, const std::string& body);

    EndpointConfig config_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<RateLimiter> limiter_;
    ClientHooks hooks_;
    std::filesystem::path cassette_path_;
    std::mutex cassette_mu_;
    std::atomic<std::size_t> live_requests_{0};
};

/// Runs fn(i) for i in [0, n) on up to `width` threads. Exceptions from
/// workers are rethrown (first one wins) after all workers join.
void parallel_for(std::size_t n, std::size_t width, const std::function<void(std::size_t)>& fn);

}  // namespace rulemix::llm
