#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rulemix/corpus.hpp"
#include "rulemix/llm_client.hpp"

namespace testutil {

inline std::filesystem::path source_dir() { return RULEMIX_SOURCE_DIR; }

inline std::filesystem::path golden_path(const std::string& name) {
    return source_dir() / "tests" / "golden" / name;
}

inline std::filesystem::path fixture_path(const std::string& name) {
    return source_dir() / "tests" / "fixtures" / name;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: ", path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

/// Fresh directory under the build tree, deleted on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("rulemix-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// The fish seed record shared with the golden prompt files.
inline rulemix::corpus::SeedRecord fish_seed() {
    const auto doc = nlohmann::json::parse(read_file(fixture_path("fish_rewrites.json")));
    const auto& seed = doc.at("seed");
    rulemix::corpus::SeedRecord record;
    record.id = seed.at("id").get<std::string>();
    record.task = seed.at("task").get<std::string>();
    record.subject = seed.at("subject").get<std::string>();
    record.question = seed.at("question").get<std::string>();
    record.choices = seed.at("choices").get<std::vector<std::string>>();
    record.answer = seed.at("answer").get<int>();
    return record;
}

/// rule_id -> published rewrite of the fish question.
inline std::map<std::string, std::string> fish_rewrites() {
    const auto doc = nlohmann::json::parse(read_file(fixture_path("fish_rewrites.json")));
    return doc.at("rewrites").get<std::map<std::string, std::string>>();
}

/// Transport returning a scripted sequence of responses; records bodies.
class ScriptedTransport : public rulemix::llm::Transport {
public:
    struct Step {
        int status = 200;
        std::string body;
    };

    explicit ScriptedTransport(std::vector<Step> steps) : steps_(std::move(steps)) {}

    rulemix::llm::HttpResponse post(const std::string&, const std::string& path,
                                    const std::string& body, const rulemix::llm::Headers& headers,
                                    std::chrono::milliseconds) override {
        std::lock_guard lock(mu_);
        paths.push_back(path);
        bodies.push_back(body);
        seen_headers.push_back(headers);
        if (calls >= steps_.size())
            throw rulemix::llm::LlmError(rulemix::llm::LlmError::Kind::Transport,
                                         "script exhausted");
        const Step& step = steps_[calls++];
        return {step.status, step.body};
    }

    std::size_t calls = 0;
    std::vector<std::string> paths;
    std::vector<std::string> bodies;
    std::vector<rulemix::llm::Headers> seen_headers;

private:
    std::vector<Step> steps_;
    std::mutex mu_;
};

/// Chat-completion body with the given content.
inline std::string chat_body(const std::string& content) {
    nlohmann::json doc;
    doc["choices"] = nlohmann::json::array(
        {nlohmann::json{{"message", nlohmann::json{{"content", content}}}}});
    return doc.dump();
}

/// Records sleep requests instead of sleeping.
struct FakeSleeper {
    std::shared_ptr<std::vector<std::chrono::milliseconds>> delays =
        std::make_shared<std::vector<std::chrono::milliseconds>>();
    void operator()(std::chrono::milliseconds d) const { delays->push_back(d); }
};

inline rulemix::llm::EndpointConfig test_endpoint(const std::string& model = "test-model") {
    rulemix::llm::EndpointConfig config;
    config.base_url = "http://localhost:1";
    config.model = model;
    config.temperature = 0.0;
    config.api_key_env = "";  // no auth header in tests
    config.max_transport_retries = 2;
    return config;
}

}  // namespace testutil
