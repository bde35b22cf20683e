// Regenerates the committed end-to-end fixtures: a ten-seed pool, a replay
// cassette covering every augment/score request over that pool, and nine
// synthetic eval results whose agreement summary is fixed by construction
// (54 of 57 tasks at >= 50% agreement, 15 unanimous). Run from the repo
// root: gen_fixtures [fixtures_dir].

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "rulemix/analysis.hpp"
#include "rulemix/corpus.hpp"
#include "rulemix/errors.hpp"
#include "rulemix/llm_client.hpp"
#include "rulemix/rewriter.hpp"
#include "rulemix/rules.hpp"
#include "rulemix/run_config.hpp"
#include "rulemix/scoring.hpp"
#include "rulemix/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace rulemix;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Deterministic stand-in endpoint: valid rewrites (the published fish texts
/// where available), parseable judge scores, and whitespace-token logprobs,
/// all derived from the request content alone.
class FixtureTransport : public llm::Transport {
public:
    FixtureTransport(std::string fish_question, std::map<std::string, std::string> fish_rewrites)
        : fish_question_(std::move(fish_question)), fish_rewrites_(std::move(fish_rewrites)) {}

    llm::HttpResponse post(const std::string&, const std::string& path, const std::string& body,
                           const llm::Headers&, std::chrono::milliseconds) override {
        const json request = json::parse(body);
        ordered_json reply;
        if (path == "/v1/chat/completions") {
            const std::string prompt = request.at("messages").at(0).at("content").get<std::string>();
            reply["choices"] = ordered_json::array(
                {ordered_json{{"message", ordered_json{{"content", chat_content(prompt)}}}}});
        } else if (path == "/v1/completions") {
            reply["choices"] =
                ordered_json::array({ordered_json{{"logprobs", logprob_table(request)}}});
        } else {
            throw PipelineError("fixture transport saw unexpected path " + path);
        }
        return {200, reply.dump()};
    }

private:
    std::string chat_content(const std::string& prompt) const {
        if (prompt.find("Data Synthesis Evaluator") != std::string::npos) {
            const std::uint64_t h = fnv1a(prompt);
            return scoring::format_judge_scores(1 + static_cast<int>(h % 10),
                                                1 + static_cast<int>((h / 10) % 10),
                                                1 + static_cast<int>((h / 100) % 10));
        }
        constexpr std::string_view kOpen = "#The Given Prompt#: ";
        constexpr std::string_view kClose = "\n\n#Reference Choices#:";
        const auto open = prompt.rfind(kOpen);
        const auto close = prompt.rfind(kClose);
        if (open == std::string::npos || close == std::string::npos || close <= open)
            throw PipelineError("fixture transport saw an unexpected chat prompt");
        const std::string question = prompt.substr(open + kOpen.size(), close - open - kOpen.size());
        const rules::Rule* rule = nullptr;
        for (const auto& r : rules::builtin_rules())
            if (prompt.find(r.rule_prompt) != std::string::npos) rule = &r;
        if (rule == nullptr) throw PipelineError("fixture transport could not identify the rule");
        if (question == fish_question_) return fish_rewrites_.at(rule->id);
        return "In the spirit of " + rule->name + ", ponder this: " + question +
               " A gentle twist on the familiar.";
    }

    ordered_json logprob_table(const json& request) const {
        const std::string prompt = request.at("prompt").get<std::string>();
        const std::uint64_t mix = fnv1a(prompt);  // distinct tables for identical spans
        ordered_json tokens = ordered_json::array();
        ordered_json values = ordered_json::array();
        ordered_json offsets = ordered_json::array();
        std::size_t i = 0;
        bool first = true;
        while (i < prompt.size()) {
            if (std::isspace(static_cast<unsigned char>(prompt[i])) != 0) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < prompt.size() && std::isspace(static_cast<unsigned char>(prompt[j])) == 0) ++j;
            const std::string token = prompt.substr(i, j - i);
            tokens.push_back(token);
            if (first)
                values.push_back(nullptr);
            else
                values.push_back(
                    -(0.05 + static_cast<double>((mix ^ fnv1a(token) ^ (i * 0x9e3779b9ull)) % 4000) /
                                 4000.0));
            first = false;
            offsets.push_back(i);
            i = j;
        }
        ordered_json table;
        table["tokens"] = tokens;
        table["token_logprobs"] = values;
        table["text_offset"] = offsets;
        return table;
    }

    std::string fish_question_;
    std::map<std::string, std::string> fish_rewrites_;
};

struct PoolSeed {
    const char* id;
    const char* task;
    const char* question;
    std::vector<const char*> choices;
    int answer;
};

const std::vector<PoolSeed>& invented_seeds() {
    static const std::vector<PoolSeed> seeds = {
        {"anat-0001",
         "anatomy",
         "Which organ pumps blood through the human body?",
         {"The liver", "The heart", "The lungs", "The kidneys"},
         1},
        {"anat-0002",
         "anatomy",
         "Which part of the eye controls how much light enters?",
         {"The retina", "The cornea", "The iris", "The lens"},
         2},
        {"econ-0001",
         "econometrics",
         "What does a price elasticity of demand greater than one indicate?",
         {"Inelastic demand", "Elastic demand", "Unit elasticity", "Perfectly inelastic demand"},
         1},
        {"econ-0002",
         "econometrics",
         "In a simple linear regression, what does the slope coefficient measure?",
         {"The intercept value", "The change in the outcome per unit change in the predictor",
          "The sample size", "The residual variance"},
         1},
        {"glob-0001",
         "global_facts",
         "Which continent has the largest land area?",
         {"Africa", "Asia", "Europe", "South America"},
         1},
        {"glob-0002",
         "global_facts",
         "Which ocean is the deepest on Earth?",
         {"The Atlantic Ocean", "The Indian Ocean", "The Pacific Ocean", "The Arctic Ocean"},
         2},
        {"bio-0002",
         "high_school_biology",
         "What process do plants use to turn sunlight into stored energy?",
         {"Respiration", "Photosynthesis", "Fermentation", "Transpiration"},
         1},
        {"phil-0001",
         "philosophy",
         "According to utilitarianism, what makes an action right?",
         {"Its conformity to duty", "Its consequences for overall happiness",
          "The character of the agent", "The will of the majority"},
         1},
        {"phil-0002",
         "philosophy",
         "What did Descartes take as the one indubitable truth?",
         {"That God exists", "That he was thinking", "That the world is material",
          "That knowledge is impossible"},
         1},
    };
    return seeds;
}

void write_pool(const fs::path& path, const json& fish_seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    {
        ordered_json row;
        row["id"] = fish_seed.at("id");
        row["task"] = fish_seed.at("task");
        row["question"] = fish_seed.at("question");
        row["choices"] = fish_seed.at("choices");
        row["answer"] = fish_seed.at("answer");
        out << row.dump() << '\n';
    }
    for (const auto& seed : invented_seeds()) {
        ordered_json row;
        row["id"] = seed.id;
        row["task"] = seed.task;
        row["question"] = seed.question;
        ordered_json choices = ordered_json::array();
        for (const char* choice : seed.choices) choices.push_back(choice);
        row["choices"] = choices;
        row["answer"] = seed.answer;
        out << row.dump() << '\n';
    }
}

std::size_t line_count(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

// ------------------------------------------------------------- cassette --

void record_cassette(const fs::path& fixtures, const json& fish) {
    const fs::path pool_path = fixtures / "e2e_pool.jsonl";
    const fs::path cassette = fixtures / "e2e_cassette.jsonl";
    write_pool(pool_path, fish.at("seed"));
    fs::remove(cassette);

    const auto report = corpus::load_seed_pool(pool_path, corpus::PoolFormat::Jsonl);
    if (!report.errors.empty()) throw PipelineError("generated pool failed validation");
    const auto seeds = corpus::stratified_sample(report.records, 10, 7);

    std::map<std::string, std::string> fish_rewrites;
    for (const auto& [rule_id, text] : fish.at("rewrites").items())
        fish_rewrites[rule_id] = text.get<std::string>();
    auto transport = std::make_shared<FixtureTransport>(
        fish.at("seed").at("question").get<std::string>(), std::move(fish_rewrites));

    ::setenv("OPENAI_API_KEY", "fixture", 1);
    const config::RunConfig cfg = config::default_run_config();

    llm::LlmClient rewrite_client(cfg.rewriter, transport, std::make_shared<llm::MemoryCache>());
    rewrite_client.record_to(cassette);
    rewriter::AugmentOptions options;
    options.workers = 1;  // sequential, so the cassette order is reproducible
    const auto outcome = rewriter::augment_dataset(rewrite_client, rules::builtin_rules(), seeds,
                                                   options);
    if (outcome.report.valid != 80 || !outcome.report.errors.empty())
        throw PipelineError("expected 80 valid rewrites, got " +
                            std::to_string(outcome.report.valid));

    std::vector<corpus::SftPair> order;
    for (const auto& seed : seeds) order.push_back(corpus::seed_pair(seed));
    for (const auto& rule : rules::builtin_rules())
        for (const auto& pair : outcome.datasets.at(rule.id)) order.push_back(pair);

    llm::LlmClient ppl_client(cfg.ppl, transport, std::make_shared<llm::MemoryCache>());
    ppl_client.record_to(cassette);
    scoring::EndpointLogprobBackend backend(ppl_client);
    for (const auto& pair : order) scoring::compute_ppl(backend, pair, cfg.ppl_scope);

    std::map<std::string, corpus::SeedRecord> seed_by_id;
    for (const auto& seed : seeds) seed_by_id[seed.id] = seed;
    llm::LlmClient judge_client(cfg.judge, transport, std::make_shared<llm::MemoryCache>());
    judge_client.record_to(cassette);
    for (const auto& rule : rules::builtin_rules()) {
        for (const auto& pair : outcome.datasets.at(rule.id)) {
            const auto& seed = seed_by_id.at(pair.source_seed_id);
            const auto question = corpus::question_of_pair(pair, seed);
            scoring::judge_score(judge_client, seed, rules::rule_by_id(pair.rule_id),
                                 question ? *question : pair.instruction, cfg.max_attempts);
        }
    }

    const std::size_t lines = line_count(cassette);
    if (lines != 250)
        throw PipelineError("expected 250 cassette entries, wrote " + std::to_string(lines));
    std::printf("wrote %s (10 records) and %s (%zu entries)\n", pool_path.c_str(),
                cassette.c_str(), lines);
}

// ----------------------------------------------------------- eval files --

// Per-task category patterns across the eight configs, chosen so that 15
// tasks are unanimous, 39 (econometrics among them) sit at or above 50%
// without unanimity, and 3 fall below 50%: 54/57 and 15/57 overall.
const char* pattern_for(const std::string& task, const std::set<std::string>& unanimous,
                        const std::set<std::string>& low) {
    if (unanimous.count(task) != 0) return "IIIIIIII";
    if (low.count(task) != 0) return "IIIDDDUU";
    if (task == "econometrics") return "DDDDDIIU";
    return "IIIIDDUU";
}

analysis::TaskCounts counts_for(const std::string& task, char category) {
    if (task == "econometrics") {
        if (category == 'I') return {2693, 5000};
        if (category == 'D') return {2193, 5000};  // 43.86%, a 6.14-point drop
        return {2500, 5000};
    }
    if (category == 'I') return {140, 400};  // +5.00 points over the 120/400 baseline
    if (category == 'D') return {100, 400};
    return {120, 400};
}

void write_eval(const fs::path& path, const std::string& config_id,
                const std::map<std::string, analysis::TaskCounts>& counts) {
    ordered_json doc;
    doc["config_id"] = config_id;
    ordered_json tasks;
    for (const auto& [task, c] : counts) {
        tasks[task] = ordered_json{{"correct", c.correct}, {"total", c.total}};
    }
    doc["tasks"] = tasks;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

void write_eval_fixtures(const fs::path& fixtures) {
    const auto& tasks = Taxonomy::mmlu().tasks();
    std::set<std::string> unanimous(tasks.begin(), tasks.begin() + 15);
    unanimous.erase("econometrics");
    unanimous.insert("global_facts");
    if (unanimous.size() != 15) throw PipelineError("unanimous task set is not 15 tasks");
    const std::set<std::string> low = {"us_foreign_policy", "virology", "world_religions"};

    std::map<std::string, analysis::TaskCounts> baseline;
    for (const auto& task : tasks) baseline[task] = counts_for(task, 'U');
    write_eval(fixtures / "eval_seed.json", "seed", baseline);

    const auto& rule_set = rules::builtin_rules();
    for (std::size_t c = 0; c < rule_set.size(); ++c) {
        std::map<std::string, analysis::TaskCounts> counts;
        for (const auto& task : tasks)
            counts[task] = counts_for(task, pattern_for(task, unanimous, low)[c]);
        write_eval(fixtures / ("eval_" + rule_set[c].id + ".json"), rule_set[c].id, counts);
    }

    const auto loaded_baseline = analysis::load_eval_result(fixtures / "eval_seed.json");
    std::vector<analysis::EvalResult> configs;
    for (const auto& rule : rule_set)
        configs.push_back(analysis::load_eval_result(fixtures / ("eval_" + rule.id + ".json")));
    const auto agreement = analysis::agreement(loaded_baseline, configs,
                                               analysis::AgreementLevel::Task, 2);
    if (std::abs(agreement.half_or_more - 54.0 / 57.0) > 1e-12 ||
        std::abs(agreement.unanimous - 15.0 / 57.0) > 1e-12)
        throw PipelineError("eval fixtures do not produce the 54/57, 15/57 summary");
    const std::string deltas = analysis::delta_table(loaded_baseline, configs,
                                                     analysis::AgreementLevel::Task, 2);
    if (deltas.find("global_facts,+5.00") == std::string::npos ||
        deltas.find("econometrics,-6.14") == std::string::npos)
        throw PipelineError("eval fixtures lost the +5.00 / -6.14 landmark deltas");
    std::printf("wrote eval_seed.json and 8 per-rule eval files under %s\n", fixtures.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path fixtures = argc > 1 ? argv[1] : "tests/fixtures";
    try {
        std::ifstream fish_in(fixtures / "fish_rewrites.json", std::ios::binary);
        if (!fish_in)
            throw ConfigError("cannot open " + (fixtures / "fish_rewrites.json").string());
        const json fish = json::parse(fish_in);
        record_cassette(fixtures, fish);
        write_eval_fixtures(fixtures);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gen_fixtures: %s\n", e.what());
        return 1;
    }
    return 0;
}
