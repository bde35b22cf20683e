#include "rulemix/scoring.hpp"

#include <cmath>
#include <regex>

#include "rulemix/errors.hpp"
#include "rulemix/jsonl.hpp"

namespace rulemix::scoring {

using nlohmann::ordered_json;

std::string to_string(PplScope scope) {
    return scope == PplScope::ResponseGivenInstruction ? "response-given-instruction" : "full-pair";
}

PplScope parse_ppl_scope(std::string_view tag) {
    if (tag == "response-given-instruction") return PplScope::ResponseGivenInstruction;
    if (tag == "full-pair") return PplScope::FullPair;
    throw ConfigError("unknown ppl scope '" + std::string(tag) +
                      "' (expected response-given-instruction or full-pair)");
}

std::vector<llm::TokenLogprob> EndpointLogprobBackend::logprobs(const std::string& text,
                                                                const std::string& conditioning) {
    return client_.logprobs(text, conditioning);
}

PplScore compute_ppl(LogprobBackend& backend, const corpus::SftPair& pair, PplScope scope) {
    std::string conditioning;
    std::string text;
    if (scope == PplScope::ResponseGivenInstruction) {
        conditioning = pair.instruction + "\n";
        text = pair.response;
    } else {
        text = pair.instruction + "\n" + pair.response;
    }
    const auto table = backend.logprobs(text, conditioning);
    if (table.empty())
        throw llm::LlmError(llm::LlmError::Kind::EmptySpan,
                            "no scored tokens for pair " + pair.id);
    double total = 0.0;
    for (const auto& t : table) total += t.logprob;
    PplScore score;
    score.value = std::exp(-total / static_cast<double>(table.size()));
    score.token_count = table.size();
    score.scope = scope;
    return score;
}

std::string build_judge_prompt(const corpus::SeedRecord& original, const rules::Rule& rule,
                               const std::string& synthesized) {
    static constexpr std::string_view kSlots[4] = {"[Original Question]", "[Answer]",
                                                   "[Synthesis Rule]", "[Synthesized Question]"};
    const std::string answer = corpus::render_reference_answer(original);
    const std::string rule_text = rule.name + ": " + rule.rule_prompt;
    const std::string* values[4] = {&original.question, &answer, &rule_text, &synthesized};

    std::string prompt = judge_prompt_skeleton();
    // fill back-to-front so a filled value can never be re-substituted
    for (int i = 3; i >= 0; --i) {
        const auto pos = prompt.find(kSlots[i]);
        if (pos == std::string::npos)
            throw PipelineError("judge skeleton is missing slot " + std::string(kSlots[i]));
        prompt.replace(pos, kSlots[i].size(), *values[i]);
    }
    return prompt;
}

std::string format_judge_scores(int consistency, int correctness, int alignment) {
    return "Consistency: " + std::to_string(consistency) + "\n\nCorrectness: " +
           std::to_string(correctness) + "\n\nAlignment: " + std::to_string(alignment);
}

namespace {

int extract_dimension(const std::string& text, const char* label) {
    const std::regex pattern(std::string(label) + R"(\s*:[\s\*]*(\d{1,4}))");
    std::smatch m;
    if (!std::regex_search(text, m, pattern))
        throw PipelineError(std::string("judge completion lacks a score for ") + label);
    const int value = std::stoi(m[1].str());
    if (value < 1 || value > 10)
        throw PipelineError(std::string(label) + " score " + std::to_string(value) +
                            " is outside 1-10");
    return value;
}

}  // namespace

JudgeScores parse_judge_completion(const std::string& text) {
    JudgeScores scores;
    scores.consistency = extract_dimension(text, "Consistency");
    scores.correctness = extract_dimension(text, "Correctness");
    scores.alignment = extract_dimension(text, "Alignment");
    scores.raw_completion = text;
    return scores;
}

JudgeScores judge_score(llm::LlmClient& client, const corpus::SeedRecord& original,
                        const rules::Rule& rule, const std::string& synthesized, int max_attempts) {
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    const std::string prompt = build_judge_prompt(original, rule, synthesized);
    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        llm::CompleteOptions opts;
        if (attempt > 1) opts.cache_salt = "retry-" + std::to_string(attempt);
        const std::string completion = client.complete(prompt, opts);
        try {
            return parse_judge_completion(completion);
        } catch (const PipelineError& e) {
            last_error = e.what();
        }
    }
    throw PipelineError("judge gave no parseable scores after " + std::to_string(max_attempts) +
                        " attempts: " + last_error);
}

std::size_t write_ppl_rows(const std::vector<PplRow>& rows, const std::filesystem::path& path) {
    jsonl::Writer writer(path);
    for (const auto& row : rows) {
        ordered_json obj;
        obj["pair_id"] = row.pair_id;
        obj["scope"] = to_string(row.scope);
        obj["value"] = row.value;
        obj["token_count"] = row.token_count;
        writer.write(obj);
    }
    return writer.lines_written();
}

std::map<std::string, PplRow> load_ppl_rows(const std::filesystem::path& path) {
    std::map<std::string, PplRow> rows;
    jsonl::for_each(path, [&](std::size_t lineno, const ordered_json& obj) {
        PplRow row;
        try {
            row.pair_id = obj.at("pair_id").get<std::string>();
            row.scope = parse_ppl_scope(obj.at("scope").get<std::string>());
            row.value = obj.at("value").get<double>();
            row.token_count = obj.at("token_count").get<std::size_t>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!rows.emplace(row.pair_id, row).second)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": duplicate pair_id " +
                              row.pair_id);
    });
    return rows;
}

std::size_t write_judge_rows(const std::vector<JudgeRow>& rows, const std::filesystem::path& path) {
    jsonl::Writer writer(path);
    for (const auto& row : rows) {
        ordered_json obj;
        obj["pair_id"] = row.pair_id;
        obj["consistency"] = row.consistency;
        obj["correctness"] = row.correctness;
        obj["alignment"] = row.alignment;
        writer.write(obj);
    }
    return writer.lines_written();
}

std::map<std::string, JudgeRow> load_judge_rows(const std::filesystem::path& path) {
    std::map<std::string, JudgeRow> rows;
    jsonl::for_each(path, [&](std::size_t lineno, const ordered_json& obj) {
        JudgeRow row;
        try {
            row.pair_id = obj.at("pair_id").get<std::string>();
            row.consistency = obj.at("consistency").get<int>();
            row.correctness = obj.at("correctness").get<int>();
            row.alignment = obj.at("alignment").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        for (int v : {row.consistency, row.correctness, row.alignment})
            if (v < 1 || v > 10)
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": judge score outside 1-10");
        if (!rows.emplace(row.pair_id, row).second)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": duplicate pair_id " +
                              row.pair_id);
    });
    return rows;
}

}  // namespace rulemix::scoring
