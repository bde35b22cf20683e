#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rulemix/corpus.hpp"
#include "rulemix/llm_client.hpp"
#include "rulemix/rules.hpp"

namespace rulemix::scoring {

enum class PplScope { ResponseGivenInstruction, FullPair };

std::string to_string(PplScope scope);
PplScope parse_ppl_scope(std::string_view tag);  // "response-given-instruction" | "full-pair"

struct PplScore {
    double value = 0.0;
    std::size_t token_count = 0;
    PplScope scope = PplScope::ResponseGivenInstruction;
};

/// Per-token log-likelihood source. Implementations must throw
/// llm::LlmError(CapabilityMissing) when logprobs are unavailable and
/// llm::LlmError(EmptySpan) when no token lands in the scored span.
class LogprobBackend {
public:
    virtual ~LogprobBackend() = default;
    virtual std::vector<llm::TokenLogprob> logprobs(const std::string& text,
                                                    const std::string& conditioning) = 0;
};

/// Scores through an OpenAI-style completions endpoint (echo + logprobs).
class EndpointLogprobBackend : public LogprobBackend {
public:
    explicit EndpointLogprobBackend(llm::LlmClient& client) : client_(client) {}
    std::vector<llm::TokenLogprob> logprobs(const std::string& text,
                                            const std::string& conditioning) override;

private:
    llm::LlmClient& client_;
};

/// exp of the mean negative log-likelihood over the scoped tokens.
/// response-given-instruction conditions on instruction + "\n" and scores
/// the response; full-pair scores instruction + "\n" + response outright.
PplScore compute_ppl(LogprobBackend& backend, const corpus::SftPair& pair, PplScope scope);

struct JudgeScores {
    int consistency = 0;
    int correctness = 0;
    int alignment = 0;
    std::string raw_completion;
};

/// Evaluator prompt with [Original Question]/[Answer]/[Synthesis Rule]/
/// [Synthesized Question] slots still unfilled.
const std::string& judge_prompt_skeleton();

std::string build_judge_prompt(const corpus::SeedRecord& original, const rules::Rule& rule,
                               const std::string& synthesized);

/// Inverse of parse for well-formed scores; used to fabricate completions.
std::string format_judge_scores(int consistency, int correctness, int alignment);

/// Tolerant extraction: finds each dimension label followed by an integer,
/// in any order, ignoring surrounding prose and the "[Score 1-10]" template
/// echo. Throws PipelineError on a missing or out-of-range dimension.
JudgeScores parse_judge_completion(const std::string& text);

JudgeScores judge_score(llm::LlmClient& client, const corpus::SeedRecord& original,
                        const rules::Rule& rule, const std::string& synthesized,
                        int max_attempts = 3);

struct PplRow {
    std::string pair_id;
    PplScope scope = PplScope::ResponseGivenInstruction;
    double value = 0.0;
    std::size_t token_count = 0;
};

struct JudgeRow {
    std::string pair_id;
    int consistency = 0;
    int correctness = 0;
    int alignment = 0;
};

std::size_t write_ppl_rows(const std::vector<PplRow>& rows, const std::filesystem::path& path);
std::map<std::string, PplRow> load_ppl_rows(const std::filesystem::path& path);

std::size_t write_judge_rows(const std::vector<JudgeRow>& rows, const std::filesystem::path& path);
std::map<std::string, JudgeRow> load_judge_rows(const std::filesystem::path& path);

}  // namespace rulemix::scoring
