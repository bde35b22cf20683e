#pragma once

#include <map>
#include <string>
#include <vector>

#include "rulemix/corpus.hpp"
#include "rulemix/rules.hpp"

namespace rulemix::llm {
class LlmClient;
}

namespace rulemix::rewriter {

struct RewritePrompt {
    std::string rule_id;
    std::string seed_id;
    std::string full_text;
};

/// Byte-stable assembly of the rewriter prompt for one (rule, seed) pair.
RewritePrompt build_rewrite_prompt(const rules::Rule& rule, const corpus::SeedRecord& record);

struct Validation {
    bool valid = false;
    std::vector<std::string> reasons;
    int added_word_count = 0;  // wordcount(candidate) - wordcount(original question)
};

/// Total function; never throws. The 10-20 added-words band from the prompt
/// is reported via added_word_count but is not a rejection criterion.
Validation validate_rewrite(const corpus::SeedRecord& original, const std::string& candidate);

/// Drops a leading "#Rewritten Prompt#:" echo and trims.
std::string extract_rewrite(const std::string& completion);

enum class Verdict { Valid, Rejected };

struct RewriteResult {
    std::string seed_id;
    std::string rule_id;
    std::string rewritten_instruction;  // question text only; empty when rejected
    std::string raw_completion;         // last completion received
    int attempts = 0;
    Verdict verdict = Verdict::Rejected;
    std::vector<std::string> reasons;  // one per failed attempt, "attempt N: ..." prefixed
    int added_word_count = 0;
};

/// Calls the endpoint up to max_attempts times, re-validating each candidate.
/// Retries bypass the first attempt's cache slot via a per-attempt salt so an
/// invalid cached completion cannot recur forever.
RewriteResult rewrite_one(llm::LlmClient& client, const rules::Rule& rule,
                          const corpus::SeedRecord& record, int max_attempts = 3);

struct AugmentOptions {
    int max_attempts = 3;
    std::size_t workers = 4;
    bool dry_run = false;  // count uncached (seed, rule) pairs; no requests
};

struct AugmentReport {
    std::size_t pairs_total = 0;
    std::size_t pending_requests = 0;  // pairs with no cached first attempt
    std::size_t valid = 0;
    std::size_t rejected = 0;
    std::vector<RewriteResult> rejections;
    std::vector<std::string> errors;  // per-pair endpoint failures, run continues
};

struct AugmentOutcome {
    std::map<std::string, std::vector<corpus::SftPair>> datasets;  // rule_id -> pairs, seed order
    AugmentReport report;
};

AugmentOutcome augment_dataset(llm::LlmClient& client, const std::vector<rules::Rule>& rule_set,
                               const std::vector<corpus::SeedRecord>& seeds,
                               const AugmentOptions& options = {});

}  // namespace rulemix::rewriter
