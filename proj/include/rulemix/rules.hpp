#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rulemix::llm {
class LlmClient;
}

namespace rulemix::rules {

/// One augmentation rule: a prompt fragment plus its three in-context
/// examples. Registry content is fixed at build time.
struct Rule {
    std::string id;
    std::string name;
    std::string category;
    std::string rule_prompt;
    std::array<std::string, 3> examples;
};

/// The eight built-in rules, in registry order.
const std::vector<Rule>& builtin_rules();

/// Skeleton the rewriter splices each rule into ("[Rule-specific prompt]"
/// placeholder inside).
const std::string& base_rewrite_prompt();

const Rule& rule_by_id(std::string_view id);
std::optional<std::size_t> rule_order(std::string_view id);  // index in registry

/// Human-readable registry dump (id, name, category, fragment, examples).
std::string catalog();

struct BaseCorpusEntry {
    std::string instruction;
    std::string response;
};

std::vector<BaseCorpusEntry> load_base_corpus(const std::filesystem::path& path);

struct ExtractOptions {
    std::vector<std::string> perspectives;  // discipline names named in the prompt
    std::size_t char_budget = 48000;        // corpus chunked when a prompt would exceed this
    std::filesystem::path audit_path;       // raw completions persisted here when set
};

struct ExtractionOutcome {
    std::vector<std::string> candidates;       // parsed numbered rule descriptions
    std::vector<std::string> raw_completions;  // one per chunk, always populated
};

/// Prompts the endpoint to describe candidate rules for a base corpus.
/// Candidates are audit output only; they are never auto-registered.
/// Throws PipelineError when a completion has no parseable numbered list
/// (the raw text is still persisted first).
ExtractionOutcome extract_rules(llm::LlmClient& client,
                                const std::vector<BaseCorpusEntry>& base_corpus,
                                const ExtractOptions& options);

}  // namespace rulemix::rules
