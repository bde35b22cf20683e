#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rulemix::corpus {

/// One multiple-choice seed question.
struct SeedRecord {
    std::string id;
    std::string task;
    std::string subject;
    std::string question;
    std::vector<std::string> choices;  // 2..26 entries, lettered A..Z
    int answer = 0;                    // zero-based index into choices

    bool operator==(const SeedRecord&) const = default;
};

/// rule_id for pairs taken directly from the seed dataset.
inline constexpr const char* kSeedRuleId = "seed";

/// One SFT (instruction, response) pair. The response is always the seed
/// record's answer rendering, whatever rule produced the instruction.
struct SftPair {
    std::string id;
    std::string source_seed_id;
    std::string rule_id;  // kSeedRuleId or a registered rule id
    std::string instruction;
    std::string response;
    std::string task;
    std::string subject;

    bool operator==(const SftPair&) const = default;
};

/// Checks every SeedRecord invariant; returns an error message or nullopt.
std::optional<std::string> check_record(const SeedRecord& record);

struct RowError {
    std::size_t row = 0;  // 1-based line/record number within the source file
    std::string file;
    std::string message;
};

struct LoadReport {
    std::vector<SeedRecord> records;
    std::vector<RowError> errors;
};

enum class PoolFormat { Jsonl, MmluCsv };

PoolFormat parse_pool_format(std::string_view tag);  // "jsonl" | "mmlu-csv"

/// Reads a seed pool. Jsonl expects one record object per line; MmluCsv
/// expects headerless rows of (question, 4 choices, answer letter, task).
/// A directory path ingests every matching file inside, sorted by name.
/// Records failing invariants land in the error report, never silently drop.
LoadReport load_seed_pool(const std::filesystem::path& path, PoolFormat format);

struct AllocationEntry {
    std::string task;
    std::size_t pool_count = 0;
    std::size_t allocated = 0;
};

/// Largest-remainder allocation of target_n over task frequencies with a
/// floor of one per task present. Sorted by task name; totals are exact.
std::vector<AllocationEntry> stratified_allocation(
    const std::map<std::string, std::size_t>& task_counts, std::size_t target_n);

/// Proportional stratified sample. Within-task selection is uniform under
/// the given seed; output is sorted by (task, id) and reproducible.
std::vector<SeedRecord> stratified_sample(const std::vector<SeedRecord>& pool,
                                          std::size_t target_n, std::uint64_t seed);

/// "question\nA. ...\nB. ..." with no trailing newline.
std::string render_instruction(const SeedRecord& record);

/// The answer letter, e.g. "B".
std::string render_response(const SeedRecord& record);

/// Lettered choice lines joined by newlines.
std::string render_choices(const SeedRecord& record);

/// "B. <choice text>" — used as the reference answer in prompts.
std::string render_reference_answer(const SeedRecord& record);

/// The identity SFT pair for a seed record (rule_id = "seed").
SftPair seed_pair(const SeedRecord& record);

/// Pair for a rewritten question: same choices and answer as the seed,
/// only the question text replaced.
SftPair rewritten_pair(const SeedRecord& record, std::string_view rule_id,
                       const std::string& rewritten_question);

/// Inverse of rewritten_pair/seed_pair for the question slot: strips the
/// rendered choice block off the pair's instruction. nullopt when the
/// instruction does not end with this record's choices.
std::optional<std::string> question_of_pair(const SftPair& pair, const SeedRecord& record);

/// Pair id scheme shared by every stage: "<seed_id>::<rule_id>".
std::string pair_id(std::string_view seed_id, std::string_view rule_id);

/// Writes pairs as canonical JSONL (fields id, source_seed_id, rule_id,
/// task, subject, instruction, response in that order). Returns lines written.
std::size_t export_dataset(const std::vector<SftPair>& pairs, const std::filesystem::path& path);

std::vector<SftPair> import_dataset(const std::filesystem::path& path);

/// Seed-record JSONL (fields id, task, subject, question, choices, answer).
std::size_t export_seed_records(const std::vector<SeedRecord>& records,
                                const std::filesystem::path& path);

std::vector<SeedRecord> import_seed_records(const std::filesystem::path& path);

}  // namespace rulemix::corpus
