#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rulemix/corpus.hpp"
#include "rulemix/scoring.hpp"

namespace rulemix::mixing {

struct ScoredCandidate {
    corpus::SftPair pair;
    std::optional<scoring::PplScore> ppl;
    std::optional<scoring::JudgeScores> judge;
};

/// One seed with its rule-parallel candidates.
struct ParallelGroup {
    std::string seed_id;
    corpus::SftPair seed_pair;
    std::optional<scoring::PplScore> seed_ppl;
    std::map<std::string, ScoredCandidate> candidates;  // rule_id -> candidate
};

enum class MixKind { PplMax, PplMin, JudgeMax };
enum class JudgeDimension { Consistency, Correctness, Alignment };

struct MixConfig {
    std::string id;
    MixKind kind = MixKind::PplMax;
    bool include_seed = false;
    std::optional<JudgeDimension> dimension;  // JudgeMax only
};

/// The seven admissible configurations, fixed order: ppl-max, ppl-max-seed,
/// ppl-min, ppl-min-seed, judge-consistency, judge-correctness,
/// judge-alignment.
const std::vector<MixConfig>& all_mix_configs();

const MixConfig& mix_config_by_id(std::string_view id);

struct Selection {
    corpus::SftPair pair;        // always a verbatim group member
    std::string winner_rule_id;  // rule id or "seed"
    std::size_t pool_size = 0;
    bool fallback = false;  // empty pool, seed returned
    std::map<std::string, std::vector<double>> scores;  // pool snapshot per rule
};

/// Picks the pool member with the extremal score. Candidates missing the
/// required score stay out of the pool; an empty pool falls back to the
/// seed pair. Judge ties break by total score sum, then registry order.
Selection mix_group(const ParallelGroup& group, const MixConfig& config);

struct MixReport {
    std::string config_id;
    std::map<std::string, std::size_t> selected_by_rule;
    std::size_t fallbacks = 0;
    std::vector<Selection> selections;  // group order
};

struct MixOutcome {
    std::vector<corpus::SftPair> pairs;  // one per group, group order
    MixReport report;
};

MixOutcome mix_dataset(const std::vector<ParallelGroup>& groups, const MixConfig& config);

/// Joins seed pairs, rule datasets, and score sidecars into groups, keeping
/// the seed pair order. Pairs are matched by source_seed_id; scores by pair
/// id. Unknown source ids are an error (parallelism violation).
std::vector<ParallelGroup> assemble_groups(
    const std::vector<corpus::SftPair>& seed_pairs,
    const std::map<std::string, std::vector<corpus::SftPair>>& rule_datasets,
    const std::map<std::string, scoring::PplRow>& ppl_rows,
    const std::map<std::string, scoring::JudgeRow>& judge_rows);

}  // namespace rulemix::mixing
