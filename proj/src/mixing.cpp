#include "rulemix/mixing.hpp"

#include "rulemix/errors.hpp"
#include "rulemix/rules.hpp"

namespace rulemix::mixing {

const std::vector<MixConfig>& all_mix_configs() {
    static const std::vector<MixConfig> configs = {
        {"ppl-max", MixKind::PplMax, false, std::nullopt},
        {"ppl-max-seed", MixKind::PplMax, true, std::nullopt},
        {"ppl-min", MixKind::PplMin, false, std::nullopt},
        {"ppl-min-seed", MixKind::PplMin, true, std::nullopt},
        {"judge-consistency", MixKind::JudgeMax, false, JudgeDimension::Consistency},
        {"judge-correctness", MixKind::JudgeMax, false, JudgeDimension::Correctness},
        {"judge-alignment", MixKind::JudgeMax, false, JudgeDimension::Alignment},
    };
    return configs;
}

const MixConfig& mix_config_by_id(std::string_view id) {
    for (const auto& config : all_mix_configs())
        if (config.id == id) return config;
    throw ConfigError("unknown mix config '" + std::string(id) + "'");
}

namespace {

int dimension_score(const scoring::JudgeScores& scores, JudgeDimension dim) {
    switch (dim) {
        case JudgeDimension::Consistency: return scores.consistency;
        case JudgeDimension::Correctness: return scores.correctness;
        default: return scores.alignment;
    }
}

int judge_sum(const scoring::JudgeScores& s) { return s.consistency + s.correctness + s.alignment; }

struct PoolMember {
    const corpus::SftPair* pair = nullptr;
    std::string rule_id;
    double ppl = 0.0;
    const scoring::JudgeScores* judge = nullptr;
};

}  // namespace

Selection mix_group(const ParallelGroup& group, const MixConfig& config) {
    if (group.seed_pair.id.empty())
        throw PipelineError("group " + group.seed_id + " has no seed pair");

    // Pool in deterministic order: registry rule order, then the seed.
    std::vector<PoolMember> pool;
    std::optional<scoring::PplScope> scope;
    for (const auto& rule : rules::builtin_rules()) {
        auto it = group.candidates.find(rule.id);
        if (it == group.candidates.end()) continue;
        const ScoredCandidate& cand = it->second;
        PoolMember member;
        member.pair = &cand.pair;
        member.rule_id = rule.id;
        if (config.kind == MixKind::JudgeMax) {
            if (!cand.judge) continue;
            member.judge = &*cand.judge;
        } else {
            if (!cand.ppl) continue;
            if (scope && cand.ppl->scope != *scope)
                throw PipelineError("mixed ppl scopes in group " + group.seed_id);
            scope = cand.ppl->scope;
            member.ppl = cand.ppl->value;
        }
        pool.push_back(member);
    }
    if (config.kind != MixKind::JudgeMax && config.include_seed && group.seed_ppl) {
        if (scope && group.seed_ppl->scope != *scope)
            throw PipelineError("seed ppl scope differs in group " + group.seed_id);
        pool.push_back({&group.seed_pair, corpus::kSeedRuleId, group.seed_ppl->value, nullptr});
    }

    Selection selection;
    selection.pool_size = pool.size();
    for (const auto& member : pool) {
        if (member.judge)
            selection.scores[member.rule_id] = {
                static_cast<double>(member.judge->consistency),
                static_cast<double>(member.judge->correctness),
                static_cast<double>(member.judge->alignment)};
        else
            selection.scores[member.rule_id] = {member.ppl};
    }

    if (pool.empty()) {
        selection.pair = group.seed_pair;
        selection.winner_rule_id = corpus::kSeedRuleId;
        selection.fallback = true;
        return selection;
    }

    const PoolMember* best = &pool.front();
    for (std::size_t i = 1; i < pool.size(); ++i) {
        const PoolMember& m = pool[i];
        bool wins = false;
        switch (config.kind) {
            case MixKind::PplMax: wins = m.ppl > best->ppl; break;
            case MixKind::PplMin: wins = m.ppl < best->ppl; break;
            case MixKind::JudgeMax: {
                const int md = dimension_score(*m.judge, *config.dimension);
                const int bd = dimension_score(*best->judge, *config.dimension);
                wins = md > bd || (md == bd && judge_sum(*m.judge) > judge_sum(*best->judge));
                break;
            }
        }
        if (wins) best = &m;
    }
    selection.pair = *best->pair;
    selection.winner_rule_id = best->rule_id;
    return selection;
}

MixOutcome mix_dataset(const std::vector<ParallelGroup>& groups, const MixConfig& config) {
    MixOutcome outcome;
    outcome.report.config_id = config.id;
    outcome.pairs.reserve(groups.size());
    for (const auto& group : groups) {
        Selection selection = mix_group(group, config);
        ++outcome.report.selected_by_rule[selection.winner_rule_id];
        if (selection.fallback) ++outcome.report.fallbacks;
        outcome.pairs.push_back(selection.pair);
        outcome.report.selections.push_back(std::move(selection));
    }
    return outcome;
}

std::vector<ParallelGroup> assemble_groups(
    const std::vector<corpus::SftPair>& seed_pairs,
    const std::map<std::string, std::vector<corpus::SftPair>>& rule_datasets,
    const std::map<std::string, scoring::PplRow>& ppl_rows,
    const std::map<std::string, scoring::JudgeRow>& judge_rows) {
    std::vector<ParallelGroup> groups;
    groups.reserve(seed_pairs.size());
    std::map<std::string, std::size_t> index_by_seed;
    for (const auto& seed : seed_pairs) {
        if (index_by_seed.count(seed.source_seed_id))
            throw ConfigError("duplicate seed id " + seed.source_seed_id + " in seed dataset");
        index_by_seed[seed.source_seed_id] = groups.size();
        ParallelGroup group;
        group.seed_id = seed.source_seed_id;
        group.seed_pair = seed;
        if (auto it = ppl_rows.find(seed.id); it != ppl_rows.end())
            group.seed_ppl = scoring::PplScore{it->second.value, it->second.token_count, it->second.scope};
        groups.push_back(std::move(group));
    }

    for (const auto& [rule_id, dataset] : rule_datasets) {
        for (const auto& pair : dataset) {
            auto it = index_by_seed.find(pair.source_seed_id);
            if (it == index_by_seed.end())
                throw ConfigError("pair " + pair.id + " references unknown seed " +
                                  pair.source_seed_id);
            ParallelGroup& group = groups[it->second];
            if (group.candidates.count(pair.rule_id))
                throw ConfigError("seed " + pair.source_seed_id + " appears twice under rule " +
                                  pair.rule_id);
            ScoredCandidate cand;
            cand.pair = pair;
            if (auto p = ppl_rows.find(pair.id); p != ppl_rows.end())
                cand.ppl = scoring::PplScore{p->second.value, p->second.token_count, p->second.scope};
            if (auto j = judge_rows.find(pair.id); j != judge_rows.end()) {
                scoring::JudgeScores scores;
                scores.consistency = j->second.consistency;
                scores.correctness = j->second.correctness;
                scores.alignment = j->second.alignment;
                cand.judge = scores;
            }
            group.candidates.emplace(pair.rule_id, std::move(cand));
        }
    }
    return groups;
}

}  // namespace rulemix::mixing
