#include <algorithm>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "rulemix/errors.hpp"
#include "rulemix/mixing.hpp"
#include "rulemix/rules.hpp"

using namespace rulemix;
using namespace rulemix::mixing;

namespace {

corpus::SftPair sft_pair(const std::string& seed_id, const std::string& rule_id) {
    corpus::SftPair pair;
    pair.id = seed_id + "::" + rule_id;
    pair.source_seed_id = seed_id;
    pair.rule_id = rule_id;
    pair.instruction = "Question for " + pair.id + "?\nA. yes\nB. no";
    pair.response = "A";
    pair.task = "anatomy";
    pair.subject = "Other";
    return pair;
}

ParallelGroup make_group(const std::string& seed_id) {
    ParallelGroup group;
    group.seed_id = seed_id;
    group.seed_pair = sft_pair(seed_id, corpus::kSeedRuleId);
    return group;
}

scoring::PplScore ppl(double value, scoring::PplScope scope = scoring::PplScope::ResponseGivenInstruction) {
    return {value, 1, scope};
}

scoring::JudgeScores judge(int c, int w, int a) {
    scoring::JudgeScores s;
    s.consistency = c;
    s.correctness = w;
    s.alignment = a;
    return s;
}

void add_candidate(ParallelGroup& group, const std::string& rule_id,
                   std::optional<scoring::PplScore> p, std::optional<scoring::JudgeScores> j) {
    ScoredCandidate cand;
    cand.pair = sft_pair(group.seed_id, rule_id);
    cand.ppl = p;
    cand.judge = j;
    group.candidates.emplace(rule_id, std::move(cand));
}

// Reference selection: sort the eligible pool (registry order, seed last) by
// the config's key and take the front; stable sort preserves pool order on
// full ties.
struct OracleMember {
    std::string rule_id;
    double ppl = 0.0;
    int dim = 0;
    int sum = 0;
};

std::optional<OracleMember> oracle_winner(const ParallelGroup& group, const MixConfig& config) {
    std::vector<OracleMember> pool;
    for (const auto& rule : rules::builtin_rules()) {
        auto it = group.candidates.find(rule.id);
        if (it == group.candidates.end()) continue;
        const auto& cand = it->second;
        if (config.kind == MixKind::JudgeMax) {
            if (!cand.judge) continue;
            const auto& s = *cand.judge;
            int dim = config.dimension == JudgeDimension::Consistency    ? s.consistency
                      : config.dimension == JudgeDimension::Correctness ? s.correctness
                                                                        : s.alignment;
            pool.push_back({rule.id, 0.0, dim, s.consistency + s.correctness + s.alignment});
        } else {
            if (!cand.ppl) continue;
            pool.push_back({rule.id, cand.ppl->value, 0, 0});
        }
    }
    if (config.kind != MixKind::JudgeMax && config.include_seed && group.seed_ppl)
        pool.push_back({corpus::kSeedRuleId, group.seed_ppl->value, 0, 0});
    if (pool.empty()) return std::nullopt;

    std::stable_sort(pool.begin(), pool.end(), [&](const OracleMember& a, const OracleMember& b) {
        switch (config.kind) {
            case MixKind::PplMax: return a.ppl > b.ppl;
            case MixKind::PplMin: return a.ppl < b.ppl;
            default: return a.dim != b.dim ? a.dim > b.dim : a.sum > b.sum;
        }
    });
    return pool.front();
}

}  // namespace

TEST_CASE("the seven mix configurations are fixed") {
    const auto& configs = all_mix_configs();
    REQUIRE(configs.size() == 7);
    const std::vector<std::string> ids = {"ppl-max",           "ppl-max-seed",      "ppl-min",
                                          "ppl-min-seed",      "judge-consistency", "judge-correctness",
                                          "judge-alignment"};
    for (std::size_t i = 0; i < ids.size(); ++i) {
        CHECK(configs[i].id == ids[i]);
        CHECK(&mix_config_by_id(ids[i]) == &configs[i]);
    }
    CHECK(configs[1].include_seed);
    CHECK(configs[3].include_seed);
    CHECK_FALSE(configs[4].include_seed);
    CHECK(configs[6].dimension == JudgeDimension::Alignment);
    CHECK_THROWS_AS(mix_config_by_id("ppl-median"), ConfigError);
}

TEST_CASE("ppl selection picks the extremes over the rule pool") {
    auto group = make_group("s1");
    const auto& rule_ids = rules::builtin_rules();
    for (std::size_t i = 0; i < rule_ids.size(); ++i)
        add_candidate(group, rule_ids[i].id, ppl(static_cast<double>(i + 1)), std::nullopt);

    auto max_sel = mix_group(group, mix_config_by_id("ppl-max"));
    CHECK(max_sel.winner_rule_id == rule_ids.back().id);
    CHECK(max_sel.pool_size == 8);
    CHECK(max_sel.scores.at(rule_ids.back().id) == std::vector<double>{8.0});

    auto min_sel = mix_group(group, mix_config_by_id("ppl-min"));
    CHECK(min_sel.winner_rule_id == rule_ids.front().id);
    CHECK(min_sel.pair == group.candidates.at(rule_ids.front().id).pair);
}

TEST_CASE("seed variants join the pool only when allowed") {
    auto group = make_group("s1");
    const auto& rule_ids = rules::builtin_rules();
    for (std::size_t i = 0; i < rule_ids.size(); ++i)
        add_candidate(group, rule_ids[i].id, ppl(static_cast<double>(i + 1)), std::nullopt);
    group.seed_ppl = ppl(9.0);

    CHECK(mix_group(group, mix_config_by_id("ppl-max")).winner_rule_id == rule_ids.back().id);
    CHECK(mix_group(group, mix_config_by_id("ppl-max-seed")).winner_rule_id == "seed");
    CHECK(mix_group(group, mix_config_by_id("ppl-min-seed")).winner_rule_id == rule_ids.front().id);

    group.seed_ppl = ppl(0.5);
    CHECK(mix_group(group, mix_config_by_id("ppl-min-seed")).winner_rule_id == "seed");
    CHECK(mix_group(group, mix_config_by_id("ppl-min")).winner_rule_id == rule_ids.front().id);
}

TEST_CASE("ppl ties keep the earliest rule in registry order") {
    auto group = make_group("s1");
    add_candidate(group, "philosophical-thinking", ppl(5.0), std::nullopt);
    add_candidate(group, "counterintuitive-thinking", ppl(5.0), std::nullopt);
    add_candidate(group, "anthropomorphic-expressions", ppl(2.0), std::nullopt);
    // counterintuitive-thinking precedes philosophical-thinking in the registry
    CHECK(mix_group(group, mix_config_by_id("ppl-max")).winner_rule_id == "counterintuitive-thinking");
}

TEST_CASE("judge selection maximizes the dimension with total-sum tie-break") {
    auto group = make_group("s1");
    add_candidate(group, "social-phenomena-pun-buzzwords", std::nullopt, judge(7, 3, 3));
    add_candidate(group, "philosophical-thinking", std::nullopt, judge(7, 9, 9));
    add_candidate(group, "anthropomorphic-expressions", std::nullopt, judge(6, 10, 10));

    const auto sel = mix_group(group, mix_config_by_id("judge-consistency"));
    CHECK(sel.winner_rule_id == "philosophical-thinking");  // dim tie 7 vs 7, sum 25 beats 13
    CHECK(sel.scores.at("philosophical-thinking") == std::vector<double>{7.0, 9.0, 9.0});

    CHECK(mix_group(group, mix_config_by_id("judge-correctness")).winner_rule_id ==
          "anthropomorphic-expressions");

    // Full tie: registry order decides.
    auto tied = make_group("s2");
    add_candidate(tied, "philosophical-thinking", std::nullopt, judge(5, 5, 5));
    add_candidate(tied, "blurring-conceptual-boundaries", std::nullopt, judge(5, 5, 5));
    CHECK(mix_group(tied, mix_config_by_id("judge-alignment")).winner_rule_id ==
          "blurring-conceptual-boundaries");
}

TEST_CASE("judge pools never contain the seed") {
    auto group = make_group("s1");
    group.seed_ppl = ppl(100.0);
    add_candidate(group, "philosophical-thinking", std::nullopt, judge(2, 2, 2));
    const auto sel = mix_group(group, mix_config_by_id("judge-consistency"));
    CHECK(sel.winner_rule_id == "philosophical-thinking");
    CHECK(sel.pool_size == 1);
}

TEST_CASE("unscored candidates stay out of the pool and empty pools fall back to the seed") {
    auto group = make_group("s1");
    add_candidate(group, "philosophical-thinking", std::nullopt, std::nullopt);
    add_candidate(group, "counterintuitive-thinking", ppl(3.0), std::nullopt);

    const auto sel = mix_group(group, mix_config_by_id("ppl-max"));
    CHECK(sel.winner_rule_id == "counterintuitive-thinking");
    CHECK(sel.pool_size == 1);

    // Only ppl scores present: every judge pool is empty.
    const auto fallback = mix_group(group, mix_config_by_id("judge-alignment"));
    CHECK(fallback.fallback);
    CHECK(fallback.pool_size == 0);
    CHECK(fallback.winner_rule_id == "seed");
    CHECK(fallback.pair == group.seed_pair);
}

TEST_CASE("mixed perplexity scopes in one group are an error") {
    auto group = make_group("s1");
    add_candidate(group, "counterintuitive-thinking",
                  ppl(3.0, scoring::PplScope::ResponseGivenInstruction), std::nullopt);
    add_candidate(group, "philosophical-thinking", ppl(4.0, scoring::PplScope::FullPair),
                  std::nullopt);
    CHECK_THROWS_AS(mix_group(group, mix_config_by_id("ppl-max")), PipelineError);

    auto seed_mismatch = make_group("s2");
    add_candidate(seed_mismatch, "counterintuitive-thinking",
                  ppl(3.0, scoring::PplScope::ResponseGivenInstruction), std::nullopt);
    seed_mismatch.seed_ppl = ppl(2.0, scoring::PplScope::FullPair);
    CHECK_THROWS_AS(mix_group(seed_mismatch, mix_config_by_id("ppl-max-seed")), PipelineError);
    // Judge mixing never reads ppl, so the mismatch is irrelevant there.
    add_candidate(seed_mismatch, "philosophical-thinking", std::nullopt, judge(4, 4, 4));
    CHECK(mix_group(seed_mismatch, mix_config_by_id("judge-alignment")).winner_rule_id ==
          "philosophical-thinking");
}

TEST_CASE("selection agrees with the sort-based reference on random groups") {
    std::mt19937_64 rng(20260814);
    std::uniform_real_distribution<double> ppl_dist(1.0, 20.0);
    const auto& rule_set = rules::builtin_rules();

    for (int trial = 0; trial < 10000; ++trial) {
        auto group = make_group("g" + std::to_string(trial));
        for (const auto& rule : rule_set) {
            if (rng() % 10 < 2) continue;  // candidate missing entirely
            std::optional<scoring::PplScore> p;
            std::optional<scoring::JudgeScores> j;
            if (rng() % 10 < 8) {
                double value = ppl_dist(rng);
                if (rng() % 4 == 0) value = static_cast<double>(1 + rng() % 6);  // force ties
                p = ppl(value);
            }
            if (rng() % 10 < 8)
                j = judge(1 + static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 10),
                          1 + static_cast<int>(rng() % 10));
            add_candidate(group, rule.id, p, j);
        }
        if (rng() % 10 < 9) group.seed_ppl = ppl(ppl_dist(rng));

        for (const auto& config : all_mix_configs()) {
            const auto sel = mix_group(group, config);
            const auto expected = oracle_winner(group, config);
            if (!expected) {
                CHECK(sel.fallback);
                CHECK(sel.pair == group.seed_pair);
                continue;
            }
            CHECK_FALSE(sel.fallback);
            REQUIRE_MESSAGE(sel.winner_rule_id == expected->rule_id, config.id, " trial ", trial);

            // The selected pair is always a verbatim group member.
            if (sel.winner_rule_id == "seed")
                CHECK(sel.pair == group.seed_pair);
            else
                CHECK(sel.pair == group.candidates.at(sel.winner_rule_id).pair);
        }
    }
}

TEST_CASE("mix_group is deterministic") {
    auto group = make_group("s1");
    add_candidate(group, "philosophical-thinking", ppl(3.0), judge(5, 6, 7));
    add_candidate(group, "counterintuitive-thinking", ppl(4.0), judge(5, 7, 6));
    for (const auto& config : all_mix_configs()) {
        const auto a = mix_group(group, config);
        const auto b = mix_group(group, config);
        CHECK(a.winner_rule_id == b.winner_rule_id);
        CHECK(a.pair == b.pair);
        CHECK(a.scores == b.scores);
    }
}

TEST_CASE("mix_dataset aggregates selections in group order") {
    std::vector<ParallelGroup> groups;
    for (int i = 0; i < 3; ++i) {
        auto group = make_group("s" + std::to_string(i));
        if (i < 2) add_candidate(group, "philosophical-thinking", ppl(2.0 + i), std::nullopt);
        groups.push_back(std::move(group));
    }

    const auto outcome = mix_dataset(groups, mix_config_by_id("ppl-max"));
    REQUIRE(outcome.pairs.size() == 3);
    CHECK(outcome.pairs[0].source_seed_id == "s0");
    CHECK(outcome.pairs[2].source_seed_id == "s2");
    CHECK(outcome.report.config_id == "ppl-max");
    CHECK(outcome.report.selected_by_rule.at("philosophical-thinking") == 2);
    CHECK(outcome.report.selected_by_rule.at("seed") == 1);
    CHECK(outcome.report.fallbacks == 1);
    CHECK(outcome.report.selections.size() == 3);
}

TEST_CASE("assemble_groups joins datasets and sidecars by id") {
    const std::vector<corpus::SftPair> seeds = {sft_pair("s1", "seed"), sft_pair("s2", "seed")};
    std::map<std::string, std::vector<corpus::SftPair>> datasets;
    datasets["philosophical-thinking"] = {sft_pair("s1", "philosophical-thinking"),
                                          sft_pair("s2", "philosophical-thinking")};
    datasets["counterintuitive-thinking"] = {sft_pair("s1", "counterintuitive-thinking")};

    std::map<std::string, scoring::PplRow> ppl_rows;
    ppl_rows["s1::seed"] = {"s1::seed", scoring::PplScope::ResponseGivenInstruction, 2.5, 1};
    ppl_rows["s1::philosophical-thinking"] = {"s1::philosophical-thinking",
                                              scoring::PplScope::ResponseGivenInstruction, 7.0, 1};
    std::map<std::string, scoring::JudgeRow> judge_rows;
    judge_rows["s1::counterintuitive-thinking"] = {"s1::counterintuitive-thinking", 5, 6, 7};

    const auto groups = assemble_groups(seeds, datasets, ppl_rows, judge_rows);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].seed_id == "s1");
    REQUIRE(groups[0].seed_ppl.has_value());
    CHECK(groups[0].seed_ppl->value == 2.5);
    CHECK(groups[0].candidates.size() == 2);
    CHECK(groups[0].candidates.at("philosophical-thinking").ppl->value == 7.0);
    CHECK_FALSE(groups[0].candidates.at("philosophical-thinking").judge.has_value());
    CHECK(groups[0].candidates.at("counterintuitive-thinking").judge->correctness == 6);
    CHECK_FALSE(groups[1].seed_ppl.has_value());
    CHECK(groups[1].candidates.size() == 1);
}

TEST_CASE("assemble_groups rejects parallelism violations") {
    const std::vector<corpus::SftPair> seeds = {sft_pair("s1", "seed")};
    {
        std::map<std::string, std::vector<corpus::SftPair>> datasets;
        datasets["philosophical-thinking"] = {sft_pair("ghost", "philosophical-thinking")};
        CHECK_THROWS_AS(assemble_groups(seeds, datasets, {}, {}), ConfigError);
    }
    {
        const std::vector<corpus::SftPair> dup = {sft_pair("s1", "seed"), sft_pair("s1", "seed")};
        CHECK_THROWS_AS(assemble_groups(dup, {}, {}, {}), ConfigError);
    }
    {
        std::map<std::string, std::vector<corpus::SftPair>> datasets;
        datasets["philosophical-thinking"] = {sft_pair("s1", "philosophical-thinking"),
                                              sft_pair("s1", "philosophical-thinking")};
        CHECK_THROWS_AS(assemble_groups(seeds, datasets, {}, {}), ConfigError);
    }
}
