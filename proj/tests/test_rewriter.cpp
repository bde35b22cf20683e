#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "rulemix/errors.hpp"
#include "rulemix/llm_client.hpp"
#include "rulemix/rewriter.hpp"
#include "rulemix/rules.hpp"

using namespace rulemix;
using namespace rulemix::rewriter;
using testutil::ScriptedTransport;
using testutil::chat_body;

namespace {

llm::LlmClient scripted_client(std::shared_ptr<ScriptedTransport> transport) {
    return llm::LlmClient(testutil::test_endpoint(), std::move(transport),
                          std::make_shared<llm::MemoryCache>());
}

corpus::SeedRecord second_seed() {
    corpus::SeedRecord r;
    r.id = "seed-000002";
    r.task = "philosophy";
    r.subject = "Humanities";
    r.question = "What is virtue?";
    r.choices = {"Habit", "Knowledge", "Luck"};
    r.answer = 1;
    return r;
}

}  // namespace

TEST_CASE("rewrite prompts match the published assembly byte for byte") {
    const auto seed = testutil::fish_seed();
    for (const auto& rule : rules::builtin_rules()) {
        const auto prompt = build_rewrite_prompt(rule, seed);
        CHECK(prompt.rule_id == rule.id);
        CHECK(prompt.seed_id == seed.id);
        const auto golden = testutil::read_file(testutil::golden_path("rewrite_" + rule.id + ".txt"));
        CHECK_MESSAGE(prompt.full_text == golden, "prompt drift for rule ", rule.id);
    }
}

TEST_CASE("rewrite prompt embeds the seed verbatim") {
    const auto seed = testutil::fish_seed();
    const auto prompt = build_rewrite_prompt(rules::rule_by_id("philosophical-thinking"), seed);
    CHECK(prompt.full_text.find("#The Given Prompt#: " + seed.question) != std::string::npos);
    CHECK(prompt.full_text.find("#Reference Choices#:A. ") != std::string::npos);
    CHECK(prompt.full_text.find("#Reference Answer#: B. " + seed.choices[1]) != std::string::npos);
    CHECK(prompt.full_text.rfind("#Rewritten Prompt#:") == prompt.full_text.size() - 19);
    CHECK(prompt.full_text.find("[Rule-specific prompt]") == std::string::npos);
}

TEST_CASE("extract_rewrite strips the prompt-label echo") {
    CHECK(extract_rewrite("  the rewrite  \n") == "the rewrite");
    CHECK(extract_rewrite("#Rewritten Prompt#: the rewrite") == "the rewrite");
    CHECK(extract_rewrite("#Rewritten Prompt#:\nthe rewrite") == "the rewrite");
    CHECK(extract_rewrite("no label at all") == "no label at all");
    // Only a leading label is an echo; inline mentions are content.
    CHECK(extract_rewrite("keep #Rewritten Prompt#: inline") == "keep #Rewritten Prompt#: inline");
}

TEST_CASE("the published fish rewrites all validate") {
    const auto seed = testutil::fish_seed();
    const auto rewrites = testutil::fish_rewrites();
    REQUIRE(rewrites.size() == 8);
    for (const auto& [rule_id, rewrite] : rewrites) {
        const auto v = validate_rewrite(seed, rewrite);
        CHECK_MESSAGE(v.valid, rule_id, ": ", v.reasons.empty() ? "" : v.reasons[0]);
    }
}

TEST_CASE("validation rejects degenerate candidates") {
    const auto seed = testutil::fish_seed();

    auto v = validate_rewrite(seed, "   ");
    CHECK_FALSE(v.valid);
    REQUIRE(v.reasons.size() == 1);
    CHECK(v.reasons[0] == "empty");

    v = validate_rewrite(seed, seed.question);
    CHECK_FALSE(v.valid);
    CHECK(v.reasons[0] == "unchanged");

    // Case differences alone do not make it a rewrite.
    v = validate_rewrite(seed, "HOW DO MOST FISH GET THE OXYGEN THEY NEED TO SURVIVE?");
    CHECK_FALSE(v.valid);
    CHECK(v.reasons[0] == "unchanged");

    v = validate_rewrite(seed, "As instructed in the Rewritten Prompt, fish breathe how?");
    CHECK_FALSE(v.valid);
    CHECK(v.reasons[0] == "forbidden term 'rewritten prompt'");

    v = validate_rewrite(seed,
                         "Is it true that fish breathe through their gills from the "
                         "surrounding water, like tiny divers?");
    CHECK_FALSE(v.valid);
    CHECK(v.reasons[0] == "choice leakage");

    v = validate_rewrite(seed, "A fresh question with the original prompt mentioned?");
    CHECK_FALSE(v.valid);
}

TEST_CASE("validation reports the added word count") {
    corpus::SeedRecord r = second_seed();  // "What is virtue?" = 3 words
    const auto v = validate_rewrite(r, "If practice sculpts the soul, what shape is goodness?");  // 9 words
    CHECK(v.valid);
    CHECK(v.added_word_count == 6);
    CHECK(validate_rewrite(r, "Virtue?").added_word_count == -2);
}

TEST_CASE("rewrite_one returns the first valid candidate") {
    auto transport = std::make_shared<ScriptedTransport>(std::vector<ScriptedTransport::Step>{
        {200, chat_body("#Rewritten Prompt#: Do fish sip the sea's hidden breath?")}});
    auto client = scripted_client(transport);
    const auto seed = testutil::fish_seed();
    const auto rule = rules::rule_by_id("philosophical-thinking");

    const auto result = rewrite_one(client, rule, seed);
    CHECK(result.verdict == Verdict::Valid);
    CHECK(result.attempts == 1);
    CHECK(result.rewritten_instruction == "Do fish sip the sea's hidden breath?");
    CHECK(result.reasons.empty());
    CHECK(transport->calls == 1);
    CHECK(client.completion_cached(build_rewrite_prompt(rule, seed).full_text));
}

TEST_CASE("rewrite_one retries invalid candidates under a fresh cache slot") {
    const auto seed = testutil::fish_seed();
    auto transport = std::make_shared<ScriptedTransport>(std::vector<ScriptedTransport::Step>{
        {200, chat_body(seed.question)},  // echoes the original: rejected
        {200, chat_body("Might gills be the lungs the ocean lends?")}});
    auto client = scripted_client(transport);

    const auto result = rewrite_one(client, rules::rule_by_id("anthropomorphic-expressions"), seed);
    CHECK(result.verdict == Verdict::Valid);
    CHECK(result.attempts == 2);
    CHECK(result.rewritten_instruction == "Might gills be the lungs the ocean lends?");
    REQUIRE(result.reasons.size() == 1);
    CHECK(result.reasons[0] == "attempt 1: unchanged");
    CHECK(transport->calls == 2);
}

TEST_CASE("rewrite_one gives up after max_attempts") {
    const auto seed = testutil::fish_seed();
    std::vector<ScriptedTransport::Step> steps(3, {200, chat_body("")});
    auto transport = std::make_shared<ScriptedTransport>(steps);
    auto client = scripted_client(transport);

    const auto result = rewrite_one(client, rules::rule_by_id("counterintuitive-thinking"), seed, 3);
    CHECK(result.verdict == Verdict::Rejected);
    CHECK(result.attempts == 3);
    CHECK(result.rewritten_instruction.empty());
    REQUIRE(result.reasons.size() == 3);
    CHECK(result.reasons[2] == "attempt 3: empty");
    CHECK(transport->calls == 3);

    CHECK_THROWS_AS(rewrite_one(client, rules::rule_by_id("counterintuitive-thinking"), seed, 0),
                    ConfigError);
}

TEST_CASE("augment covers the full rule-by-seed grid") {
    const std::vector<corpus::SeedRecord> seeds = {testutil::fish_seed(), second_seed()};
    const auto& rule_set = rules::builtin_rules();

    std::vector<ScriptedTransport::Step> steps;
    for (std::size_t idx = 0; idx < rule_set.size() * seeds.size(); ++idx)
        steps.push_back({200, chat_body("Curious variant number " + std::to_string(idx) + "?")});
    auto transport = std::make_shared<ScriptedTransport>(steps);
    auto client = scripted_client(transport);

    AugmentOptions options;
    options.workers = 1;  // keeps the scripted order aligned with the grid
    const auto outcome = augment_dataset(client, rule_set, seeds, options);

    CHECK(outcome.report.pairs_total == 16);
    CHECK(outcome.report.valid == 16);
    CHECK(outcome.report.rejected == 0);
    CHECK(outcome.report.errors.empty());
    CHECK(transport->calls == 16);

    REQUIRE(outcome.datasets.size() == rule_set.size());
    for (std::size_t r = 0; r < rule_set.size(); ++r) {
        const auto& pairs = outcome.datasets.at(rule_set[r].id);
        REQUIRE(pairs.size() == seeds.size());
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const std::size_t idx = r * seeds.size() + s;
            CHECK(pairs[s].id == seeds[s].id + "::" + rule_set[r].id);
            CHECK(pairs[s].instruction == "Curious variant number " + std::to_string(idx) + "?\n" +
                                              corpus::render_choices(seeds[s]));
            CHECK(pairs[s].response == corpus::render_response(seeds[s]));
        }
    }
}

TEST_CASE("augment records rejections and endpoint failures without stopping") {
    const std::vector<corpus::SeedRecord> seeds = {testutil::fish_seed(), second_seed()};
    const auto& rule_set = rules::builtin_rules();

    std::vector<ScriptedTransport::Step> steps;
    for (std::size_t idx = 0; idx < 16; ++idx) {
        if (idx == 0)
            steps.push_back({200, chat_body(seeds[0].question)});  // unchanged: rejected
        else if (idx == 3)
            steps.push_back({400, "denied"});  // terminal endpoint failure
        else
            steps.push_back({200, chat_body("Twist " + std::to_string(idx) + "?")});
    }
    auto transport = std::make_shared<ScriptedTransport>(steps);
    auto client = scripted_client(transport);

    AugmentOptions options;
    options.workers = 1;
    options.max_attempts = 1;
    const auto outcome = augment_dataset(client, rule_set, seeds, options);

    CHECK(outcome.report.valid == 14);
    CHECK(outcome.report.rejected == 1);
    REQUIRE(outcome.report.rejections.size() == 1);
    CHECK(outcome.report.rejections[0].seed_id == seeds[0].id);
    CHECK(outcome.report.rejections[0].rule_id == rule_set[0].id);
    REQUIRE(outcome.report.errors.size() == 1);
    CHECK(outcome.report.errors[0].find(seeds[1].id) != std::string::npos);
    CHECK(outcome.report.errors[0].find("HTTP 400") != std::string::npos);

    // The affected datasets shrink; the others are complete.
    CHECK(outcome.datasets.at(rule_set[0].id).size() == 1);
    CHECK(outcome.datasets.at(rule_set[1].id).size() == 1);
    CHECK(outcome.datasets.at(rule_set[2].id).size() == 2);
}

TEST_CASE("augment dry runs count pending requests without touching the network") {
    const std::vector<corpus::SeedRecord> seeds = {testutil::fish_seed(), second_seed()};
    const auto& rule_set = rules::builtin_rules();
    auto replay = std::make_shared<llm::NoNetworkTransport>();
    auto cache = std::make_shared<llm::MemoryCache>();
    auto client = llm::LlmClient(testutil::test_endpoint(), replay, cache);

    AugmentOptions dry;
    dry.dry_run = true;
    auto outcome = augment_dataset(client, rule_set, seeds, dry);
    CHECK(outcome.report.pending_requests == 16);
    CHECK(outcome.report.pairs_total == 16);
    CHECK(replay->calls() == 0);

    // Warm one entry; the pending count drops by exactly one.
    const auto prompt = build_rewrite_prompt(rule_set[2], seeds[1]);
    cache->put(llm::LlmClient::completion_key(client.config(), prompt.full_text), "A cached take?", "{}");
    outcome = augment_dataset(client, rule_set, seeds, dry);
    CHECK(outcome.report.pending_requests == 15);
    CHECK(replay->calls() == 0);
}

TEST_CASE("a warm cache makes augmentation idempotent") {
    const std::vector<corpus::SeedRecord> seeds = {testutil::fish_seed(), second_seed()};
    const auto& rule_set = rules::builtin_rules();

    std::vector<ScriptedTransport::Step> steps;
    for (std::size_t idx = 0; idx < 16; ++idx)
        steps.push_back({200, chat_body("Variant " + std::to_string(idx) + "?")});
    auto transport = std::make_shared<ScriptedTransport>(steps);
    auto client = scripted_client(transport);

    AugmentOptions options;
    options.workers = 1;
    const auto first = augment_dataset(client, rule_set, seeds, options);
    CHECK(transport->calls == 16);
    const auto second = augment_dataset(client, rule_set, seeds, options);
    CHECK(transport->calls == 16);  // every completion came from the cache
    CHECK(second.datasets == first.datasets);
    CHECK(second.report.valid == first.report.valid);
}
