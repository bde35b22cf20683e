#include "rulemix/rewriter.hpp"

#include "rulemix/errors.hpp"
#include "rulemix/llm_client.hpp"
#include "rulemix/text.hpp"

namespace rulemix::rewriter {

RewritePrompt build_rewrite_prompt(const rules::Rule& rule, const corpus::SeedRecord& record) {
    std::string splice = rule.rule_prompt;
    for (std::size_t i = 0; i < rule.examples.size(); ++i)
        splice += "\n\n" + std::to_string(i + 1) + ". " + rule.examples[i];

    std::string full = text::replace_all(rules::base_rewrite_prompt(), "[Rule-specific prompt]", splice);
    full += "\n\n#The Given Prompt#: " + record.question;
    full += "\n\n#Reference Choices#:" + corpus::render_choices(record);
    full += "\n\n#Reference Answer#: " + corpus::render_reference_answer(record);
    full += "\n\n#Rewritten Prompt#:";
    return {rule.id, record.id, std::move(full)};
}

Validation validate_rewrite(const corpus::SeedRecord& original, const std::string& candidate) {
    Validation v;
    const std::string trimmed{text::trim(candidate)};
    v.added_word_count = static_cast<int>(text::word_count(candidate)) -
                         static_cast<int>(text::word_count(original.question));
    if (trimmed.empty()) {
        v.reasons.push_back("empty");
        return v;
    }
    const std::string folded = text::fold(candidate);
    for (const char* term : {"original prompt", "rewritten prompt", "reference choices"}) {
        if (folded.find(term) != std::string::npos)
            v.reasons.push_back(std::string("forbidden term '") + term + "'");
    }
    for (const auto& choice : original.choices) {
        const std::string folded_choice = text::fold(choice);
        if (!folded_choice.empty() && folded.find(folded_choice) != std::string::npos) {
            v.reasons.push_back("choice leakage");
            break;
        }
    }
    if (folded == text::fold(original.question)) v.reasons.push_back("unchanged");
    v.valid = v.reasons.empty();
    return v;
}

std::string extract_rewrite(const std::string& completion) {
    std::string out = text::trim(completion);
    constexpr std::string_view kEcho = "#Rewritten Prompt#:";
    if (std::string_view{out}.substr(0, kEcho.size()) == kEcho)
        out = text::trim(std::string_view{out}.substr(kEcho.size()));
    return out;
}

RewriteResult rewrite_one(llm::LlmClient& client, const rules::Rule& rule,
                          const corpus::SeedRecord& record, int max_attempts) {
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    const RewritePrompt prompt = build_rewrite_prompt(rule, record);

    RewriteResult result;
    result.seed_id = record.id;
    result.rule_id = rule.id;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        llm::CompleteOptions opts;
        if (attempt > 1) opts.cache_salt = "retry-" + std::to_string(attempt);
        result.raw_completion = client.complete(prompt.full_text, opts);
        result.attempts = attempt;
        const std::string candidate = extract_rewrite(result.raw_completion);
        const Validation v = validate_rewrite(record, candidate);
        result.added_word_count = v.added_word_count;
        if (v.valid) {
            result.verdict = Verdict::Valid;
            result.rewritten_instruction = candidate;
            return result;
        }
        for (const auto& reason : v.reasons)
            result.reasons.push_back("attempt " + std::to_string(attempt) + ": " + reason);
    }
    result.verdict = Verdict::Rejected;
    return result;
}

AugmentOutcome augment_dataset(llm::LlmClient& client, const std::vector<rules::Rule>& rule_set,
                               const std::vector<corpus::SeedRecord>& seeds,
                               const AugmentOptions& options) {
    AugmentOutcome outcome;
    outcome.report.pairs_total = rule_set.size() * seeds.size();
    for (const auto& rule : rule_set) outcome.datasets[rule.id];  // keep empty datasets visible

    if (options.dry_run) {
        for (const auto& rule : rule_set)
            for (const auto& seed : seeds)
                if (!client.completion_cached(build_rewrite_prompt(rule, seed).full_text))
                    ++outcome.report.pending_requests;
        return outcome;
    }

    const std::size_t n = outcome.report.pairs_total;
    std::vector<RewriteResult> results(n);
    std::vector<std::string> errors(n);
    llm::parallel_for(n, options.workers, [&](std::size_t idx) {
        const auto& rule = rule_set[idx / seeds.size()];
        const auto& seed = seeds[idx % seeds.size()];
        try {
            results[idx] = rewrite_one(client, rule, seed, options.max_attempts);
        } catch (const llm::LlmError& e) {
            errors[idx] = rule.id + "/" + seed.id + ": " + e.what();
        }
    });

    for (std::size_t idx = 0; idx < n; ++idx) {
        if (!errors[idx].empty()) {
            outcome.report.errors.push_back(errors[idx]);
            continue;
        }
        const RewriteResult& r = results[idx];
        if (r.verdict == Verdict::Valid) {
            ++outcome.report.valid;
            const auto& seed = seeds[idx % seeds.size()];
            outcome.datasets[r.rule_id].push_back(
                corpus::rewritten_pair(seed, r.rule_id, r.rewritten_instruction));
        } else {
            ++outcome.report.rejected;
            outcome.report.rejections.push_back(r);
        }
    }
    return outcome;
}

}  // namespace rulemix::rewriter
