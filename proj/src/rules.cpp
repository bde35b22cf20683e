#include "rulemix/rules.hpp"

#include <cctype>
#include <memory>
#include <sstream>

#include "rulemix/errors.hpp"
#include "rulemix/jsonl.hpp"
#include "rulemix/llm_client.hpp"
#include "rulemix/text.hpp"

namespace rulemix::rules {

using nlohmann::ordered_json;

const Rule& rule_by_id(std::string_view id) {
    for (const auto& rule : builtin_rules())
        if (rule.id == id) return rule;
    throw ConfigError("unknown rule id '" + std::string(id) + "'");
}

std::optional<std::size_t> rule_order(std::string_view id) {
    const auto& all = builtin_rules();
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].id == id) return i;
    return std::nullopt;
}

std::string catalog() {
    std::ostringstream out;
    for (const auto& rule : builtin_rules()) {
        out << rule.id << "\n";
        out << "  name: " << rule.name << "\n";
        out << "  category: " << rule.category << "\n";
        out << "  prompt: " << rule.rule_prompt << "\n";
        for (std::size_t i = 0; i < rule.examples.size(); ++i)
            out << "  example " << (i + 1) << ": " << rule.examples[i] << "\n";
        out << "\n";
    }
    return out.str();
}

std::vector<BaseCorpusEntry> load_base_corpus(const std::filesystem::path& path) {
    std::vector<BaseCorpusEntry> corpus;
    jsonl::for_each(path, [&](std::size_t lineno, const ordered_json& row) {
        BaseCorpusEntry entry;
        try {
            entry.instruction = row.at("instruction").get<std::string>();
            entry.response = row.at("response").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (text::trim(entry.instruction).empty() || text::trim(entry.response).empty())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": instruction and response must be non-empty");
        corpus.push_back(std::move(entry));
    });
    if (corpus.empty()) throw ConfigError("base corpus " + path.string() + " is empty");
    return corpus;
}

namespace {

std::string join_names(const std::vector<std::string>& names) {
    if (names.size() == 1) return names[0];
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += (i + 1 == names.size()) ? (names.size() == 2 ? " and " : ", and ") : ", ";
        out += names[i];
    }
    return out;
}

std::string chunk_prompt(const std::vector<BaseCorpusEntry>& corpus, std::size_t begin, std::size_t end,
                         const std::string& perspective_list) {
    std::string prompt =
        "Analyze the following instruction-response pairs from the perspective of " + perspective_list +
        ". Identify the distinct rules by which these instructions achieve their characteristic style.\n\n";
    for (std::size_t i = begin; i < end; ++i) {
        prompt += "Example " + std::to_string(i - begin + 1) + ":\nInstruction: " + corpus[i].instruction +
                  "\nResponse: " + corpus[i].response + "\n\n";
    }
    prompt +=
        "Respond with a numbered list (1., 2., ...), one rule per line. Give each rule a short name "
        "followed by a one-sentence description.";
    return prompt;
}

std::vector<std::string> parse_numbered_list(const std::string& completion) {
    std::vector<std::string> items;
    std::istringstream in(completion);
    std::string line;
    while (std::getline(in, line)) {
        const std::string trimmed = text::trim(line);
        const std::string_view sv{trimmed};
        std::size_t digits = 0;
        while (digits < sv.size() && std::isdigit(static_cast<unsigned char>(sv[digits]))) ++digits;
        if (digits == 0 || digits >= sv.size()) continue;
        if (sv[digits] != '.' && sv[digits] != ')') continue;
        std::string body{text::trim(sv.substr(digits + 1))};
        if (!body.empty()) items.push_back(std::move(body));
    }
    return items;
}

}  // namespace

ExtractionOutcome extract_rules(llm::LlmClient& client, const std::vector<BaseCorpusEntry>& base_corpus,
                                const ExtractOptions& options) {
    if (base_corpus.empty()) throw ConfigError("rule extraction requires a non-empty base corpus");
    std::vector<std::string> perspectives = options.perspectives;
    if (perspectives.empty())
        perspectives = {"psychology", "education", "sociology", "cognitive science"};
    const std::string perspective_list = join_names(perspectives);

    std::vector<std::pair<std::size_t, std::size_t>> chunks;
    std::size_t begin = 0;
    while (begin < base_corpus.size()) {
        std::size_t end = begin + 1;
        while (end < base_corpus.size() &&
               chunk_prompt(base_corpus, begin, end + 1, perspective_list).size() <= options.char_budget)
            ++end;
        chunks.emplace_back(begin, end);
        begin = end;
    }

    ExtractionOutcome outcome;
    std::unique_ptr<jsonl::Writer> audit;
    if (!options.audit_path.empty()) audit = std::make_unique<jsonl::Writer>(options.audit_path);

    for (std::size_t c = 0; c < chunks.size(); ++c) {
        const std::string prompt = chunk_prompt(base_corpus, chunks[c].first, chunks[c].second,
                                                perspective_list);
        const std::string completion = client.complete(prompt);
        outcome.raw_completions.push_back(completion);
        if (audit) {
            ordered_json row;
            row["kind"] = "completion";
            row["chunk"] = c;
            row["text"] = completion;
            audit->write(row);
        }
        const auto items = parse_numbered_list(completion);
        if (items.empty())
            throw PipelineError("rule extraction chunk " + std::to_string(c) +
                                " produced no numbered list (raw completion persisted)");
        for (const auto& item : items) {
            bool duplicate = false;
            for (const auto& seen : outcome.candidates)
                if (text::fold(seen) == text::fold(item)) duplicate = true;
            if (duplicate) continue;
            outcome.candidates.push_back(item);
            if (audit) {
                ordered_json row;
                row["kind"] = "candidate";
                row["chunk"] = c;
                row["text"] = item;
                audit->write(row);
            }
        }
    }
    return outcome;
}

}  // namespace rulemix::rules
