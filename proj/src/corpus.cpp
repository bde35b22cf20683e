#include "rulemix/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "rulemix/errors.hpp"
#include "rulemix/jsonl.hpp"
#include "rulemix/taxonomy.hpp"
#include "rulemix/text.hpp"

namespace rulemix::corpus {

namespace {

constexpr std::size_t kMaxChoices = 26;  // lettered A..Z

std::string letter(int index) { return std::string(1, static_cast<char>('A' + index)); }

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    // Rejection sampling keeps the draw portable across standard libraries.
    const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Minimal RFC-4180 reader: quoted fields, doubled quotes, newlines inside
// quotes. Returns rows of raw fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                any = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                if (any || !field.empty()) {
                    row.push_back(std::move(field));
                    rows.push_back(std::move(row));
                }
                field.clear();
                row.clear();
                any = false;
                break;
            default:
                field.push_back(c);
                any = true;
                break;
        }
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

void load_jsonl_file(const std::filesystem::path& path, LoadReport& report) {
    jsonl::for_each(path, [&](std::size_t lineno, const jsonl::ordered_json& obj) {
        SeedRecord rec;
        try {
            rec.id = obj.at("id").get<std::string>();
            rec.task = obj.at("task").get<std::string>();
            rec.question = obj.at("question").get<std::string>();
            rec.choices = obj.at("choices").get<std::vector<std::string>>();
            rec.answer = obj.at("answer").get<int>();
            if (obj.contains("subject")) rec.subject = obj["subject"].get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            report.errors.push_back({lineno, path.string(), std::string("malformed row: ") + e.what()});
            return;
        }
        if (auto err = check_record(rec)) {
            report.errors.push_back({lineno, path.string(), *err});
            return;
        }
        if (rec.subject.empty()) rec.subject = *Taxonomy::mmlu().subject_of(rec.task);
        report.records.push_back(std::move(rec));
    });
}

void load_csv_file(const std::filesystem::path& path, LoadReport& report, std::size_t& sequence) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const auto rows = parse_csv(buf.str());
    std::size_t rowno = 0;
    for (const auto& row : rows) {
        ++rowno;
        if (row.size() != 7) {
            report.errors.push_back({rowno, path.string(),
                                     "malformed row: expected 7 fields, got " + std::to_string(row.size())});
            continue;
        }
        const std::string answer_field = text::trim(row[5]);
        if (answer_field.size() != 1 || (std::toupper(static_cast<unsigned char>(answer_field[0])) < 'A' ||
                                         std::toupper(static_cast<unsigned char>(answer_field[0])) > 'D')) {
            report.errors.push_back({rowno, path.string(), "malformed row: answer letter must be A-D"});
            continue;
        }
        SeedRecord rec;
        rec.task = text::trim(row[6]);
        ++sequence;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "%06zu", sequence);
        rec.id = rec.task + "-" + idbuf;
        rec.question = row[0];
        rec.choices = {row[1], row[2], row[3], row[4]};
        rec.answer = std::toupper(static_cast<unsigned char>(answer_field[0])) - 'A';
        if (auto err = check_record(rec)) {
            report.errors.push_back({rowno, path.string(), *err});
            continue;
        }
        rec.subject = *Taxonomy::mmlu().subject_of(rec.task);
        report.records.push_back(std::move(rec));
    }
}

}  // namespace

std::optional<std::string> check_record(const SeedRecord& record) {
    if (record.id.empty()) return "empty id";
    if (text::trim(record.question).empty()) return "empty question";
    if (record.choices.size() < 2 || record.choices.size() > kMaxChoices)
        return "choice count " + std::to_string(record.choices.size()) + " outside 2..26";
    for (const auto& c : record.choices)
        if (text::trim(c).empty()) return "empty choice text";
    if (record.answer < 0 || static_cast<std::size_t>(record.answer) >= record.choices.size())
        return "answer out of bounds";
    auto subject = Taxonomy::mmlu().subject_of(record.task);
    if (!subject) return "unknown task '" + record.task + "'";
    if (!record.subject.empty() && record.subject != *subject)
        return "subject '" + record.subject + "' does not match taxonomy ('" + *subject + "')";
    return std::nullopt;
}

PoolFormat parse_pool_format(std::string_view tag) {
    if (tag == "jsonl") return PoolFormat::Jsonl;
    if (tag == "mmlu-csv") return PoolFormat::MmluCsv;
    throw ConfigError("unsupported pool format '" + std::string(tag) + "' (expected jsonl or mmlu-csv)");
}

LoadReport load_seed_pool(const std::filesystem::path& path, PoolFormat format) {
    if (!std::filesystem::exists(path)) throw ConfigError("seed pool does not exist: " + path.string());
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(path)) {
        const std::string ext = format == PoolFormat::Jsonl ? ".jsonl" : ".csv";
        for (const auto& entry : std::filesystem::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw ConfigError("no " + ext + " files under " + path.string());
    } else {
        files.push_back(path);
    }

    LoadReport report;
    std::size_t sequence = 0;
    for (const auto& file : files) {
        if (format == PoolFormat::Jsonl)
            load_jsonl_file(file, report);
        else
            load_csv_file(file, report, sequence);
    }

    std::set<std::string> seen;
    std::vector<SeedRecord> unique;
    unique.reserve(report.records.size());
    for (auto& rec : report.records) {
        if (!seen.insert(rec.id).second) {
            report.errors.push_back({0, "", "duplicate id '" + rec.id + "'"});
            continue;
        }
        unique.push_back(std::move(rec));
    }
    report.records = std::move(unique);
    return report;
}

std::vector<AllocationEntry> stratified_allocation(const std::map<std::string, std::size_t>& task_counts,
                                                   std::size_t target_n) {
    if (task_counts.empty()) throw ConfigError("empty pool");
    std::size_t total = 0;
    for (const auto& [task, count] : task_counts) {
        if (count == 0) throw ConfigError("task '" + task + "' has zero records");
        total += count;
    }
    if (target_n < task_counts.size())
        throw ConfigError("target_n " + std::to_string(target_n) + " is smaller than the " +
                          std::to_string(task_counts.size()) + " tasks present");
    if (target_n > total)
        throw ConfigError("target_n " + std::to_string(target_n) + " exceeds pool size " + std::to_string(total));

    // Exact integer largest-remainder: quota = target_n * count / total.
    struct Work {
        std::string task;
        std::size_t count;
        std::size_t base;
        std::uint64_t remainder;  // (target_n * count) % total
        std::size_t alloc;
    };
    std::vector<Work> work;
    work.reserve(task_counts.size());
    std::size_t assigned = 0;
    for (const auto& [task, count] : task_counts) {
        const std::uint64_t scaled = static_cast<std::uint64_t>(target_n) * count;
        Work w{task, count, static_cast<std::size_t>(scaled / total), scaled % total, 0};
        w.alloc = w.base;
        assigned += w.base;
        work.push_back(std::move(w));
    }

    std::size_t leftover = target_n - assigned;
    std::vector<std::size_t> order(work.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (work[a].remainder != work[b].remainder) return work[a].remainder > work[b].remainder;
        return work[a].task < work[b].task;
    });
    for (std::size_t i = 0; i < leftover; ++i) ++work[order[i]].alloc;

    // Floor of one per present task: lift zeros, paying with seats from the
    // currently largest allocation.
    for (auto& w : work) {
        if (w.alloc > 0) continue;
        auto donor = std::max_element(work.begin(), work.end(), [](const Work& a, const Work& b) {
            if (a.alloc != b.alloc) return a.alloc < b.alloc;
            return a.task > b.task;  // prefer the lexicographically first among maxima
        });
        --donor->alloc;
        w.alloc = 1;
    }

    std::vector<AllocationEntry> result;
    result.reserve(work.size());
    for (const auto& w : work) result.push_back({w.task, w.count, w.alloc});
    return result;
}

std::vector<SeedRecord> stratified_sample(const std::vector<SeedRecord>& pool, std::size_t target_n,
                                          std::uint64_t seed) {
    std::map<std::string, std::size_t> counts;
    for (const auto& rec : pool) ++counts[rec.task];
    const auto allocation = stratified_allocation(counts, target_n);

    std::map<std::string, std::vector<const SeedRecord*>> by_task;
    for (const auto& rec : pool) by_task[rec.task].push_back(&rec);
    for (auto& [task, records] : by_task)
        std::sort(records.begin(), records.end(),
                  [](const SeedRecord* a, const SeedRecord* b) { return a->id < b->id; });

    std::mt19937_64 rng(seed);
    std::vector<SeedRecord> sample;
    sample.reserve(target_n);
    for (const auto& entry : allocation) {
        auto& records = by_task[entry.task];
        // Partial Fisher-Yates: the first `allocated` slots are a uniform draw.
        for (std::size_t i = 0; i < entry.allocated; ++i) {
            const std::size_t j = i + uniform_below(rng, records.size() - i);
            std::swap(records[i], records[j]);
        }
        for (std::size_t i = 0; i < entry.allocated; ++i) sample.push_back(*records[i]);
    }
    std::sort(sample.begin(), sample.end(), [](const SeedRecord& a, const SeedRecord& b) {
        if (a.task != b.task) return a.task < b.task;
        return a.id < b.id;
    });
    return sample;
}

std::string render_instruction(const SeedRecord& record) {
    return record.question + "\n" + render_choices(record);
}

std::string render_response(const SeedRecord& record) { return letter(record.answer); }

std::string render_choices(const SeedRecord& record) {
    std::string out;
    for (std::size_t i = 0; i < record.choices.size(); ++i) {
        if (i) out.push_back('\n');
        out += letter(static_cast<int>(i)) + ". " + record.choices[i];
    }
    return out;
}

std::string render_reference_answer(const SeedRecord& record) {
    return letter(record.answer) + ". " + record.choices[record.answer];
}

std::string pair_id(std::string_view seed_id, std::string_view rule_id) {
    return std::string(seed_id) + "::" + std::string(rule_id);
}

SftPair seed_pair(const SeedRecord& record) {
    SftPair pair;
    pair.id = pair_id(record.id, kSeedRuleId);
    pair.source_seed_id = record.id;
    pair.rule_id = kSeedRuleId;
    pair.instruction = render_instruction(record);
    pair.response = render_response(record);
    pair.task = record.task;
    pair.subject = record.subject;
    return pair;
}

std::optional<std::string> question_of_pair(const SftPair& pair, const SeedRecord& record) {
    const std::string suffix = "\n" + render_choices(record);
    if (pair.instruction.size() <= suffix.size()) return std::nullopt;
    if (pair.instruction.compare(pair.instruction.size() - suffix.size(), suffix.size(), suffix) != 0)
        return std::nullopt;
    return pair.instruction.substr(0, pair.instruction.size() - suffix.size());
}

SftPair rewritten_pair(const SeedRecord& record, std::string_view rule_id,
                       const std::string& rewritten_question) {
    SftPair pair;
    pair.id = pair_id(record.id, rule_id);
    pair.source_seed_id = record.id;
    pair.rule_id = std::string(rule_id);
    pair.instruction = rewritten_question + "\n" + render_choices(record);
    pair.response = render_response(record);
    pair.task = record.task;
    pair.subject = record.subject;
    return pair;
}

std::size_t export_dataset(const std::vector<SftPair>& pairs, const std::filesystem::path& path) {
    jsonl::Writer writer(path);
    for (const auto& pair : pairs) {
        jsonl::ordered_json obj;
        obj["id"] = pair.id;
        obj["source_seed_id"] = pair.source_seed_id;
        obj["rule_id"] = pair.rule_id;
        obj["task"] = pair.task;
        obj["subject"] = pair.subject;
        obj["instruction"] = pair.instruction;
        obj["response"] = pair.response;
        writer.write(obj);
    }
    return writer.lines_written();
}

std::vector<SftPair> import_dataset(const std::filesystem::path& path) {
    std::vector<SftPair> pairs;
    jsonl::for_each(path, [&](std::size_t lineno, const jsonl::ordered_json& obj) {
        try {
            SftPair pair;
            pair.id = obj.at("id").get<std::string>();
            pair.source_seed_id = obj.at("source_seed_id").get<std::string>();
            pair.rule_id = obj.at("rule_id").get<std::string>();
            pair.task = obj.at("task").get<std::string>();
            pair.subject = obj.at("subject").get<std::string>();
            pair.instruction = obj.at("instruction").get<std::string>();
            pair.response = obj.at("response").get<std::string>();
            pairs.push_back(std::move(pair));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    });
    return pairs;
}

std::size_t export_seed_records(const std::vector<SeedRecord>& records,
                                const std::filesystem::path& path) {
    jsonl::Writer writer(path);
    for (const auto& rec : records) {
        jsonl::ordered_json obj;
        obj["id"] = rec.id;
        obj["task"] = rec.task;
        obj["subject"] = rec.subject;
        obj["question"] = rec.question;
        obj["choices"] = rec.choices;
        obj["answer"] = rec.answer;
        writer.write(obj);
    }
    return writer.lines_written();
}

std::vector<SeedRecord> import_seed_records(const std::filesystem::path& path) {
    auto report = load_seed_pool(path, PoolFormat::Jsonl);
    if (!report.errors.empty()) {
        const auto& e = report.errors.front();
        throw ConfigError(e.file + ":" + std::to_string(e.row) + ": " + e.message);
    }
    return std::move(report.records);
}

}  // namespace rulemix::corpus
