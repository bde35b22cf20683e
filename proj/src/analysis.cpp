#include "rulemix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "rulemix/errors.hpp"
#include "rulemix/mixing.hpp"
#include "rulemix/rules.hpp"
#include "rulemix/taxonomy.hpp"

namespace rulemix::analysis {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

EvalResult load_eval_result(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open eval result " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }

    EvalResult result;
    const auto& tax = Taxonomy::mmlu();
    try {
        result.config_id = doc.at("config_id").get<std::string>();
        const json& tasks = doc.at("tasks");
        if (!tasks.is_object() || tasks.empty())
            throw ConfigError(path.string() + ": 'tasks' must be a non-empty object");
        for (const auto& [task, cell] : tasks.items()) {
            if (!tax.has_task(task))
                throw ConfigError(path.string() + ": unknown task '" + task + "'");
            double accuracy = 0.0;
            if (cell.contains("correct") || cell.contains("total")) {
                TaskCounts counts;
                counts.correct = cell.at("correct").get<std::int64_t>();
                counts.total = cell.at("total").get<std::int64_t>();
                if (counts.total < 1 || counts.correct < 0 || counts.correct > counts.total)
                    throw ConfigError(path.string() + ": bad counts for task '" + task + "'");
                accuracy = static_cast<double>(counts.correct) / static_cast<double>(counts.total);
                result.per_task_counts[task] = counts;
            } else {
                accuracy = cell.at("accuracy").get<double>();
            }
            if (accuracy < 0.0 || accuracy > 1.0)
                throw ConfigError(path.string() + ": accuracy out of [0,1] for task '" + task + "'");
            result.per_task_accuracy[task] = accuracy;
        }
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (result.per_task_counts.size() != result.per_task_accuracy.size())
        result.per_task_counts.clear();  // pooling needs counts for every task
    return result;
}

std::string to_string(DeltaCategory category) {
    switch (category) {
        case DeltaCategory::Improved: return "Improved";
        case DeltaCategory::Declined: return "Declined";
        default: return "Unchanged";
    }
}

std::int64_t round_percent_units(double accuracy, int digits) {
    if (digits < 0 || digits > 9) throw ConfigError("precision digits must be in [0,9]");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, 100.0 * accuracy);
    std::string text = buf;
    bool negative = false;
    std::size_t pos = 0;
    if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
        negative = text[0] == '-';
        pos = 1;
    }
    std::int64_t units = 0;
    for (; pos < text.size(); ++pos) {
        if (text[pos] == '.') continue;
        units = units * 10 + (text[pos] - '0');
    }
    return negative ? -units : units;
}

DeltaCategory categorize(double config_acc, double baseline_acc, int digits) {
    const std::int64_t c = round_percent_units(config_acc, digits);
    const std::int64_t b = round_percent_units(baseline_acc, digits);
    if (c > b) return DeltaCategory::Improved;
    if (c < b) return DeltaCategory::Declined;
    return DeltaCategory::Unchanged;
}

SubjectAccuracy subject_accuracy(const EvalResult& result) {
    const auto& tax = Taxonomy::mmlu();
    SubjectAccuracy out;
    if (!result.per_task_counts.empty()) {
        out.from_counts = true;
        std::map<std::string, TaskCounts> pooled;
        for (const auto& [task, counts] : result.per_task_counts) {
            const auto subject = tax.subject_of(task);
            if (!subject) throw ConfigError("unknown task '" + task + "'");
            pooled[*subject].correct += counts.correct;
            pooled[*subject].total += counts.total;
        }
        for (const auto& [subject, counts] : pooled)
            out.by_subject[subject] =
                static_cast<double>(counts.correct) / static_cast<double>(counts.total);
        return out;
    }
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& [task, accuracy] : result.per_task_accuracy) {
        const auto subject = tax.subject_of(task);
        if (!subject) throw ConfigError("unknown task '" + task + "'");
        sums[*subject].first += accuracy;
        sums[*subject].second += 1;
    }
    for (const auto& [subject, sum] : sums)
        out.by_subject[subject] = sum.first / static_cast<double>(sum.second);
    return out;
}

AgreementLevel parse_agreement_level(std::string_view tag) {
    if (tag == "task") return AgreementLevel::Task;
    if (tag == "subject") return AgreementLevel::Subject;
    throw ConfigError("unknown agreement level '" + std::string(tag) + "' (expected task or subject)");
}

namespace {

void check_coverage(const EvalResult& baseline, const std::vector<EvalResult>& configs) {
    if (configs.empty()) throw ConfigError("agreement needs at least one non-baseline config");
    std::set<std::string> base_tasks;
    for (const auto& [task, _] : baseline.per_task_accuracy) base_tasks.insert(task);
    for (const auto& config : configs) {
        std::set<std::string> tasks;
        for (const auto& [task, _] : config.per_task_accuracy) tasks.insert(task);
        if (tasks != base_tasks)
            throw ConfigError("config '" + config.config_id + "' covers a different task set than '" +
                              baseline.config_id + "'");
    }
}

/// Unit name -> accuracy at the requested level, in fixed unit order.
std::vector<std::pair<std::string, double>> unit_accuracies(const EvalResult& result,
                                                            AgreementLevel level) {
    std::vector<std::pair<std::string, double>> units;
    if (level == AgreementLevel::Task) {
        for (const auto& [task, accuracy] : result.per_task_accuracy) units.emplace_back(task, accuracy);
        return units;
    }
    const auto by_subject = subject_accuracy(result).by_subject;
    for (const auto& subject : Taxonomy::mmlu().subjects()) {
        auto it = by_subject.find(subject);
        if (it != by_subject.end()) units.emplace_back(subject, it->second);
    }
    return units;
}

std::vector<std::string> column_order(const std::vector<EvalResult>& configs) {
    std::vector<std::string> present;
    for (const auto& config : configs) present.push_back(config.config_id);
    std::vector<std::string> ordered;
    auto take = [&](const std::string& id) {
        auto it = std::find(present.begin(), present.end(), id);
        if (it != present.end()) {
            ordered.push_back(id);
            present.erase(it);
        }
    };
    for (const auto& rule : rules::builtin_rules()) take(rule.id);
    for (const auto& config : mixing::all_mix_configs()) take(config.id);
    for (const auto& id : present) ordered.push_back(id);
    return ordered;
}

std::string format_units(std::int64_t units, int digits, bool forced_sign) {
    std::string out;
    if (units < 0)
        out = "-";
    else if (forced_sign && units > 0)
        out = "+";
    const std::int64_t magnitude = units < 0 ? -units : units;
    std::string body = std::to_string(magnitude);
    if (digits > 0) {
        if (static_cast<int>(body.size()) <= digits)
            body.insert(0, static_cast<std::size_t>(digits) - body.size() + 1, '0');
        body.insert(body.size() - static_cast<std::size_t>(digits), ".");
    }
    return out + body;
}

}  // namespace

AgreementReport agreement(const EvalResult& baseline, const std::vector<EvalResult>& configs,
                          AgreementLevel level, int digits) {
    check_coverage(baseline, configs);
    AgreementReport report;
    report.level = level;
    report.baseline_id = baseline.config_id;
    for (const auto& config : configs) report.config_ids.push_back(config.config_id);

    const auto base_units = unit_accuracies(baseline, level);
    std::vector<std::vector<std::pair<std::string, double>>> config_units;
    for (const auto& config : configs) config_units.push_back(unit_accuracies(config, level));

    const std::size_t k = configs.size();
    std::size_t half_or_more = 0;
    std::size_t unanimous = 0;
    for (std::size_t u = 0; u < base_units.size(); ++u) {
        UnitAgreement unit;
        unit.unit = base_units[u].first;
        std::size_t counts[3] = {0, 0, 0};
        for (std::size_t c = 0; c < k; ++c) {
            if (config_units[c][u].first != unit.unit)
                throw PipelineError("unit order mismatch at " + unit.unit);
            const DeltaCategory category =
                categorize(config_units[c][u].second, base_units[u].second, digits);
            unit.categories[configs[c].config_id] = category;
            ++counts[static_cast<int>(category)];
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < 3; ++i)
            if (counts[i] > counts[best]) best = i;
        unit.modal = static_cast<DeltaCategory>(best);
        const std::size_t modal_count = counts[best];
        unit.percent = 100.0 * static_cast<double>(modal_count) / static_cast<double>(k);
        if (modal_count * 2 >= k) ++half_or_more;
        if (modal_count == k) ++unanimous;
        report.units.push_back(std::move(unit));
    }
    const double n = static_cast<double>(report.units.size());
    if (n > 0) {
        report.half_or_more = static_cast<double>(half_or_more) / n;
        report.unanimous = static_cast<double>(unanimous) / n;
    }
    return report;
}

std::string delta_table(const EvalResult& baseline, const std::vector<EvalResult>& configs,
                        AgreementLevel level, int digits) {
    check_coverage(baseline, configs);
    const auto columns = column_order(configs);
    std::map<std::string, const EvalResult*> by_id;
    for (const auto& config : configs) by_id[config.config_id] = &config;

    const auto base_units = unit_accuracies(baseline, level);
    std::map<std::string, std::vector<std::pair<std::string, double>>> units_by_config;
    for (const auto& config : configs) units_by_config[config.config_id] = unit_accuracies(config, level);

    std::string csv = "unit";
    for (const auto& id : columns) csv += "," + id;
    csv += "\n";
    for (std::size_t u = 0; u < base_units.size(); ++u) {
        csv += base_units[u].first;
        const std::int64_t base = round_percent_units(base_units[u].second, digits);
        for (const auto& id : columns) {
            const std::int64_t value = round_percent_units(units_by_config[id][u].second, digits);
            csv += "," + format_units(value - base, digits, true);
        }
        csv += "\n";
    }
    return csv;
}

std::string agreement_csv(const AgreementReport& report) {
    std::string csv = "unit";
    for (const auto& id : report.config_ids) csv += "," + id;
    csv += ",modal,agreement_percent\n";
    char buf[32];
    for (const auto& unit : report.units) {
        csv += unit.unit;
        for (const auto& id : report.config_ids) csv += "," + to_string(unit.categories.at(id));
        std::snprintf(buf, sizeof(buf), "%.2f", unit.percent);
        csv += "," + to_string(unit.modal) + "," + buf + "\n";
    }
    return csv;
}

std::string agreement_json(const AgreementReport& report) {
    ordered_json doc;
    doc["level"] = report.level == AgreementLevel::Task ? "task" : "subject";
    doc["baseline"] = report.baseline_id;
    doc["configs"] = report.config_ids;
    ordered_json units = ordered_json::array();
    for (const auto& unit : report.units) {
        ordered_json row;
        row["unit"] = unit.unit;
        ordered_json categories;
        for (const auto& id : report.config_ids) categories[id] = to_string(unit.categories.at(id));
        row["categories"] = categories;
        row["modal"] = to_string(unit.modal);
        row["agreement_percent"] = unit.percent;
        units.push_back(std::move(row));
    }
    doc["units"] = std::move(units);
    doc["summary"]["half_or_more_fraction"] = report.half_or_more;
    doc["summary"]["half_or_more_percent"] = 100.0 * report.half_or_more;
    doc["summary"]["unanimous_fraction"] = report.unanimous;
    doc["summary"]["unanimous_percent"] = 100.0 * report.unanimous;
    return doc.dump(2) + "\n";
}

}  // namespace rulemix::analysis
