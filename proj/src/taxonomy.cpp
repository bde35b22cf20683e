#include "rulemix/taxonomy.hpp"

#include <algorithm>
#include <array>
#include <cassert>

namespace rulemix {

namespace {

constexpr const char* kStem = "STEM";
constexpr const char* kHumanities = "Humanities";
constexpr const char* kSocial = "Social Sciences";
constexpr const char* kOther = "Other";

struct Row {
    const char* task;
    const char* subject;
};

// The standard 57-task grouping into four subjects.
constexpr std::array<Row, 57> kTable{{
    {"abstract_algebra", kStem},
    {"anatomy", kOther},
    {"astronomy", kStem},
    {"business_ethics", kOther},
    {"clinical_knowledge", kOther},
    {"college_biology", kStem},
    {"college_chemistry", kStem},
    {"college_computer_science", kStem},
    {"college_mathematics", kStem},
    {"college_medicine", kOther},
    {"college_physics", kStem},
    {"computer_security", kStem},
    {"conceptual_physics", kStem},
    {"econometrics", kSocial},
    {"electrical_engineering", kStem},
    {"elementary_mathematics", kStem},
    {"formal_logic", kHumanities},
    {"global_facts", kOther},
    {"high_school_biology", kStem},
    {"high_school_chemistry", kStem},
    {"high_school_computer_science", kStem},
    {"high_school_european_history", kHumanities},
    {"high_school_geography", kSocial},
    {"high_school_government_and_politics", kSocial},
    {"high_school_macroeconomics", kSocial},
    {"high_school_mathematics", kStem},
    {"high_school_microeconomics", kSocial},
    {"high_school_physics", kStem},
    {"high_school_psychology", kSocial},
    {"high_school_statistics", kStem},
    {"high_school_us_history", kHumanities},
    {"high_school_world_history", kHumanities},
    {"human_aging", kOther},
    {"human_sexuality", kSocial},
    {"international_law", kHumanities},
    {"jurisprudence", kHumanities},
    {"logical_fallacies", kHumanities},
    {"machine_learning", kStem},
    {"management", kOther},
    {"marketing", kOther},
    {"medical_genetics", kOther},
    {"miscellaneous", kOther},
    {"moral_disputes", kHumanities},
    {"moral_scenarios", kHumanities},
    {"nutrition", kOther},
    {"philosophy", kHumanities},
    {"prehistory", kHumanities},
    {"professional_accounting", kOther},
    {"professional_law", kHumanities},
    {"professional_medicine", kOther},
    {"professional_psychology", kSocial},
    {"public_relations", kSocial},
    {"security_studies", kSocial},
    {"sociology", kSocial},
    {"us_foreign_policy", kSocial},
    {"virology", kOther},
    {"world_religions", kHumanities},
}};

}  // namespace

Taxonomy::Taxonomy() {
    table_.reserve(kTable.size());
    tasks_.reserve(kTable.size());
    for (const Row& row : kTable) {
        table_.emplace_back(row.task, row.subject);
        tasks_.emplace_back(row.task);
    }
    assert(std::is_sorted(tasks_.begin(), tasks_.end()));
    subjects_ = {kStem, kHumanities, kSocial, kOther};
}

const Taxonomy& Taxonomy::mmlu() {
    static const Taxonomy instance;
    return instance;
}

std::optional<std::string> Taxonomy::subject_of(std::string_view task) const {
    auto it = std::lower_bound(table_.begin(), table_.end(), task,
                               [](const auto& row, std::string_view t) { return row.first < t; });
    if (it == table_.end() || it->first != task) return std::nullopt;
    return it->second;
}

bool Taxonomy::has_task(std::string_view task) const { return subject_of(task).has_value(); }

}  // namespace rulemix
