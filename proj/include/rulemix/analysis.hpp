#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rulemix::analysis {

struct TaskCounts {
    std::int64_t correct = 0;
    std::int64_t total = 0;
};

/// Externally produced evaluation result for one fine-tuned configuration.
struct EvalResult {
    std::string config_id;
    std::map<std::string, double> per_task_accuracy;   // task -> accuracy in [0,1]
    std::map<std::string, TaskCounts> per_task_counts;  // empty unless counts given for every task
};

/// Reads {"config_id": ..., "tasks": {task: {"correct": c, "total": t} |
/// {"accuracy": a}}}. Tasks must exist in the taxonomy.
EvalResult load_eval_result(const std::filesystem::path& path);

enum class DeltaCategory { Improved, Declined, Unchanged };

std::string to_string(DeltaCategory category);

/// Rounds 100*acc to `digits` decimals; the printed decimal value of the
/// double decides (snprintf semantics), so comparisons match reported
/// precision. Returns integer units of 10^-digits percentage points.
std::int64_t round_percent_units(double accuracy, int digits);

/// Compares both accuracies after rounding to `digits` decimal places of
/// percentage points. Equal -> Unchanged.
DeltaCategory categorize(double config_acc, double baseline_acc, int digits = 2);

struct SubjectAccuracy {
    std::map<std::string, double> by_subject;
    bool from_counts = false;  // question-weighted pooling vs unweighted mean
};

SubjectAccuracy subject_accuracy(const EvalResult& result);

enum class AgreementLevel { Task, Subject };

AgreementLevel parse_agreement_level(std::string_view tag);  // "task" | "subject"

struct UnitAgreement {
    std::string unit;  // task or subject name
    std::map<std::string, DeltaCategory> categories;  // config_id -> category
    DeltaCategory modal = DeltaCategory::Unchanged;
    double percent = 0.0;  // 100 * modal count / config count
};

struct AgreementReport {
    AgreementLevel level = AgreementLevel::Task;
    std::string baseline_id;
    std::vector<std::string> config_ids;  // column order used everywhere
    std::vector<UnitAgreement> units;     // fixed unit order
    double half_or_more = 0.0;  // fraction of units with percent >= 50, in [0,1]
    double unanimous = 0.0;     // fraction with percent == 100
};

/// Per-unit category agreement across configs vs the baseline. All results
/// must cover the same task set. Modal ties resolve to the first category
/// in enum order; the percentage is unaffected.
AgreementReport agreement(const EvalResult& baseline, const std::vector<EvalResult>& configs,
                          AgreementLevel level, int digits = 2);

/// CSV of signed per-unit accuracy deltas in percentage points, one column
/// per config. Columns follow rule-registry order, then mix config order,
/// then remaining configs in input order. Cells like "+5.00" / "-6.14" /
/// "0.00" at the given precision.
std::string delta_table(const EvalResult& baseline, const std::vector<EvalResult>& configs,
                        AgreementLevel level, int digits = 2);

/// CSV view of an agreement report: unit, per-config categories, modal,
/// agreement percent.
std::string agreement_csv(const AgreementReport& report);

/// JSON document with per-unit detail and summary fractions.
std::string agreement_json(const AgreementReport& report);

}  // namespace rulemix::analysis
