#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rulemix {

/// Fixed task -> subject table for the 57-task MMLU layout. Immutable and
/// built at startup; every task string seen anywhere in the pipeline must
/// resolve here.
class Taxonomy {
public:
    static const Taxonomy& mmlu();

    std::optional<std::string> subject_of(std::string_view task) const;
    bool has_task(std::string_view task) const;

    /// All task names, sorted.
    const std::vector<std::string>& tasks() const { return tasks_; }

    /// The four subjects, in fixed report order.
    const std::vector<std::string>& subjects() const { return subjects_; }

private:
    Taxonomy();
    std::vector<std::pair<std::string, std::string>> table_;  // sorted by task
    std::vector<std::string> tasks_;
    std::vector<std::string> subjects_;
};

}  // namespace rulemix
