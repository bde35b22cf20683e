#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rulemix::recipe {

/// Documentation-only record of the fine-tuning setup; nothing here runs
/// training. learning_rate stays a string so the manifest carries the
/// literal spelling (e.g. "5e-6") through round-trips.
struct TrainingRecipe {
    std::string base_model = "Meta-Llama-3-8B-Instruct";
    std::string method = "lora";
    int per_device_batch_size = 1;
    int gradient_accumulation_steps = 8;
    std::string learning_rate = "5e-6";
    std::string lr_scheduler = "cosine";
    double warmup_ratio = 0.1;
    int epochs = 6;
    int eval_shots = 5;
    std::string eval_benchmark = "mmlu";
    std::vector<std::string> datasets;

    bool operator==(const TrainingRecipe&) const = default;
};

/// Serializes after validation; an empty dataset list is an error.
std::string manifest_json(const TrainingRecipe& recipe);

TrainingRecipe parse_manifest(const std::string& text);

void write_manifest(const TrainingRecipe& recipe, const std::filesystem::path& path);

TrainingRecipe load_manifest(const std::filesystem::path& path);

}  // namespace rulemix::recipe
