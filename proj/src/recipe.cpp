#include "rulemix/recipe.hpp"

#include <fstream>

#include "json.hpp"
#include "rulemix/errors.hpp"

namespace rulemix::recipe {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void validate(const TrainingRecipe& recipe) {
    if (recipe.datasets.empty()) throw ConfigError("recipe needs at least one dataset path");
    if (recipe.base_model.empty()) throw ConfigError("recipe base_model must not be empty");
    if (recipe.learning_rate.empty()) throw ConfigError("recipe learning_rate must not be empty");
    if (recipe.per_device_batch_size < 1 || recipe.gradient_accumulation_steps < 1 ||
        recipe.epochs < 1 || recipe.eval_shots < 0)
        throw ConfigError("recipe counts must be positive");
    if (recipe.warmup_ratio < 0.0 || recipe.warmup_ratio > 1.0)
        throw ConfigError("recipe warmup_ratio must be in [0,1]");
}

}  // namespace

std::string manifest_json(const TrainingRecipe& recipe) {
    validate(recipe);
    ordered_json doc;
    doc["base_model"] = recipe.base_model;
    doc["method"] = recipe.method;
    doc["per_device_batch_size"] = recipe.per_device_batch_size;
    doc["gradient_accumulation_steps"] = recipe.gradient_accumulation_steps;
    doc["learning_rate"] = recipe.learning_rate;
    doc["lr_scheduler"] = recipe.lr_scheduler;
    doc["warmup_ratio"] = recipe.warmup_ratio;
    doc["epochs"] = recipe.epochs;
    doc["eval"]["benchmark"] = recipe.eval_benchmark;
    doc["eval"]["shots"] = recipe.eval_shots;
    doc["datasets"] = recipe.datasets;
    return doc.dump(2) + "\n";
}

TrainingRecipe parse_manifest(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("unparseable recipe manifest: ") + e.what());
    }
    TrainingRecipe recipe;
    try {
        recipe.base_model = doc.at("base_model").get<std::string>();
        recipe.method = doc.at("method").get<std::string>();
        recipe.per_device_batch_size = doc.at("per_device_batch_size").get<int>();
        recipe.gradient_accumulation_steps = doc.at("gradient_accumulation_steps").get<int>();
        recipe.learning_rate = doc.at("learning_rate").get<std::string>();
        recipe.lr_scheduler = doc.at("lr_scheduler").get<std::string>();
        recipe.warmup_ratio = doc.at("warmup_ratio").get<double>();
        recipe.epochs = doc.at("epochs").get<int>();
        recipe.eval_benchmark = doc.at("eval").at("benchmark").get<std::string>();
        recipe.eval_shots = doc.at("eval").at("shots").get<int>();
        recipe.datasets = doc.at("datasets").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad recipe manifest: ") + e.what());
    }
    validate(recipe);
    return recipe;
}

void write_manifest(const TrainingRecipe& recipe, const std::filesystem::path& path) {
    const std::string text = manifest_json(recipe);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PipelineError("cannot write manifest " + path.string());
    out << text;
}

TrainingRecipe load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text);
}

}  // namespace rulemix::recipe
