#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "rulemix/errors.hpp"
#include "rulemix/recipe.hpp"

using namespace rulemix;
using namespace rulemix::recipe;
using testutil::TempDir;

TEST_CASE("the default recipe matches the training setup") {
    TrainingRecipe recipe;
    CHECK(recipe.base_model == "Meta-Llama-3-8B-Instruct");
    CHECK(recipe.method == "lora");
    CHECK(recipe.per_device_batch_size == 1);
    CHECK(recipe.gradient_accumulation_steps == 8);
    CHECK(recipe.learning_rate == "5e-6");
    CHECK(recipe.lr_scheduler == "cosine");
    CHECK(recipe.warmup_ratio == 0.1);
    CHECK(recipe.epochs == 6);
    CHECK(recipe.eval_shots == 5);
    CHECK(recipe.eval_benchmark == "mmlu");
}

TEST_CASE("the manifest carries the learning rate spelling literally") {
    TrainingRecipe recipe;
    recipe.datasets = {"mixed/ppl-max.jsonl"};
    const auto text = manifest_json(recipe);
    CHECK(text.find("\"learning_rate\": \"5e-6\"") != std::string::npos);

    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["learning_rate"] == "5e-6");
    CHECK(doc["eval"]["benchmark"] == "mmlu");
    CHECK(doc["eval"]["shots"] == 5);
    CHECK(doc["datasets"][0] == "mixed/ppl-max.jsonl");
}

TEST_CASE("manifests round-trip through text and disk") {
    TrainingRecipe recipe;
    recipe.datasets = {"a.jsonl", "b.jsonl"};
    recipe.learning_rate = "2.5e-5";
    recipe.epochs = 3;
    CHECK(parse_manifest(manifest_json(recipe)) == recipe);

    TempDir dir("recipe");
    const auto path = dir.path() / "out" / "recipe.json";
    write_manifest(recipe, path);
    CHECK(load_manifest(path) == recipe);
}

TEST_CASE("recipe validation rejects impossible setups") {
    TrainingRecipe recipe;  // no datasets
    CHECK_THROWS_AS(manifest_json(recipe), ConfigError);

    recipe.datasets = {"a.jsonl"};
    recipe.epochs = 0;
    CHECK_THROWS_AS(manifest_json(recipe), ConfigError);

    recipe.epochs = 1;
    recipe.warmup_ratio = 1.5;
    CHECK_THROWS_AS(manifest_json(recipe), ConfigError);

    recipe.warmup_ratio = 0.1;
    recipe.learning_rate = "";
    CHECK_THROWS_AS(manifest_json(recipe), ConfigError);

    CHECK_THROWS_AS(parse_manifest("not json"), ConfigError);
    CHECK_THROWS_AS(parse_manifest(R"({"base_model":"m"})"), ConfigError);
    CHECK_THROWS_AS(load_manifest("/nonexistent/recipe.json"), ConfigError);
}
