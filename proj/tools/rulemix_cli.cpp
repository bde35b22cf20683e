// Pipeline driver: sample -> augment -> score -> mix -> analyze, plus the
// rule catalog, rule extraction, and the training-recipe emitter. Commands
// communicate through a work directory (seed/, rules/, scores/, mixed/,
// reports/) and a content-addressed response cache.

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>

#include "CLI11.hpp"
#include "rulemix/analysis.hpp"
#include "rulemix/corpus.hpp"
#include "rulemix/errors.hpp"
#include "rulemix/jsonl.hpp"
#include "rulemix/llm_client.hpp"
#include "rulemix/mixing.hpp"
#include "rulemix/recipe.hpp"
#include "rulemix/rewriter.hpp"
#include "rulemix/rules.hpp"
#include "rulemix/run_config.hpp"
#include "rulemix/scoring.hpp"
#include "rulemix/taxonomy.hpp"
#include "rulemix/text.hpp"

namespace fs = std::filesystem;
using namespace rulemix;
using nlohmann::ordered_json;

namespace {

/// Exclusive marker preventing two runs from sharing one work directory.
class WorkdirLock {
public:
    explicit WorkdirLock(const fs::path& workdir) : path_(workdir / ".lock") {
        fs::create_directories(workdir);
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw ConfigError("work directory busy: " + path_.string() +
                              " exists (remove it if no other run is active)");
        const std::string pid = std::to_string(::getpid()) + "\n";
        if (::write(fd_, pid.data(), pid.size()) < 0) { /* best effort */
        }
    }
    WorkdirLock(const WorkdirLock&) = delete;
    WorkdirLock& operator=(const WorkdirLock&) = delete;
    ~WorkdirLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            ::unlink(path_.c_str());
        }
    }

private:
    fs::path path_;
    int fd_ = -1;
};

struct CommonOpts {
    std::string config_file;
    std::string workdir;
    std::string replay;
    std::string record;
    std::vector<std::string> sets;  // key=value overrides
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_endpoint = true) {
    cmd->add_option("--config", opts.config_file, "run configuration file (key = value lines)");
    cmd->add_option("--workdir", opts.workdir, "work directory holding pipeline artifacts");
    cmd->add_option("--set", opts.sets, "override a config key, e.g. --set target_n=100")
        ->type_name("KEY=VALUE");
    if (with_endpoint) {
        cmd->add_option("--replay", opts.replay, "serve every request from this cassette; no network");
        cmd->add_option("--record", opts.record, "append live request/response pairs to this cassette");
    }
}

config::RunConfig resolve_config(const CommonOpts& opts) {
    config::RunConfig cfg =
        opts.config_file.empty() ? config::default_run_config() : config::load_run_config(opts.config_file);
    for (const auto& assignment : opts.sets) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
        config::apply_config_entry(cfg, std::string(text::trim(assignment.substr(0, eq))),
                                   std::string(text::trim(assignment.substr(eq + 1))));
    }
    if (!opts.workdir.empty()) cfg.workdir = opts.workdir;
    cfg.validate();
    return cfg;
}

struct ClientBundle {
    std::shared_ptr<llm::NoNetworkTransport> counting;  // non-null in replay mode
    std::unique_ptr<llm::LlmClient> client;
};

ClientBundle make_client(const llm::EndpointConfig& endpoint, const config::RunConfig& cfg,
                         const CommonOpts& opts) {
    ClientBundle bundle;
    std::shared_ptr<llm::Transport> transport;
    std::shared_ptr<llm::ResponseCache> cache;
    if (!opts.replay.empty()) {
        bundle.counting = std::make_shared<llm::NoNetworkTransport>();
        transport = bundle.counting;
        cache = llm::cache_from_cassette(opts.replay);
    } else {
        transport = llm::make_http_transport();
        cache = std::make_shared<llm::DiskCache>(cfg.cache_directory());
    }
    bundle.client = std::make_unique<llm::LlmClient>(endpoint, transport, cache);
    if (!opts.record.empty()) bundle.client->record_to(opts.record);
    if (cfg.rate_limit_rps > 0)
        bundle.client->set_rate_limiter(std::make_shared<llm::RateLimiter>(cfg.rate_limit_rps));
    return bundle;
}

std::vector<corpus::SeedRecord> load_workdir_seeds(const config::RunConfig& cfg) {
    const fs::path path = cfg.workdir / "seed" / "seed_records.jsonl";
    if (!fs::exists(path))
        throw ConfigError("no seed dataset at " + path.string() + " (run `sample` first)");
    return corpus::import_seed_records(path);
}

std::map<std::string, std::vector<corpus::SftPair>> load_rule_datasets(const config::RunConfig& cfg) {
    std::map<std::string, std::vector<corpus::SftPair>> datasets;
    for (const auto& rule : rules::builtin_rules()) {
        const fs::path path = cfg.workdir / "rules" / (rule.id + ".jsonl");
        if (fs::exists(path)) datasets[rule.id] = corpus::import_dataset(path);
    }
    if (datasets.empty())
        throw ConfigError("no rule datasets under " + (cfg.workdir / "rules").string() +
                          " (run `augment` first)");
    return datasets;
}

// ---------------------------------------------------------------- sample --

struct SampleOpts {
    CommonOpts common;
    std::string pool;
    std::string format;
    std::size_t n = 0;
    std::int64_t seed = -1;
};

int cmd_sample(const SampleOpts& opts) {
    config::RunConfig cfg = resolve_config(opts.common);
    if (!opts.pool.empty()) cfg.seed_pool = opts.pool;
    if (!opts.format.empty()) cfg.pool_format = corpus::parse_pool_format(opts.format);
    if (opts.n > 0) cfg.target_n = opts.n;
    if (opts.seed >= 0) cfg.random_seed = static_cast<std::uint64_t>(opts.seed);
    if (cfg.seed_pool.empty()) throw ConfigError("no seed pool configured (seed_pool key or --pool)");

    WorkdirLock lock(cfg.workdir);
    const corpus::LoadReport report = corpus::load_seed_pool(cfg.seed_pool, cfg.pool_format);
    if (!report.errors.empty()) {
        for (const auto& error : report.errors)
            std::cerr << error.file << ":" << error.row << ": " << error.message << "\n";
        throw ConfigError(std::to_string(report.errors.size()) + " pool records failed validation");
    }

    std::map<std::string, std::size_t> task_counts;
    for (const auto& record : report.records) ++task_counts[record.task];
    const auto allocation = corpus::stratified_allocation(task_counts, cfg.target_n);
    std::printf("%-42s %8s %9s\n", "task", "pool", "allocated");
    for (const auto& entry : allocation)
        std::printf("%-42s %8zu %9zu\n", entry.task.c_str(), entry.pool_count, entry.allocated);

    const auto sample = corpus::stratified_sample(report.records, cfg.target_n, cfg.random_seed);
    corpus::export_seed_records(sample, cfg.workdir / "seed" / "seed_records.jsonl");
    std::vector<corpus::SftPair> pairs;
    pairs.reserve(sample.size());
    for (const auto& record : sample) pairs.push_back(corpus::seed_pair(record));
    corpus::export_dataset(pairs, cfg.workdir / "seed" / "seed_pairs.jsonl");
    std::printf("sampled %zu of %zu records across %zu tasks\n", sample.size(),
                report.records.size(), allocation.size());
    return 0;
}

// --------------------------------------------------------------- augment --

struct AugmentOpts {
    CommonOpts common;
    std::string seeds;
    int max_attempts = 0;
    std::size_t workers = 0;
    bool dry_run = false;
};

int cmd_augment(const AugmentOpts& opts) {
    config::RunConfig cfg = resolve_config(opts.common);
    WorkdirLock lock(cfg.workdir);
    const auto seeds = opts.seeds.empty() ? load_workdir_seeds(cfg)
                                          : corpus::import_seed_records(opts.seeds);

    ClientBundle bundle = make_client(cfg.rewriter, cfg, opts.common);
    rewriter::AugmentOptions aug;
    aug.max_attempts = opts.max_attempts > 0 ? opts.max_attempts : cfg.max_attempts;
    aug.workers = opts.workers > 0 ? opts.workers : cfg.workers;
    aug.dry_run = opts.dry_run;

    const auto outcome = rewriter::augment_dataset(*bundle.client, rules::builtin_rules(), seeds, aug);
    if (opts.dry_run) {
        std::printf("pairs total: %zu\n", outcome.report.pairs_total);
        std::printf("pending requests: %zu\n", outcome.report.pending_requests);
        if (cfg.price_per_request > 0)
            std::printf("estimated cost: $%.2f\n",
                        cfg.price_per_request * static_cast<double>(outcome.report.pending_requests));
        return 0;
    }

    for (const auto& rule : rules::builtin_rules()) {
        const auto& dataset = outcome.datasets.at(rule.id);
        corpus::export_dataset(dataset, cfg.workdir / "rules" / (rule.id + ".jsonl"));
        std::printf("%-42s %zu pairs\n", rule.id.c_str(), dataset.size());
    }
    jsonl::Writer rejections(cfg.workdir / "reports" / "rejections.jsonl");
    for (const auto& r : outcome.report.rejections) {
        ordered_json row;
        row["seed_id"] = r.seed_id;
        row["rule_id"] = r.rule_id;
        row["reasons"] = r.reasons;
        row["raw_completion"] = r.raw_completion;
        rejections.write(row);
    }
    std::printf("valid: %zu  rejected: %zu  live requests: %zu\n", outcome.report.valid,
                outcome.report.rejected, bundle.client->live_requests());
    if (!outcome.report.errors.empty()) {
        for (const auto& error : outcome.report.errors) std::cerr << error << "\n";
        throw PipelineError(std::to_string(outcome.report.errors.size()) +
                            " pairs failed with endpoint errors");
    }
    return 0;
}

// ----------------------------------------------------------------- score --

struct ScoreOpts {
    CommonOpts common;
    std::string what = "both";  // ppl | judge | both
    std::string scope;
    std::size_t workers = 0;
    bool dry_run = false;
};

int cmd_score(const ScoreOpts& opts) {
    config::RunConfig cfg = resolve_config(opts.common);
    if (!opts.scope.empty()) cfg.ppl_scope = scoring::parse_ppl_scope(opts.scope);
    if (opts.what != "ppl" && opts.what != "judge" && opts.what != "both")
        throw ConfigError("--what must be ppl, judge, or both");
    WorkdirLock lock(cfg.workdir);

    const auto seeds = load_workdir_seeds(cfg);
    std::map<std::string, corpus::SeedRecord> seed_by_id;
    for (const auto& record : seeds) seed_by_id[record.id] = record;
    const auto seed_pairs = corpus::import_dataset(cfg.workdir / "seed" / "seed_pairs.jsonl");
    const auto rule_datasets = load_rule_datasets(cfg);

    // Deterministic scoring order: seed pairs first, then rules in registry
    // order, seed order within each dataset.
    std::vector<const corpus::SftPair*> order;
    for (const auto& pair : seed_pairs) order.push_back(&pair);
    for (const auto& rule : rules::builtin_rules()) {
        auto it = rule_datasets.find(rule.id);
        if (it == rule_datasets.end()) continue;
        for (const auto& pair : it->second) order.push_back(&pair);
    }

    const std::size_t workers = opts.workers > 0 ? opts.workers : cfg.workers;
    std::vector<std::string> errors;
    std::mutex errors_mu;

    if (opts.what == "ppl" || opts.what == "both") {
        ClientBundle bundle = make_client(cfg.ppl, cfg, opts.common);
        if (opts.dry_run) {
            std::size_t pending = 0;
            for (const corpus::SftPair* pair : order) {
                const std::string conditioning = cfg.ppl_scope == scoring::PplScope::FullPair
                                                     ? ""
                                                     : pair->instruction + "\n";
                const std::string span = cfg.ppl_scope == scoring::PplScope::FullPair
                                             ? pair->instruction + "\n" + pair->response
                                             : pair->response;
                if (!bundle.client->logprobs_cached(span, conditioning)) ++pending;
            }
            std::printf("pending ppl requests: %zu\n", pending);
        } else {
            scoring::EndpointLogprobBackend backend(*bundle.client);
            std::vector<std::optional<scoring::PplRow>> rows(order.size());
            llm::parallel_for(order.size(), workers, [&](std::size_t i) {
                try {
                    const auto score = scoring::compute_ppl(backend, *order[i], cfg.ppl_scope);
                    rows[i] = scoring::PplRow{order[i]->id, score.scope, score.value,
                                              score.token_count};
                } catch (const llm::LlmError& e) {
                    if (e.kind() == llm::LlmError::Kind::EmptySpan) return;  // unscorable pair
                    std::lock_guard lock(errors_mu);
                    errors.push_back(order[i]->id + ": " + e.what());
                }
            });
            std::vector<scoring::PplRow> flat;
            for (const auto& row : rows)
                if (row) flat.push_back(*row);
            scoring::write_ppl_rows(flat, cfg.workdir / "scores" / "ppl.jsonl");
            std::printf("ppl rows: %zu  live requests: %zu\n", flat.size(),
                        bundle.client->live_requests());
        }
    }

    if (opts.what == "judge" || opts.what == "both") {
        ClientBundle bundle = make_client(cfg.judge, cfg, opts.common);
        std::vector<const corpus::SftPair*> judged;
        for (const corpus::SftPair* pair : order)
            if (pair->rule_id != corpus::kSeedRuleId) judged.push_back(pair);

        auto judge_inputs = [&](const corpus::SftPair& pair)
            -> std::tuple<const corpus::SeedRecord&, const rules::Rule&, std::string> {
            auto it = seed_by_id.find(pair.source_seed_id);
            if (it == seed_by_id.end())
                throw ConfigError("pair " + pair.id + " references unknown seed " +
                                  pair.source_seed_id);
            const auto& rule = rules::rule_by_id(pair.rule_id);
            auto question = corpus::question_of_pair(pair, it->second);
            return {it->second, rule, question ? *question : pair.instruction};
        };

        if (opts.dry_run) {
            std::size_t pending = 0;
            for (const corpus::SftPair* pair : judged) {
                const auto [record, rule, question] = judge_inputs(*pair);
                if (!bundle.client->completion_cached(
                        scoring::build_judge_prompt(record, rule, question)))
                    ++pending;
            }
            std::printf("pending judge requests: %zu\n", pending);
        } else {
            std::vector<std::optional<scoring::JudgeRow>> rows(judged.size());
            std::size_t unscorable = 0;
            std::mutex unscorable_mu;
            llm::parallel_for(judged.size(), workers, [&](std::size_t i) {
                try {
                    const auto [record, rule, question] = judge_inputs(*judged[i]);
                    const auto scores = scoring::judge_score(*bundle.client, record, rule, question,
                                                             cfg.max_attempts);
                    rows[i] = scoring::JudgeRow{judged[i]->id, scores.consistency,
                                                scores.correctness, scores.alignment};
                } catch (const PipelineError&) {
                    std::lock_guard lock(unscorable_mu);
                    ++unscorable;  // never parseable: excluded from the sidecar
                } catch (const llm::LlmError& e) {
                    std::lock_guard lock(errors_mu);
                    errors.push_back(judged[i]->id + ": " + e.what());
                }
            });
            std::vector<scoring::JudgeRow> flat;
            for (const auto& row : rows)
                if (row) flat.push_back(*row);
            scoring::write_judge_rows(flat, cfg.workdir / "scores" / "judge.jsonl");
            std::printf("judge rows: %zu  unscorable: %zu  live requests: %zu\n", flat.size(),
                        unscorable, bundle.client->live_requests());
        }
    }

    if (!errors.empty()) {
        for (const auto& error : errors) std::cerr << error << "\n";
        throw PipelineError(std::to_string(errors.size()) + " pairs failed with endpoint errors");
    }
    return 0;
}

// ------------------------------------------------------------------- mix --

struct MixOpts {
    CommonOpts common;
    std::string strategy = "all";
    bool include_seed = false;
};

int cmd_mix(const MixOpts& opts) {
    config::RunConfig cfg = resolve_config(opts.common);
    WorkdirLock lock(cfg.workdir);

    std::vector<mixing::MixConfig> configs;
    if (opts.strategy == "all") {
        if (opts.include_seed) throw ConfigError("--include-seed needs a single --strategy");
        configs = mixing::all_mix_configs();
    } else if (opts.strategy == "ppl-max" || opts.strategy == "ppl-min") {
        configs.push_back(
            mixing::mix_config_by_id(opts.strategy + (opts.include_seed ? "-seed" : "")));
    } else {
        if (opts.include_seed)
            throw ConfigError("--include-seed applies only to ppl strategies");
        configs.push_back(mixing::mix_config_by_id(opts.strategy));
    }

    const auto seed_pairs = corpus::import_dataset(cfg.workdir / "seed" / "seed_pairs.jsonl");
    const auto rule_datasets = load_rule_datasets(cfg);
    const fs::path ppl_path = cfg.workdir / "scores" / "ppl.jsonl";
    const fs::path judge_path = cfg.workdir / "scores" / "judge.jsonl";
    const auto ppl_rows = fs::exists(ppl_path) ? scoring::load_ppl_rows(ppl_path)
                                               : std::map<std::string, scoring::PplRow>{};
    const auto judge_rows = fs::exists(judge_path) ? scoring::load_judge_rows(judge_path)
                                                   : std::map<std::string, scoring::JudgeRow>{};
    const auto groups = mixing::assemble_groups(seed_pairs, rule_datasets, ppl_rows, judge_rows);

    for (const auto& config : configs) {
        const auto outcome = mixing::mix_dataset(groups, config);
        corpus::export_dataset(outcome.pairs, cfg.workdir / "mixed" / (config.id + ".jsonl"));
        jsonl::Writer report(cfg.workdir / "reports" / ("selection_" + config.id + ".jsonl"));
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& selection = outcome.report.selections[g];
            ordered_json row;
            row["seed_id"] = groups[g].seed_id;
            row["config"] = config.id;
            row["winner"] = selection.winner_rule_id;
            row["pool_size"] = selection.pool_size;
            row["fallback"] = selection.fallback;
            ordered_json scores;
            for (const auto& [rule_id, values] : selection.scores) scores[rule_id] = values;
            row["scores"] = scores;
            report.write(row);
        }
        std::printf("%s: %zu pairs, %zu fallbacks;", config.id.c_str(), outcome.pairs.size(),
                    outcome.report.fallbacks);
        for (const auto& [rule_id, count] : outcome.report.selected_by_rule)
            std::printf(" %s=%zu", rule_id.c_str(), count);
        std::printf("\n");
    }
    return 0;
}

// --------------------------------------------------------------- analyze --

struct AnalyzeOpts {
    CommonOpts common;
    std::string baseline;
    std::vector<std::string> evals;
    std::string level = "task";
    int digits = -1;
    std::string out_dir;
};

int cmd_analyze(const AnalyzeOpts& opts) {
    config::RunConfig cfg = resolve_config(opts.common);
    if (opts.baseline.empty()) throw ConfigError("--baseline is required");
    if (opts.evals.empty()) throw ConfigError("at least one --eval file is required");
    const int digits = opts.digits >= 0 ? opts.digits : cfg.unchanged_digits;
    const auto level = analysis::parse_agreement_level(opts.level);

    const auto baseline = analysis::load_eval_result(opts.baseline);
    std::vector<analysis::EvalResult> configs;
    for (const auto& path : opts.evals) configs.push_back(analysis::load_eval_result(path));

    const fs::path out_dir = opts.out_dir.empty() ? cfg.workdir / "reports" : fs::path(opts.out_dir);
    fs::create_directories(out_dir);

    const std::string deltas = analysis::delta_table(baseline, configs, level, digits);
    const auto report = analysis::agreement(baseline, configs, level, digits);
    {
        std::ofstream out(out_dir / ("deltas_" + opts.level + ".csv"), std::ios::binary);
        out << deltas;
    }
    {
        std::ofstream out(out_dir / ("agreement_" + opts.level + ".csv"), std::ios::binary);
        out << analysis::agreement_csv(report);
    }
    {
        std::ofstream out(out_dir / ("agreement_" + opts.level + ".json"), std::ios::binary);
        out << analysis::agreement_json(report);
    }
    std::printf("units: %zu  configs: %zu\n", report.units.size(), report.config_ids.size());
    std::printf("agreement >= 50%%: %.2f%% of units\n", 100.0 * report.half_or_more);
    std::printf("agreement == 100%%: %.2f%% of units\n", 100.0 * report.unanimous);
    return 0;
}

// ---------------------------------------------------------------- recipe --

struct RecipeOpts {
    std::vector<std::string> datasets;
    std::string out;
    std::string base_model;
};

int cmd_recipe(const RecipeOpts& opts) {
    recipe::TrainingRecipe manifest;
    manifest.datasets = opts.datasets;
    if (!opts.base_model.empty()) manifest.base_model = opts.base_model;
    const std::string text = recipe::manifest_json(manifest);
    if (opts.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        recipe::write_manifest(manifest, opts.out);
        std::printf("wrote %s\n", opts.out.c_str());
    }
    return 0;
}

// --------------------------------------------------------------- extract --

struct ExtractOpts {
    CommonOpts common;
    std::string base_corpus;
    std::string out;
    std::vector<std::string> perspectives;
};

int cmd_extract(const ExtractOpts& opts) {
    config::RunConfig cfg = resolve_config(opts.common);
    if (opts.base_corpus.empty()) throw ConfigError("--base-corpus is required");
    WorkdirLock lock(cfg.workdir);

    const auto corpus_entries = rules::load_base_corpus(opts.base_corpus);
    ClientBundle bundle = make_client(cfg.rewriter, cfg, opts.common);
    rules::ExtractOptions extract;
    extract.perspectives = opts.perspectives;
    extract.audit_path = opts.out.empty() ? cfg.workdir / "reports" / "rule_candidates.jsonl"
                                          : fs::path(opts.out);
    const auto outcome = rules::extract_rules(*bundle.client, corpus_entries, extract);
    std::printf("chunks: %zu  candidates: %zu\n", outcome.raw_completions.size(),
                outcome.candidates.size());
    for (std::size_t i = 0; i < outcome.candidates.size(); ++i)
        std::printf("%zu. %s\n", i + 1, outcome.candidates[i].c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"silly-question SFT data pipeline"};
    app.require_subcommand(1);

    SampleOpts sample;
    auto* sample_cmd = app.add_subcommand("sample", "stratified-sample a seed pool into the workdir");
    add_common(sample_cmd, sample.common, false);
    sample_cmd->add_option("--pool", sample.pool, "seed pool file or directory");
    sample_cmd->add_option("--format", sample.format, "pool format: jsonl or mmlu-csv");
    sample_cmd->add_option("--n", sample.n, "sample size");
    sample_cmd->add_option("--seed", sample.seed, "RNG seed");

    AugmentOpts augment;
    auto* augment_cmd = app.add_subcommand("augment", "rewrite every seed under all eight rules");
    add_common(augment_cmd, augment.common);
    augment_cmd->add_option("--seeds", augment.seeds, "seed records file (default: workdir)");
    augment_cmd->add_option("--max-attempts", augment.max_attempts, "validation retries per pair");
    augment_cmd->add_option("--workers", augment.workers, "parallel request workers");
    augment_cmd->add_flag("--dry-run", augment.dry_run, "count pending requests; no network");

    ScoreOpts score;
    auto* score_cmd = app.add_subcommand("score", "compute ppl and judge sidecar scores");
    add_common(score_cmd, score.common);
    score_cmd->add_option("--what", score.what, "ppl, judge, or both");
    score_cmd->add_option("--scope", score.scope, "ppl scope: response-given-instruction or full-pair");
    score_cmd->add_option("--workers", score.workers, "parallel request workers");
    score_cmd->add_flag("--dry-run", score.dry_run, "count pending requests; no network");

    MixOpts mix;
    auto* mix_cmd = app.add_subcommand("mix", "select one candidate per seed");
    add_common(mix_cmd, mix.common, false);
    mix_cmd->add_option("--strategy", mix.strategy,
                        "all, ppl-max, ppl-min, judge-consistency, judge-correctness, judge-alignment");
    mix_cmd->add_flag("--include-seed", mix.include_seed, "add the seed pair to the ppl pool");

    AnalyzeOpts analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "deltas and agreement from eval results");
    add_common(analyze_cmd, analyze.common, false);
    analyze_cmd->add_option("--baseline", analyze.baseline, "baseline eval result JSON");
    analyze_cmd->add_option("--eval", analyze.evals, "eval result JSON (repeatable)");
    analyze_cmd->add_option("--level", analyze.level, "task or subject");
    analyze_cmd->add_option("--digits", analyze.digits, "rounding digits for Unchanged");
    analyze_cmd->add_option("--out-dir", analyze.out_dir, "report directory (default: workdir/reports)");

    RecipeOpts recipe_opts;
    auto* recipe_cmd = app.add_subcommand("recipe", "emit the fine-tuning recipe manifest");
    recipe_cmd->add_option("--dataset", recipe_opts.datasets, "dataset path (repeatable)");
    recipe_cmd->add_option("--out", recipe_opts.out, "manifest file (default: stdout)");
    recipe_cmd->add_option("--base-model", recipe_opts.base_model, "base model name");

    auto* rules_cmd = app.add_subcommand("rules", "print the rule catalog");

    ExtractOpts extract;
    auto* extract_cmd = app.add_subcommand("extract", "propose rule candidates from a base corpus");
    add_common(extract_cmd, extract.common);
    extract_cmd->add_option("--base-corpus", extract.base_corpus, "instruction/response JSONL");
    extract_cmd->add_option("--out", extract.out, "audit JSONL path");
    extract_cmd->add_option("--perspective", extract.perspectives, "analysis perspective (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(sample_cmd)) return cmd_sample(sample);
        if (app.got_subcommand(augment_cmd)) return cmd_augment(augment);
        if (app.got_subcommand(score_cmd)) return cmd_score(score);
        if (app.got_subcommand(mix_cmd)) return cmd_mix(mix);
        if (app.got_subcommand(analyze_cmd)) return cmd_analyze(analyze);
        if (app.got_subcommand(recipe_cmd)) return cmd_recipe(recipe_opts);
        if (app.got_subcommand(rules_cmd)) {
            std::fputs(rules::catalog().c_str(), stdout);
            return 0;
        }
        if (app.got_subcommand(extract_cmd)) return cmd_extract(extract);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const PipelineError& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 3;
    } catch (const llm::LlmError& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
