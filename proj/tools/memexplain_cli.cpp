// memexplain: enhance -> build-instructions -> train -> evaluate -> agreement -> stats -> serve-annotation

#include "memexplain/error.hpp"
#include "memexplain/pipeline.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace fs = std::filesystem;
using namespace memexplain;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string run_dir;
    std::string log_level = "info";
};

RunConfig load_config(const Common& common) {
    if (common.config_path.empty()) {
        json doc = json::object();
        for (const auto& o : common.overrides) apply_override(doc, o);
        return run_config_from_json(doc, fs::current_path());
    }
    return load_run_config(common.config_path, common.overrides);
}

fs::path run_dir_for(const Common& common, const RunConfig& config) {
    if (!common.run_dir.empty()) {
        fs::create_directories(common.run_dir);
        return common.run_dir;
    }
    return make_run_dir(config);
}

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("-c,--config", common.config_path, "Run config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--set", common.overrides, "Override a config field: key.path=value (repeatable)");
    cmd->add_option("--run-dir", common.run_dir, "Artifact directory (default: <output_root>/<timestamp>-seed<n>)");
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("memexplain");
    spdlog::set_default_logger(logger);

    CLI::App app{"Meme explanation toolkit: dataset enhancement, curriculum training and evaluation"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--log-level", common.log_level, "trace|debug|info|warn|error")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error"}));

    auto* enhance_cmd = app.add_subcommand("enhance", "Generate gold explanations with the expert model");
    add_common(enhance_cmd, common);

    std::string enhanced_manifest;
    auto* build_cmd = app.add_subcommand("build-instructions", "Build classify / classify_explain instruction sets");
    add_common(build_cmd, common);
    build_cmd->add_option("--input", enhanced_manifest, "Enhanced manifest (default: <run-dir>/enhanced.jsonl)");

    std::string mode = "ms";
    std::string instructions_dir;
    auto* train_cmd = app.add_subcommand("train", "Fine-tune: single-stage (ss) or multi-stage curriculum (ms)");
    add_common(train_cmd, common);
    train_cmd->add_option("--mode", mode, "ss | ms")->check(CLI::IsMember({"ss", "ms"}));
    train_cmd->add_option("--instructions", instructions_dir, "Instruction directory (default: <run-dir>/instructions)");

    EvaluateRequest eval_request;
    std::string split = "test";
    std::string task = "classify_explain";
    std::string language;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on an instruction split");
    add_common(eval_cmd, common);
    eval_cmd->add_option("--model", eval_request.model_ref, "Checkpoint file, or 'echo'")->required();
    eval_cmd->add_option("--instructions", instructions_dir, "Instruction directory (default: <run-dir>/instructions)");
    eval_cmd->add_option("--split", split, "train | dev | test")->check(CLI::IsMember({"train", "dev", "test"}));
    eval_cmd->add_option("--task", task, "classify | classify_explain")
        ->check(CLI::IsMember({"classify", "classify_explain"}));
    eval_cmd->add_option("--language", language, "Explanation language (default: train.language)");
    eval_cmd->add_option("--name", eval_request.name, "Output subdirectory name");

    std::string ratings;
    AgreementOptions agreement_options;
    bool population_variance = false;
    auto* agreement_cmd = app.add_subcommand("agreement", "Likert means and r*_wg over exported ratings");
    add_common(agreement_cmd, common);
    agreement_cmd->add_option("--ratings", ratings, "Ratings JSON-lines")->required()->check(CLI::ExistingFile);
    agreement_cmd->add_option("--annotators", agreement_options.annotators_per_item, "Ratings per complete item");
    agreement_cmd->add_option("--lower", agreement_options.bounds.lower, "Scale lower bound");
    agreement_cmd->add_option("--upper", agreement_options.bounds.upper, "Scale upper bound");
    agreement_cmd->add_flag("--population-variance", population_variance, "Use n instead of n-1 for S^2");

    std::string stats_manifest;
    auto* stats_cmd = app.add_subcommand("stats", "Split counts and word statistics of a manifest");
    add_common(stats_cmd, common);
    stats_cmd->add_option("--input", stats_manifest, "Manifest (default: dataset.manifest)");

    std::string items_manifest;
    std::string ratings_store;
    int port = -1;
    auto* serve_cmd = app.add_subcommand("serve-annotation", "Run the annotation HTTP service");
    add_common(serve_cmd, common);
    serve_cmd->add_option("--items", items_manifest, "Enhanced manifest holding the items")->required();
    serve_cmd->add_option("--ratings", ratings_store, "Append-only ratings store")->required();
    serve_cmd->add_option("--port", port, "TCP port (default: annotation.port)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    spdlog::set_level(spdlog::level::from_str(common.log_level));

    try {
        RunConfig config = load_config(common);

        if (enhance_cmd->parsed()) {
            const fs::path dir = run_dir_for(common, config);
            const auto summary = enhance(config, dir);
            std::cout << summary.output.string() << '\n';
            if (summary.exceeds_threshold) {
                spdlog::error("{} of {} generations failed, above the configured threshold", summary.failures,
                              summary.records);
                return 2;
            }
        } else if (build_cmd->parsed()) {
            const fs::path dir = run_dir_for(common, config);
            const fs::path input = enhanced_manifest.empty() ? dir / "enhanced.jsonl" : fs::path(enhanced_manifest);
            const auto summary = build_instructions(config, input, dir);
            std::cout << summary.directory.string() << '\n';
        } else if (train_cmd->parsed()) {
            const fs::path dir = run_dir_for(common, config);
            const fs::path instr = instructions_dir.empty() ? dir / "instructions" : fs::path(instructions_dir);
            const auto summary = train(config, parse_train_mode(mode), instr, dir);
            std::cout << summary.manifest.string() << '\n' << summary.final_model.string() << '\n';
        } else if (eval_cmd->parsed()) {
            const fs::path dir = run_dir_for(common, config);
            eval_request.instructions_dir = instructions_dir.empty() ? dir / "instructions" : fs::path(instructions_dir);
            eval_request.split = parse_split(split);
            eval_request.task = parse_task_mode(task);
            eval_request.language = language.empty() ? config.train.language : parse_language(language);
            const auto summary = evaluate(config, eval_request, dir);
            spdlog::info("accuracy {:.4f}, weighted-F1 {:.4f}, macro-F1 {:.4f}", summary.metrics.accuracy,
                         summary.metrics.weighted_f1, summary.metrics.macro_f1);
            std::cout << summary.report.string() << '\n';
        } else if (agreement_cmd->parsed()) {
            const fs::path dir = run_dir_for(common, config);
            if (population_variance) agreement_options.denominator = VarianceDenominator::population;
            std::cout << agreement(config, ratings, dir, agreement_options).string() << '\n';
        } else if (stats_cmd->parsed()) {
            const fs::path dir = run_dir_for(common, config);
            std::cout << stats(config, stats_manifest, dir).string() << '\n';
        } else if (serve_cmd->parsed()) {
            if (port >= 0) config.annotation.port = port;
            serve_annotation(config, items_manifest, ratings_store);
        }
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
