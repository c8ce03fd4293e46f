#pragma once

#include "memexplain/agreement.hpp"
#include "memexplain/curriculum.hpp"
#include "memexplain/run_config.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace memexplain {

/// <output_root>/<UTC timestamp>-seed<seed>, created if needed.
std::filesystem::path make_run_dir(const RunConfig& config);

std::unique_ptr<ExpertProvider> make_provider(const RunConfig& config);
std::unique_ptr<ModelAdapter> make_model(const RunConfig& config);

/// Train-split majority class (label-set order breaks ties).
std::string majority_label(std::span<const InstructionSample> samples, const LabelSet& labels);

struct EnhanceSummary {
    std::filesystem::path output;  ///< enhanced manifest
    std::size_t records = 0;
    std::size_t failures = 0;
    std::size_t provider_calls = 0;
    bool exceeds_threshold = false;
};

/// Explains every record of the configured dataset with each template.
/// Progress checkpoints live under run_dir/enhance/, so rerunning into the
/// same run directory resumes. `provider` overrides the configured one.
EnhanceSummary enhance(const RunConfig& config, const std::filesystem::path& run_dir,
                       ExpertProvider* provider = nullptr);

struct InstructionSummary {
    std::filesystem::path directory;
    std::map<std::string, std::size_t> files;  ///< file name -> sample count
};

/// Writes classify_<split>.jsonl and classify_explain_<lang>_<split>.jsonl
/// under run_dir/instructions/.
InstructionSummary build_instructions(const RunConfig& config, const std::filesystem::path& enhanced_manifest,
                                      const std::filesystem::path& run_dir);

std::vector<InstructionSample> read_samples(const std::filesystem::path& path);
void write_samples(const std::filesystem::path& path, std::span<const InstructionSample> samples);

enum class TrainMode { single_stage, multi_stage };
TrainMode parse_train_mode(std::string_view name);  ///< "ss" | "ms"

struct TrainSummary {
    std::filesystem::path manifest;
    std::filesystem::path final_model;
};

/// Trains from run_dir/instructions (or `instructions_dir`) and writes
/// run_dir/train-<mode>/manifest.json with the resolved config embedded.
TrainSummary train(const RunConfig& config, TrainMode mode, const std::filesystem::path& instructions_dir,
                   const std::filesystem::path& run_dir, ModelAdapter* model = nullptr);

struct EvaluateRequest {
    std::filesystem::path instructions_dir;
    /// Checkpoint file, or "echo" for the gold-echoing reference model.
    std::string model_ref;
    Split split = Split::test;
    TaskMode task = TaskMode::classify_explain;
    Language language = Language::en;
    std::string name = "eval";
};

struct EvaluateSummary {
    std::filesystem::path report;
    std::filesystem::path predictions;
    MetricReport metrics;
};

EvaluateSummary evaluate(const RunConfig& config, const EvaluateRequest& request, const std::filesystem::path& run_dir);

std::filesystem::path agreement(const RunConfig& config, const std::filesystem::path& ratings,
                                const std::filesystem::path& run_dir, const AgreementOptions& options);

/// Dataset statistics of `manifest` (default: the configured one).
std::filesystem::path stats(const RunConfig& config, const std::filesystem::path& manifest,
                            const std::filesystem::path& run_dir);

/// Blocks serving the annotation API until the process is stopped.
void serve_annotation(const RunConfig& config, const std::filesystem::path& items_manifest,
                      const std::filesystem::path& ratings_path);

}  // namespace memexplain
