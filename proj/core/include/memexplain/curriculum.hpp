#pragma once

#include "memexplain/evaluate.hpp"
#include "memexplain/stage.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace memexplain {

struct CheckpointRecord {
    StageId stage_id = StageId::stage1;
    std::size_t index = 0;
    std::size_t epoch = 0;  ///< 1-based
    std::size_t step = 0;   ///< optimizer steps taken so far in the stage
    double train_loss = 0.0;  ///< mean total loss over the epoch's micro-batches
    MetricReport dev_metrics;
    std::string storage_ref;  ///< relative to the run directory
};

json to_json(const CheckpointRecord& checkpoint);

using EvalFn = std::function<MetricReport(ModelAdapter& model, std::span<const InstructionSample> dev)>;

/// Dev evaluation through evaluate_model with default options.
EvalFn default_eval_fn(const LabelSet& labels, EvaluateOptions options = {});

struct StageRun {
    StageConfig config;
    std::optional<std::string> init_from;
    std::vector<CheckpointRecord> checkpoints;
    std::vector<double> loss_trace;  ///< total_loss per micro-batch, in order
    std::size_t micro_batches = 0;
    std::size_t optimizer_steps = 0;
    std::optional<std::size_t> selected;
};

json to_json(const StageRun& run);

struct RunOptions {
    std::filesystem::path run_dir;
    std::string criterion = "weighted_f1";
};

/// Trains the already prepared model for config.epochs passes. Each epoch
/// visits the train set in a seed-derived order in micro-batches of
/// batch_size; every grad_accum_steps micro-batches (and at epoch end) one
/// optimizer step runs. Checkpoints are evaluated on dev and saved under
/// run_dir/checkpoints/<stage>/epoch-<n>.json.
StageRun run_stage(const StageConfig& config, std::span<const InstructionSample> train,
                   std::span<const InstructionSample> dev, ModelAdapter& model, const EvalFn& eval,
                   const RunOptions& options);

/// Index of the checkpoint maximizing `criterion` on dev; the earliest wins ties.
std::size_t select_checkpoint(std::span<const CheckpointRecord> checkpoints, std::string_view criterion);

/// Optimizer steps a stage takes over `train_size` samples.
std::size_t planned_optimizer_steps(const StageConfig& config, std::size_t train_size);

struct CurriculumData {
    std::vector<InstructionSample> classify_train;
    std::vector<InstructionSample> classify_dev;
    std::vector<InstructionSample> joint_train;
    std::vector<InstructionSample> joint_dev;
};

struct TrainingResult {
    std::vector<StageRun> stages;
    std::string final_model_ref;  ///< relative to the run directory
    json manifest;
};

/// Stage 1 on classification samples, then stage 2 on joint samples starting
/// from the stage-1 dev-best checkpoint.
TrainingResult run_curriculum(const StageConfig& stage1, const StageConfig& stage2, const CurriculumData& data,
                              ModelAdapter& model, const EvalFn& eval, const RunOptions& options);

/// Joint classification-with-explanation training from the base model.
TrainingResult run_single_stage(const StageConfig& config, const CurriculumData& data, ModelAdapter& model,
                                const EvalFn& eval, const RunOptions& options);

}  // namespace memexplain
