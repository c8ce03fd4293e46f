#pragma once

#include "memexplain/model_adapter.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace memexplain {

enum class StageId { stage1, stage2, single_stage };

std::string_view to_string(StageId id) noexcept;
StageId parse_stage_id(std::string_view name);

struct OptimizerConfig {
    std::string name = "adamw";
    double weight_decay = 0.01;
    bool operator==(const OptimizerConfig&) const = default;
};

struct SchedulerConfig {
    std::string name = "linear";
    std::size_t warmup_steps = 5;
    bool operator==(const SchedulerConfig&) const = default;
};

/// One curriculum stage. expl_weight is the step-function weight on the
/// explanation loss: 0 for stage 1, 1 for stage 2 and the single-stage run.
struct StageConfig {
    StageId stage_id = StageId::stage1;
    double expl_weight = 0.0;
    double learning_rate = 2e-4;
    std::size_t epochs = 2;
    AdapterConfig adapter;
    std::size_t batch_size = 2;
    std::size_t grad_accum_steps = 4;
    OptimizerConfig optimizer;
    SchedulerConfig scheduler;
    std::uint64_t seed = 42;
    /// Dev evaluation (and a checkpoint) every this many epochs; the last
    /// epoch is always evaluated.
    std::size_t eval_every_epochs = 1;

    static StageConfig defaults(StageId id);
    void validate() const;

    bool operator==(const StageConfig&) const = default;
};

json to_json(const StageConfig& config);
/// Missing fields fall back to StageConfig::defaults(id).
StageConfig stage_config_from_json(const json& j, StageId id);
/// Missing fields fall back to `base`.
StageConfig stage_config_from_json(const json& j, const StageConfig& base);

/// Stage-2 default profile: learning rate scaled by lr_multiplier, epochs by
/// epoch_multiplier, relative to stage 1.
StageConfig derive_stage2(const StageConfig& stage1, double lr_multiplier = 0.5, double epoch_multiplier = 2.0);

/// L_total = L_classif + W_expl * L_expl. Throws ValidationError when the
/// stage weights the explanation term but no explanation loss was given.
double total_loss(double l_classif, std::optional<double> l_expl, const StageConfig& stage);

/// Linear schedule with warmup: ramps from 0 over warmup_steps, then decays
/// linearly to 0 at total_steps. `step` counts optimizer steps from 0.
double scheduled_learning_rate(const StageConfig& stage, std::size_t step, std::size_t total_steps);

}  // namespace memexplain
