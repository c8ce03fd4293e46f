#include "memexplain/curriculum.hpp"

#include "memexplain/error.hpp"

#include <spdlog/spdlog.h>

#include <numeric>
#include <random>

namespace memexplain {
namespace {

TaskMode required_mode(StageId id) {
    return id == StageId::stage1 ? TaskMode::classify : TaskMode::classify_explain;
}

void check_modes(const StageConfig& config, std::span<const InstructionSample> samples, std::string_view which) {
    const TaskMode want = required_mode(config.stage_id);
    std::vector<std::string> wrong;
    for (const auto& s : samples) {
        if (s.task_mode != want) wrong.push_back(s.id);
    }
    if (!wrong.empty()) {
        throw RecordError(std::string(to_string(config.stage_id)) + " expects " + std::string(to_string(want)) +
                              " samples in its " + std::string(which) + " set",
                          std::move(wrong));
    }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (epoch + 1)));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

json base_manifest(std::string_view mode, const ModelAdapter& model, const RunOptions& options) {
    return {{"mode", mode}, {"backend", model.name()}, {"selection_criterion", options.criterion}};
}

}  // namespace

json to_json(const CheckpointRecord& c) {
    return {{"stage_id", std::string(to_string(c.stage_id))},
            {"index", c.index},
            {"epoch", c.epoch},
            {"step", c.step},
            {"train_loss", c.train_loss},
            {"dev_metrics", to_json(c.dev_metrics)},
            {"storage_ref", c.storage_ref}};
}

json to_json(const StageRun& run) {
    json checkpoints = json::array();
    for (const auto& c : run.checkpoints) checkpoints.push_back(to_json(c));
    json j = {{"config", to_json(run.config)},
              {"seed", run.config.seed},
              {"init_from", run.init_from ? json(*run.init_from) : json(nullptr)},
              {"checkpoints", std::move(checkpoints)},
              {"loss_trace", run.loss_trace},
              {"micro_batches", run.micro_batches},
              {"optimizer_steps", run.optimizer_steps}};
    if (run.selected) {
        j["selected_index"] = *run.selected;
        j["selected_ref"] = run.checkpoints[*run.selected].storage_ref;
    } else {
        j["selected_index"] = nullptr;
        j["selected_ref"] = nullptr;
    }
    return j;
}

EvalFn default_eval_fn(const LabelSet& labels, EvaluateOptions options) {
    return [labels, options](ModelAdapter& model, std::span<const InstructionSample> dev) {
        return evaluate_model(model, dev, labels, options).report;
    };
}

std::size_t planned_optimizer_steps(const StageConfig& config, std::size_t train_size) {
    const std::size_t micro = ceil_div(train_size, config.batch_size);
    return config.epochs * ceil_div(micro, config.grad_accum_steps);
}

StageRun run_stage(const StageConfig& config, std::span<const InstructionSample> train,
                   std::span<const InstructionSample> dev, ModelAdapter& model, const EvalFn& eval,
                   const RunOptions& options) {
    config.validate();
    if (train.empty()) throw ValidationError("training set is empty", std::string(to_string(config.stage_id)));
    if (dev.empty()) throw ValidationError("dev set is empty", std::string(to_string(config.stage_id)));
    check_modes(config, train, "train");
    check_modes(config, dev, "dev");

    StageRun run;
    run.config = config;
    const std::string stage_name(to_string(config.stage_id));
    const std::size_t total_steps = planned_optimizer_steps(config, train.size());

    auto step_now = [&] {
        model.optimizer_step({scheduled_learning_rate(config, run.optimizer_steps, total_steps),
                              config.optimizer.weight_decay});
        ++run.optimizer_steps;
    };

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto order = epoch_order(train.size(), config.seed, epoch);
        double epoch_loss = 0.0;
        std::size_t epoch_batches = 0;
        std::size_t accumulated = 0;
        std::vector<InstructionSample> batch;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            batch.clear();
            for (std::size_t k = start; k < std::min(order.size(), start + config.batch_size); ++k) {
                batch.push_back(train[order[k]]);
            }
            const BatchLosses losses = model.train_batch(batch, config.expl_weight);
            const double loss = total_loss(losses.l_classif, losses.l_expl, config);
            run.loss_trace.push_back(loss);
            epoch_loss += loss;
            ++epoch_batches;
            ++run.micro_batches;
            if (++accumulated == config.grad_accum_steps) {
                step_now();
                accumulated = 0;
            }
        }
        if (accumulated > 0) step_now();

        if (epoch % config.eval_every_epochs != 0 && epoch != config.epochs) continue;
        CheckpointRecord checkpoint;
        checkpoint.stage_id = config.stage_id;
        checkpoint.index = run.checkpoints.size();
        checkpoint.epoch = epoch;
        checkpoint.step = run.optimizer_steps;
        checkpoint.train_loss = epoch_loss / static_cast<double>(epoch_batches);
        checkpoint.storage_ref = "checkpoints/" + stage_name + "/epoch-" + std::to_string(epoch) + ".json";
        model.save(options.run_dir / checkpoint.storage_ref);
        checkpoint.dev_metrics = eval(model, dev);
        spdlog::info("{} epoch {}: train loss {:.4f}, dev {} {:.4f}", stage_name, epoch, checkpoint.train_loss,
                     options.criterion, checkpoint.dev_metrics.get(options.criterion).value_or(0.0));
        run.checkpoints.push_back(std::move(checkpoint));
    }
    run.selected = select_checkpoint(run.checkpoints, options.criterion);
    return run;
}

std::size_t select_checkpoint(std::span<const CheckpointRecord> checkpoints, std::string_view criterion) {
    if (checkpoints.empty()) throw ValidationError("no checkpoints to select from");
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const auto value = checkpoints[i].dev_metrics.get(criterion);
        if (!value) {
            throw ValidationError("metric '" + std::string(criterion) + "' missing from checkpoint " +
                                      std::to_string(i),
                                  "train.selection_criterion");
        }
        if (i == 0 || *value > best_value) {
            best = i;
            best_value = *value;
        }
    }
    return best;
}

TrainingResult run_curriculum(const StageConfig& stage1, const StageConfig& stage2, const CurriculumData& data,
                              ModelAdapter& model, const EvalFn& eval, const RunOptions& options) {
    if (stage1.stage_id != StageId::stage1) throw ValidationError("first stage must be stage1", "stage1.stage_id");
    if (stage2.stage_id != StageId::stage2) throw ValidationError("second stage must be stage2", "stage2.stage_id");
    if (!(stage1.adapter == stage2.adapter)) {
        throw ValidationError("stage2 continues the stage1 adapter and must use the same adapter config",
                              "stage2.adapter");
    }
    json warnings = json::array();
    if (stage2.learning_rate > stage1.learning_rate) {
        const std::string message = "stage2 learning rate " + std::to_string(stage2.learning_rate) +
                                    " exceeds stage1 learning rate " + std::to_string(stage1.learning_rate);
        spdlog::warn("{}", message);
        warnings.push_back(message);
    }

    model.reset(stage1.seed);
    model.apply_adapter(stage1.adapter);
    StageRun first = run_stage(stage1, data.classify_train, data.classify_dev, model, eval, options);
    if (first.checkpoints.empty()) throw RuntimeFailure("stage1 produced no checkpoint");
    const std::string winner = first.checkpoints[*first.selected].storage_ref;

    model.load(options.run_dir / winner);
    StageRun second = run_stage(stage2, data.joint_train, data.joint_dev, model, eval, options);
    second.init_from = winner;

    TrainingResult result;
    result.final_model_ref = second.checkpoints[*second.selected].storage_ref;
    result.manifest = base_manifest("ms", model, options);
    result.manifest["warnings"] = std::move(warnings);
    result.manifest["stages"] = json::array({to_json(first), to_json(second)});
    result.manifest["final_model"] = result.final_model_ref;
    result.stages = {std::move(first), std::move(second)};
    return result;
}

TrainingResult run_single_stage(const StageConfig& config, const CurriculumData& data, ModelAdapter& model,
                                const EvalFn& eval, const RunOptions& options) {
    if (config.stage_id != StageId::single_stage) {
        throw ValidationError("single-stage training needs a single_stage config", "single_stage.stage_id");
    }
    model.reset(config.seed);
    model.apply_adapter(config.adapter);
    StageRun run = run_stage(config, data.joint_train, data.joint_dev, model, eval, options);

    TrainingResult result;
    result.final_model_ref = run.checkpoints[*run.selected].storage_ref;
    result.manifest = base_manifest("ss", model, options);
    result.manifest["warnings"] = json::array();
    result.manifest["stages"] = json::array({to_json(run)});
    result.manifest["final_model"] = result.final_model_ref;
    result.stages = {std::move(run)};
    return result;
}

}  // namespace memexplain
