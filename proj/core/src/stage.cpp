#include "memexplain/stage.hpp"

#include "memexplain/error.hpp"

#include <algorithm>
#include <cmath>

namespace memexplain {

std::string_view to_string(Submodule s) noexcept {
    switch (s) {
        case Submodule::vision: return "vision";
        case Submodule::language: return "language";
        case Submodule::attention: return "attention";
        case Submodule::mlp: return "mlp";
    }
    return "vision";
}

Submodule parse_submodule(std::string_view name) {
    if (name == "vision") return Submodule::vision;
    if (name == "language") return Submodule::language;
    if (name == "attention") return Submodule::attention;
    if (name == "mlp") return Submodule::mlp;
    throw ValidationError("unknown submodule '" + std::string(name) + "'", "adapter.target_submodules");
}

void AdapterConfig::validate() const {
    if (rank == 0) throw ValidationError("must be positive", "adapter.rank");
    if (alpha == 0) throw ValidationError("must be positive", "adapter.alpha");
    if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("must be in [0, 1)", "adapter.dropout");
    if (quantization_bits != 4 && quantization_bits != 8 && quantization_bits != 16) {
        throw ValidationError("must be 4, 8 or 16", "adapter.quantization_bits");
    }
    if (target_submodules.empty()) throw ValidationError("must not be empty", "adapter.target_submodules");
}

json to_json(const AdapterConfig& config) {
    json targets = json::array();
    for (Submodule s : config.target_submodules) targets.push_back(std::string(to_string(s)));
    return {{"rank", config.rank},
            {"alpha", config.alpha},
            {"dropout", config.dropout},
            {"quantization_bits", config.quantization_bits},
            {"target_submodules", std::move(targets)}};
}

AdapterConfig adapter_config_from_json(const json& j) {
    AdapterConfig c;
    if (!j.is_object()) throw ValidationError("must be an object", "adapter");
    c.rank = j.value("rank", c.rank);
    c.alpha = j.value("alpha", c.alpha);
    c.dropout = j.value("dropout", c.dropout);
    c.quantization_bits = j.value("quantization_bits", c.quantization_bits);
    if (j.contains("target_submodules")) {
        c.target_submodules.clear();
        for (const auto& s : j["target_submodules"]) c.target_submodules.insert(parse_submodule(s.get<std::string>()));
    }
    c.validate();
    return c;
}

std::string_view to_string(StageId id) noexcept {
    switch (id) {
        case StageId::stage1: return "stage1";
        case StageId::stage2: return "stage2";
        case StageId::single_stage: return "single_stage";
    }
    return "stage1";
}

StageId parse_stage_id(std::string_view name) {
    if (name == "stage1") return StageId::stage1;
    if (name == "stage2") return StageId::stage2;
    if (name == "single_stage") return StageId::single_stage;
    throw ValidationError("unknown stage id '" + std::string(name) + "'", "stage_id");
}

StageConfig StageConfig::defaults(StageId id) {
    StageConfig c;
    c.stage_id = id;
    c.expl_weight = id == StageId::stage1 ? 0.0 : 1.0;
    if (id == StageId::stage2) {
        c = derive_stage2(c);
    }
    return c;
}

void StageConfig::validate() const {
    const std::string prefix(to_string(stage_id));
    if (stage_id == StageId::stage1 && expl_weight != 0.0) {
        throw ValidationError("stage1 requires expl_weight 0", prefix + ".expl_weight");
    }
    if (stage_id != StageId::stage1 && expl_weight != 1.0) {
        throw ValidationError("stage2 and single_stage require expl_weight 1", prefix + ".expl_weight");
    }
    if (!(learning_rate > 0.0)) throw ValidationError("must be positive", prefix + ".learning_rate");
    if (epochs == 0) throw ValidationError("must be positive", prefix + ".epochs");
    if (batch_size == 0) throw ValidationError("must be positive", prefix + ".batch_size");
    if (grad_accum_steps == 0) throw ValidationError("must be positive", prefix + ".grad_accum_steps");
    if (eval_every_epochs == 0) throw ValidationError("must be positive", prefix + ".eval_every_epochs");
    if (optimizer.weight_decay < 0.0) throw ValidationError("must be non-negative", prefix + ".optimizer.weight_decay");
    if (scheduler.name != "linear" && scheduler.name != "constant") {
        throw ValidationError("unknown scheduler '" + scheduler.name + "'", prefix + ".scheduler.name");
    }
    try {
        adapter.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), prefix);
    }
}

json to_json(const StageConfig& c) {
    return {{"stage_id", std::string(to_string(c.stage_id))},
            {"expl_weight", c.expl_weight},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"adapter", to_json(c.adapter)},
            {"batch_size", c.batch_size},
            {"grad_accum_steps", c.grad_accum_steps},
            {"optimizer", {{"name", c.optimizer.name}, {"weight_decay", c.optimizer.weight_decay}}},
            {"scheduler", {{"name", c.scheduler.name}, {"warmup_steps", c.scheduler.warmup_steps}}},
            {"seed", c.seed},
            {"eval_every_epochs", c.eval_every_epochs}};
}

StageConfig stage_config_from_json(const json& j, StageId id) {
    return stage_config_from_json(j, StageConfig::defaults(id));
}

StageConfig stage_config_from_json(const json& j, const StageConfig& base) {
    StageConfig c = base;
    const StageId id = base.stage_id;
    if (j.is_null()) return c;
    const std::string prefix(to_string(id));
    if (!j.is_object()) throw ValidationError("must be an object", prefix);
    try {
        if (j.contains("stage_id") && parse_stage_id(j["stage_id"].get<std::string>()) != id) {
            throw ValidationError("does not match its position", prefix + ".stage_id");
        }
        c.expl_weight = j.value("expl_weight", c.expl_weight);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.epochs = j.value("epochs", c.epochs);
        if (j.contains("adapter")) c.adapter = adapter_config_from_json(j["adapter"]);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.grad_accum_steps = j.value("grad_accum_steps", c.grad_accum_steps);
        if (j.contains("optimizer")) {
            c.optimizer.name = j["optimizer"].value("name", c.optimizer.name);
            c.optimizer.weight_decay = j["optimizer"].value("weight_decay", c.optimizer.weight_decay);
        }
        if (j.contains("scheduler")) {
            c.scheduler.name = j["scheduler"].value("name", c.scheduler.name);
            c.scheduler.warmup_steps = j["scheduler"].value("warmup_steps", c.scheduler.warmup_steps);
        }
        c.seed = j.value("seed", c.seed);
        c.eval_every_epochs = j.value("eval_every_epochs", c.eval_every_epochs);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("wrong type: ") + e.what(), prefix);
    }
    c.validate();
    return c;
}

StageConfig derive_stage2(const StageConfig& stage1, double lr_multiplier, double epoch_multiplier) {
    StageConfig c = stage1;
    c.stage_id = StageId::stage2;
    c.expl_weight = 1.0;
    c.learning_rate = stage1.learning_rate * lr_multiplier;
    c.epochs = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(stage1.epochs) * epoch_multiplier)));
    return c;
}

double total_loss(double l_classif, std::optional<double> l_expl, const StageConfig& stage) {
    if (stage.expl_weight == 0.0) return l_classif;
    if (!l_expl) {
        throw ValidationError("explanation loss missing while expl_weight is " + std::to_string(stage.expl_weight),
                              std::string(to_string(stage.stage_id)) + ".expl_weight");
    }
    return l_classif + stage.expl_weight * *l_expl;
}

double scheduled_learning_rate(const StageConfig& stage, std::size_t step, std::size_t total_steps) {
    if (stage.scheduler.name == "constant") return stage.learning_rate;
    const std::size_t warmup = stage.scheduler.warmup_steps;
    if (step < warmup) {
        return stage.learning_rate * static_cast<double>(step) / static_cast<double>(warmup);
    }
    if (total_steps <= warmup) return stage.learning_rate;
    const double remaining = static_cast<double>(total_steps > step ? total_steps - step : 0);
    return stage.learning_rate * std::max(0.0, remaining / static_cast<double>(total_steps - warmup));
}

}  // namespace memexplain
