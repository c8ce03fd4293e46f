#pragma once

#include "memexplain/instruct_builder.hpp"
#include "memexplain/jsonl.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>

namespace memexplain {

enum class Submodule { vision, language, attention, mlp };

std::string_view to_string(Submodule s) noexcept;
Submodule parse_submodule(std::string_view name);

/// Low-rank adapter recipe applied to the base model.
struct AdapterConfig {
    std::size_t rank = 16;
    std::size_t alpha = 16;
    double dropout = 0.0;
    std::size_t quantization_bits = 4;
    std::set<Submodule> target_submodules{Submodule::vision, Submodule::language, Submodule::attention,
                                          Submodule::mlp};

    void validate() const;
    bool operator==(const AdapterConfig&) const = default;
};

json to_json(const AdapterConfig& config);
AdapterConfig adapter_config_from_json(const json& j);

/// Per-batch losses reported by a backend: the label segment of the target
/// and, when the targets carry one, the explanation segment.
struct BatchLosses {
    double l_classif = 0.0;
    std::optional<double> l_expl;
};

struct OptimizerStep {
    double learning_rate = 0.0;
    double weight_decay = 0.0;
};

/// Training/generation backend seen by the trainer and the evaluator.
///
/// train_batch accumulates gradients of l_classif + expl_weight * l_expl;
/// optimizer_step applies and clears them. A backend must leave its
/// parameters untouched by the explanation segment when expl_weight is 0.
class ModelAdapter {
public:
    virtual ~ModelAdapter() = default;

    /// Fresh base model plus freshly initialized adapter weights.
    virtual void reset(std::uint64_t seed) = 0;
    virtual void apply_adapter(const AdapterConfig& config) = 0;
    virtual BatchLosses train_batch(std::span<const InstructionSample> samples, double expl_weight) = 0;
    virtual void optimizer_step(const OptimizerStep& step) = 0;
    virtual std::string evaluate_generate(const std::string& image_ref, const std::string& prompt) = 0;
    virtual void save(const std::filesystem::path& storage_ref) = 0;
    virtual void load(const std::filesystem::path& storage_ref) = 0;
    virtual std::string name() const = 0;
};

}  // namespace memexplain
