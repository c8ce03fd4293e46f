#pragma once

#include "memexplain/model_adapter.hpp"

#include <chrono>

namespace memexplain {

struct RemoteAdapterConfig {
    /// Base URL of a training worker, e.g. http://gpu-box:8500 or http://host/prefix.
    std::string endpoint;
    std::string api_key_env = "MEMEXPLAIN_TRAINER_KEY";
    std::chrono::seconds timeout{600};
};

/// Drives a GPU training worker over HTTP. Every call is a JSON POST to
/// <endpoint>/<method> (reset, apply_adapter, train_batch, optimizer_step,
/// generate, save, load); non-200 replies raise RuntimeFailure.
///
///   train_batch  {"samples": [...], "expl_weight": w} -> {"l_classif": x, "l_expl": y|null}
///   generate     {"image_ref": s, "prompt": s}        -> {"text": s}
class RemoteModelAdapter final : public ModelAdapter {
public:
    explicit RemoteModelAdapter(RemoteAdapterConfig config);

    void reset(std::uint64_t seed) override;
    void apply_adapter(const AdapterConfig& config) override;
    BatchLosses train_batch(std::span<const InstructionSample> samples, double expl_weight) override;
    void optimizer_step(const OptimizerStep& step) override;
    std::string evaluate_generate(const std::string& image_ref, const std::string& prompt) override;
    void save(const std::filesystem::path& storage_ref) override;
    void load(const std::filesystem::path& storage_ref) override;
    std::string name() const override { return "remote"; }

private:
    json call(const std::string& method, const json& body);

    RemoteAdapterConfig config_;
    std::string base_;
    std::string prefix_;
    std::string api_key_;
};

}  // namespace memexplain
