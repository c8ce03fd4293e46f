#pragma once

#include "memexplain/model_adapter.hpp"

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace memexplain {

/// Replaces the losses a MockModelAdapter reports for its n-th train_batch
/// call. Parameter updates are unaffected.
using LossScript = std::function<BatchLosses(std::size_t call_index, std::span<const InstructionSample> samples)>;

struct MockAdapterOptions {
    /// Images hash into this many feature buckets.
    std::size_t buckets = 64;
    /// Multiplies every optimizer learning rate so that the default
    /// fine-tuning rates visibly move the toy parameters.
    double gain = 2000.0;
    std::optional<LossScript> loss_script;
};

/// Deterministic CPU stand-in for a fine-tunable VLM.
///
/// Classification is a linear softmax over a one-hot image-bucket feature.
/// Explanations are a per-label score table over the training explanations;
/// it is only written when the explanation term carries weight, so with
/// expl_weight 0 the explanation targets cannot reach the parameters.
class MockModelAdapter final : public ModelAdapter {
public:
    MockModelAdapter(LabelSet labels, MockAdapterOptions options = {});

    void reset(std::uint64_t seed) override;
    void apply_adapter(const AdapterConfig& config) override;
    BatchLosses train_batch(std::span<const InstructionSample> samples, double expl_weight) override;
    void optimizer_step(const OptimizerStep& step) override;
    std::string evaluate_generate(const std::string& image_ref, const std::string& prompt) override;
    void save(const std::filesystem::path& storage_ref) override;
    void load(const std::filesystem::path& storage_ref) override;
    std::string name() const override { return "mock"; }

    /// Parameter snapshot, for isolation checks.
    json parameters() const;
    std::size_t train_calls() const noexcept { return train_calls_; }
    std::size_t optimizer_steps() const noexcept { return optimizer_steps_; }

private:
    std::size_t bucket_of(std::string_view image_ref) const;
    std::vector<double> probabilities(std::size_t bucket) const;
    void require_adapter() const;

    LabelSet labels_;
    MockAdapterOptions options_;
    std::optional<AdapterConfig> adapter_;
    std::vector<std::vector<double>> weights_;  // [bucket][label]
    std::vector<double> bias_;
    std::map<std::string, std::map<std::string, double>> memory_;  // label -> explanation -> score

    std::vector<std::vector<double>> grad_weights_;
    std::vector<double> grad_bias_;
    std::map<std::string, std::map<std::string, double>> grad_memory_;
    std::size_t pending_batches_ = 0;

    std::size_t train_calls_ = 0;
    std::size_t optimizer_steps_ = 0;
};

/// Answers every (image, instruction) it was built from with that sample's
/// target; anything else gets an empty response. Training is a no-op.
class EchoModelAdapter final : public ModelAdapter {
public:
    explicit EchoModelAdapter(std::span<const InstructionSample> samples);

    void reset(std::uint64_t) override {}
    void apply_adapter(const AdapterConfig&) override {}
    BatchLosses train_batch(std::span<const InstructionSample>, double) override { return {}; }
    void optimizer_step(const OptimizerStep&) override {}
    std::string evaluate_generate(const std::string& image_ref, const std::string& prompt) override;
    void save(const std::filesystem::path& storage_ref) override;
    void load(const std::filesystem::path&) override {}
    std::string name() const override { return "echo"; }

private:
    std::map<std::pair<std::string, std::string>, std::string> answers_;
};

/// Returns the same text for every request.
class ConstantModelAdapter final : public ModelAdapter {
public:
    explicit ConstantModelAdapter(std::string response) : response_(std::move(response)) {}

    void reset(std::uint64_t) override {}
    void apply_adapter(const AdapterConfig&) override {}
    BatchLosses train_batch(std::span<const InstructionSample>, double) override { return {}; }
    void optimizer_step(const OptimizerStep&) override {}
    std::string evaluate_generate(const std::string&, const std::string&) override { return response_; }
    void save(const std::filesystem::path& storage_ref) override;
    void load(const std::filesystem::path&) override {}
    std::string name() const override { return "constant"; }

private:
    std::string response_;
};

}  // namespace memexplain
