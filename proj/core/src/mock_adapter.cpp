#include "memexplain/mock_adapter.hpp"

#include "memexplain/error.hpp"
#include "memexplain/evaluate.hpp"
#include "memexplain/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace memexplain {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool mentions_explanation(std::string_view prompt) {
    return text::to_lower(prompt).find("explanation") != std::string::npos;
}

}  // namespace

MockModelAdapter::MockModelAdapter(LabelSet labels, MockAdapterOptions options)
    : labels_(std::move(labels)), options_(std::move(options)) {
    if (labels_.labels.empty()) throw ValidationError("label set is empty", "labels");
    if (options_.buckets == 0) throw ValidationError("must be positive", "mock.buckets");
    reset(0);
}

void MockModelAdapter::reset(std::uint64_t seed) {
    const std::size_t n = labels_.labels.size();
    std::uint64_t state = seed;
    weights_.assign(options_.buckets, std::vector<double>(n, 0.0));
    for (auto& row : weights_) {
        for (double& w : row) {
            const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
            w = (unit - 0.5) * 0.02;
        }
    }
    bias_.assign(n, 0.0);
    memory_.clear();
    grad_weights_.assign(options_.buckets, std::vector<double>(n, 0.0));
    grad_bias_.assign(n, 0.0);
    grad_memory_.clear();
    pending_batches_ = 0;
    adapter_.reset();
    train_calls_ = 0;
    optimizer_steps_ = 0;
}

void MockModelAdapter::apply_adapter(const AdapterConfig& config) {
    config.validate();
    adapter_ = config;
}

void MockModelAdapter::require_adapter() const {
    if (!adapter_) throw RuntimeFailure("mock adapter: apply_adapter was not called");
}

std::size_t MockModelAdapter::bucket_of(std::string_view image_ref) const {
    return static_cast<std::size_t>(fnv1a(image_ref) % options_.buckets);
}

std::vector<double> MockModelAdapter::probabilities(std::size_t bucket) const {
    std::vector<double> logits(bias_.size());
    for (std::size_t k = 0; k < logits.size(); ++k) logits[k] = weights_[bucket][k] + bias_[k];
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - top);
        sum += z;
    }
    for (double& z : logits) z /= sum;
    return logits;
}

BatchLosses MockModelAdapter::train_batch(std::span<const InstructionSample> samples, double expl_weight) {
    require_adapter();
    if (samples.empty()) throw ValidationError("empty batch", "samples");
    const double inv = 1.0 / static_cast<double>(samples.size());

    double l_classif = 0.0;
    double l_expl = 0.0;
    std::size_t explained = 0;
    for (const auto& sample : samples) {
        const std::string label = target_label(sample);
        const auto gold = labels_.index_of(label);
        if (!gold) throw RecordError("target label '" + label + "' not in label set", {sample.id});

        const std::size_t bucket = bucket_of(sample.image_ref);
        const auto p = probabilities(bucket);
        l_classif -= std::log(std::max(p[*gold], 1e-300)) * inv;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double g = (p[k] - (k == *gold ? 1.0 : 0.0)) * inv;
            grad_weights_[bucket][k] += g;
            grad_bias_[k] += g;
        }

        if (sample.task_mode != TaskMode::classify_explain) continue;
        const auto expl = extract_explanation(sample.target);
        if (!expl || expl->empty()) continue;
        double total = 0.0;
        double own = 0.0;
        if (auto it = memory_.find(label); it != memory_.end()) {
            for (const auto& [text, score] : it->second) {
                total += score;
                if (text == *expl) own = score;
            }
        }
        l_expl -= std::log((own + 1.0) / (total + 2.0));
        ++explained;
        if (expl_weight != 0.0) grad_memory_[label][*expl] -= expl_weight * inv;
    }

    BatchLosses losses{l_classif, std::nullopt};
    if (explained > 0) losses.l_expl = l_expl / static_cast<double>(explained);
    ++pending_batches_;
    const std::size_t call = train_calls_++;
    if (options_.loss_script) return (*options_.loss_script)(call, samples);
    return losses;
}

void MockModelAdapter::optimizer_step(const OptimizerStep& step) {
    require_adapter();
    if (pending_batches_ == 0) return;
    const double lr = step.learning_rate * options_.gain;
    const double decay = 1.0 - step.learning_rate * step.weight_decay;
    const double scale = lr / static_cast<double>(pending_batches_);
    for (std::size_t b = 0; b < weights_.size(); ++b) {
        for (std::size_t k = 0; k < bias_.size(); ++k) {
            weights_[b][k] = weights_[b][k] * decay - scale * grad_weights_[b][k];
            grad_weights_[b][k] = 0.0;
        }
    }
    for (std::size_t k = 0; k < bias_.size(); ++k) {
        bias_[k] = bias_[k] * decay - scale * grad_bias_[k];
        grad_bias_[k] = 0.0;
    }
    for (auto& [label, table] : memory_) {
        for (auto& [text, score] : table) score *= decay;
    }
    for (const auto& [label, table] : grad_memory_) {
        for (const auto& [text, g] : table) memory_[label][text] -= scale * g;
    }
    grad_memory_.clear();
    pending_batches_ = 0;
    ++optimizer_steps_;
}

std::string MockModelAdapter::evaluate_generate(const std::string& image_ref, const std::string& prompt) {
    const auto p = probabilities(bucket_of(image_ref));
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    const std::string& label = labels_.labels[best];
    std::string out = std::string(kLabelPrefix) + label;
    if (!mentions_explanation(prompt)) return out;
    const auto it = memory_.find(label);
    if (it == memory_.end() || it->second.empty()) return out;
    const std::string* chosen = nullptr;
    double top = 0.0;
    for (const auto& [text, score] : it->second) {
        if (chosen == nullptr || score > top) {
            chosen = &text;
            top = score;
        }
    }
    return out + "\n" + std::string(kExplanationPrefix) + *chosen;
}

json MockModelAdapter::parameters() const {
    json memory = json::object();
    for (const auto& [label, table] : memory_) {
        json row = json::object();
        for (const auto& [text, score] : table) row[text] = score;
        memory[label] = std::move(row);
    }
    return {{"weights", weights_}, {"bias", bias_}, {"memory", std::move(memory)}};
}

void MockModelAdapter::save(const std::filesystem::path& storage_ref) {
    require_adapter();
    json state = parameters();
    state["backend"] = name();
    state["labels"] = labels_.labels;
    state["adapter"] = to_json(*adapter_);
    if (storage_ref.has_parent_path()) std::filesystem::create_directories(storage_ref.parent_path());
    write_json(storage_ref, state);
}

void MockModelAdapter::load(const std::filesystem::path& storage_ref) {
    json state;
    try {
        state = read_json(storage_ref);
    } catch (const std::exception& e) {
        throw RuntimeFailure("mock adapter: cannot load " + storage_ref.string() + ": " + e.what());
    }
    try {
        if (state.at("backend") != name()) throw RuntimeFailure("checkpoint was written by another backend");
        if (state.at("labels").get<std::vector<std::string>>() != labels_.labels) {
            throw RuntimeFailure("checkpoint label set differs");
        }
        auto weights = state.at("weights").get<std::vector<std::vector<double>>>();
        auto bias = state.at("bias").get<std::vector<double>>();
        if (weights.size() != options_.buckets || bias.size() != labels_.labels.size()) {
            throw RuntimeFailure("checkpoint shape differs");
        }
        std::map<std::string, std::map<std::string, double>> memory;
        for (const auto& [label, table] : state.at("memory").items()) {
            for (const auto& [text, score] : table.items()) memory[label][text] = score.get<double>();
        }
        weights_ = std::move(weights);
        bias_ = std::move(bias);
        memory_ = std::move(memory);
        adapter_ = adapter_config_from_json(state.at("adapter"));
    } catch (const json::exception& e) {
        throw RuntimeFailure("mock adapter: malformed checkpoint " + storage_ref.string() + ": " + e.what());
    }
    for (auto& row : grad_weights_) std::fill(row.begin(), row.end(), 0.0);
    std::fill(grad_bias_.begin(), grad_bias_.end(), 0.0);
    grad_memory_.clear();
    pending_batches_ = 0;
}

EchoModelAdapter::EchoModelAdapter(std::span<const InstructionSample> samples) {
    for (const auto& s : samples) answers_[{s.image_ref, s.instruction}] = s.target;
}

std::string EchoModelAdapter::evaluate_generate(const std::string& image_ref, const std::string& prompt) {
    const auto it = answers_.find({image_ref, prompt});
    return it == answers_.end() ? std::string{} : it->second;
}

void EchoModelAdapter::save(const std::filesystem::path& storage_ref) {
    write_json(storage_ref, {{"backend", name()}, {"answers", answers_.size()}});
}

void ConstantModelAdapter::save(const std::filesystem::path& storage_ref) {
    write_json(storage_ref, {{"backend", name()}, {"response", response_}});
}

}  // namespace memexplain
