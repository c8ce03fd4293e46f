#pragma once

#include "memexplain/classification_metrics.hpp"
#include "memexplain/embed_sim.hpp"
#include "memexplain/model_adapter.hpp"
#include "memexplain/text_metrics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace memexplain {

struct MetricReport {
    std::size_t n = 0;
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
    double macro_f1 = 0.0;
    std::optional<double> bleu;
    std::optional<double> meteor;
    std::optional<double> embed_sim_f1;
    std::map<std::string, std::size_t> support;  ///< gold counts, every label present
    std::size_t unparsed = 0;
    std::string fallback_label;
    /// Metric variant tags, e.g. {"bleu": "corpus-eps1e-09", "embed_sim": "toy-hash-32"}.
    std::map<std::string, std::string> variants;
    std::vector<ClassScores> per_class;

    /// Looks up a metric by name (accuracy, weighted_f1, macro_f1, bleu,
    /// meteor, embed_sim_f1); nullopt when absent.
    std::optional<double> get(std::string_view metric) const;
};

json to_json(const MetricReport& report);
MetricReport metric_report_from_json(const json& j);

struct PredictionRecord {
    std::string id;
    std::string gold;
    std::string pred;
    std::string response;
    bool parsed = false;
};

json to_json(const PredictionRecord& record);

struct EvaluateOptions {
    /// Label used when nothing can be extracted; empty means the first label.
    std::string fallback_label;
    bool generation_metrics = true;
    BleuOptions bleu;
    /// Optional; embed_sim_f1 is omitted without one.
    const TokenEmbedder* embedder = nullptr;
    /// Where a partial report goes if generation fails part-way.
    std::optional<std::filesystem::path> partial_report_path;
};

struct Evaluation {
    MetricReport report;
    std::vector<PredictionRecord> predictions;
};

/// Gold label of an instruction target ("Label: X" up to the first newline).
std::string target_label(const InstructionSample& sample);

/// Scores already generated responses, one per sample in the same order.
/// Generation metrics cover the classify_explain samples; a response with no
/// explanation section scores as an empty candidate.
Evaluation score_responses(std::span<const InstructionSample> samples, std::span<const std::string> responses,
                           const LabelSet& labels, const EvaluateOptions& options = {});

/// Generates one response per sample through the adapter, then scores them.
/// A generation failure writes the report over the finished prefix to
/// options.partial_report_path and rethrows as RuntimeFailure.
Evaluation evaluate_model(ModelAdapter& model, std::span<const InstructionSample> samples, const LabelSet& labels,
                          const EvaluateOptions& options = {});

}  // namespace memexplain
