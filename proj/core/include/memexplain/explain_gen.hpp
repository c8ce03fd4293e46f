#pragma once

#include "memexplain/datamodel.hpp"
#include "memexplain/providers.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memexplain {

enum class TemplateId { armeme_ar, armeme_en, hateful_en };

std::string_view to_string(TemplateId id) noexcept;
TemplateId parse_template_id(std::string_view name);

struct PromptTemplate {
    TemplateId id;
    Language language;
    std::string dataset;  ///< label-set name the template belongs to
    /// Python-format body: {class_label}, {explanation_length}, and {{ }} escapes.
    std::string body;
};

const PromptTemplate& builtin_template(TemplateId id);

/// Placeholder names appearing in a template body, in order of appearance.
std::vector<std::string> template_placeholders(std::string_view body);

/// Substitutes the label and word limit. Throws ValidationError when the
/// label is not in the template's label set.
std::string build_prompt(const PromptTemplate& tmpl, std::string_view label, std::size_t word_limit);

struct GenerationConfig {
    std::size_t word_limit = 100;
    double temperature = 0.0;
    /// Total attempts per record, including the first.
    std::size_t max_retries = 3;
    std::size_t concurrency_limit = 4;
    std::string provider = "mock";
    /// Explanations up to tolerance * word_limit are accepted with a warning.
    double over_limit_tolerance = 1.2;
    /// Batch is reported as failed when failures / records exceeds this.
    double failure_threshold = 0.05;
    std::chrono::milliseconds retry_backoff{0};
    /// Overrides the wall-clock generation timestamp (reproducible runs).
    std::optional<std::string> fixed_timestamp;
};

enum class FailureReason { malformed_json, missing_field, empty, over_limit, transport };

std::string_view to_string(FailureReason reason) noexcept;

struct ProviderResponse {
    std::string raw_text;
    std::optional<std::string> parsed_explanation;
    std::optional<FailureReason> failure_reason;
    std::size_t word_count = 0;
    bool over_soft_limit = false;  ///< accepted, but longer than word_limit
};

/// Extracts {"explanation": "..."} from a completion, after stripping any
/// markdown code fence. Never throws.
ProviderResponse parse_response(std::string_view raw, std::size_t word_limit, double tolerance = 1.2,
                                const WordCounter& counter = {});

struct GenerationOutcome {
    std::optional<ExplainedRecord> record;
    std::optional<FailureReason> failure;
    std::string detail;
    std::size_t attempts = 0;
    bool over_soft_limit = false;
};

/// One record through the expert model. The record's label only feeds the
/// prompt; it is never rewritten.
GenerationOutcome generate_one(const ExplainedRecord& record, const PromptTemplate& tmpl,
                               const GenerationConfig& config, ExpertProvider& provider,
                               const std::filesystem::path& image_root = {});

struct FailureEntry {
    std::string id;
    FailureReason reason;
    std::size_t attempts = 0;
    std::string detail;
};

json to_json(const FailureEntry& failure);

struct BatchOptions {
    std::filesystem::path checkpoint_path;
    std::filesystem::path image_root;
};

struct BatchResult {
    /// Input order. Failed records are present without the new explanation.
    std::vector<ExplainedRecord> records;
    std::vector<FailureEntry> failures;
    std::size_t resumed = 0;
    std::size_t generated = 0;
    double failure_fraction = 0.0;
    bool exceeds_threshold = false;
};

/// Runs generate_one over a corpus with bounded concurrency. Completed
/// records are appended to the checkpoint as they finish; a rerun skips every
/// id whose cache key (id, template, word limit, model version) is already
/// there. Exceptions other than TransportError stop the batch and propagate
/// once in-flight calls return.
BatchResult batch_generate(std::span<const ExplainedRecord> records, const PromptTemplate& tmpl,
                           const GenerationConfig& config, ExpertProvider& provider,
                           const BatchOptions& options);

}  // namespace memexplain
