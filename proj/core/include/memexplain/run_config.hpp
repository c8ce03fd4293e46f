#pragma once

#include "memexplain/datamodel.hpp"
#include "memexplain/explain_gen.hpp"
#include "memexplain/instruct_builder.hpp"
#include "memexplain/providers.hpp"
#include "memexplain/stage.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace memexplain {

struct DatasetSection {
    std::string profile = "armeme";  ///< armeme | hateful
    std::filesystem::path root;
    std::filesystem::path manifest;
    MissingFilePolicy missing_files = MissingFilePolicy::warn;
};

struct GenerationSection {
    GenerationConfig config;
    std::vector<TemplateId> templates;  ///< empty: every template of the profile
    RemoteProviderConfig remote;
    /// Mock provider only: raise a hard error on this call (1-based); 0 disables.
    std::size_t mock_interrupt_after = 0;
};

struct InstructionSection {
    InstructionTemplates templates;
    std::vector<Language> languages;  ///< empty: ar+en for armeme, en for hateful
};

struct TrainSection {
    std::string backend = "mock";  ///< mock | remote
    std::string selection_criterion = "weighted_f1";
    Language language = Language::en;
    StageConfig stage1 = StageConfig::defaults(StageId::stage1);
    StageConfig stage2 = StageConfig::defaults(StageId::stage2);
    StageConfig single_stage = StageConfig::defaults(StageId::single_stage);
    std::string remote_endpoint;
    std::string remote_api_key_env = "MEMEXPLAIN_TRAINER_KEY";
    std::size_t mock_buckets = 64;
    double mock_gain = 2000.0;
};

struct EvalSection {
    /// Empty: the majority class of the train split.
    std::string fallback_label;
    std::string embedder = "toy-hash";  ///< toy-hash | precomputed | none
    std::filesystem::path embedder_path;
    std::string embedder_model;
    bool bleu_sentence_mean = false;
};

struct AnnotationSection {
    std::string host = "127.0.0.1";
    int port = 8088;
    std::size_t quota = 3;
    Language language = Language::ar;
    std::string guideline_ref = "guidelines-v1";
    std::map<std::string, std::string> tokens;  ///< token -> annotator id
    std::string admin_token_env = "MEMEXPLAIN_ADMIN_TOKEN";
};

/// Everything a pipeline run needs. Relative paths resolve against the
/// directory of the config file.
struct RunConfig {
    DatasetSection dataset;
    GenerationSection generation;
    InstructionSection instructions;
    TrainSection train;
    EvalSection eval;
    AnnotationSection annotation;
    std::uint64_t seed = 42;
    std::filesystem::path output_root = "runs";

    LabelSet label_set() const { return LabelSet::by_name(dataset.profile); }
    std::vector<TemplateId> resolved_templates() const;
    std::vector<Language> resolved_languages() const;
};

/// Applies "a.b.c=value" overrides to a raw config document. The value is
/// parsed as JSON when it parses, otherwise taken as a string.
void apply_override(json& document, std::string_view assignment);

/// Validates and fills defaults; errors carry the dotted field path.
RunConfig run_config_from_json(const json& document, const std::filesystem::path& base_dir = {});
json to_json(const RunConfig& config);

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace memexplain
