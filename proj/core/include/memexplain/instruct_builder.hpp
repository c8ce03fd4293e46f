#pragma once

#include "memexplain/datamodel.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memexplain {

enum class TaskMode { classify, classify_explain };

std::string_view to_string(TaskMode mode) noexcept;
TaskMode parse_task_mode(std::string_view name);

struct InstructionSample {
    std::string id;
    TaskMode task_mode = TaskMode::classify;
    std::string instruction;
    std::string target;
    std::string image_ref;
    std::optional<Language> language;  ///< classify_explain only

    bool operator==(const InstructionSample&) const = default;
};

json to_json(const InstructionSample& sample);
InstructionSample sample_from_json(const json& row);

inline constexpr std::string_view kLabelPrefix = "Label: ";
inline constexpr std::string_view kExplanationPrefix = "Explanation: ";

/// User-turn prompts shown with the image during fine-tuning. {labels} is
/// replaced by the comma-separated label set.
struct InstructionTemplates {
    std::string version = "v1";
    std::string classify =
        "Classify this meme into one of the following categories: {labels}. "
        "Respond in the format \"Label: <class_label>\".";
    std::string classify_explain_en =
        "Classify this meme into one of the following categories: {labels}. "
        "Respond in the format \"Label: <class_label>\" followed by a line "
        "\"Explanation: <text>\" giving a short English explanation of the label.";
    std::string classify_explain_ar =
        "Classify this meme into one of the following categories: {labels}. "
        "Respond in the format \"Label: <class_label>\" followed by a line "
        "\"Explanation: <text>\" giving a short Arabic explanation of the label.";

    const std::string& for_mode(TaskMode mode, std::optional<Language> language) const;
};

std::string render_instruction(std::string_view instruction_template, const LabelSet& labels);

InstructionSample build_classification_sample(const MemeRecord& record, std::string_view instruction);

/// Throws RecordError when the record has no explanation in `language`.
InstructionSample build_joint_sample(const ExplainedRecord& record, Language language,
                                     std::string_view instruction);

/// One sample per record, ordered by id. For classify_explain every record
/// must carry an explanation in `language`; otherwise the error lists all
/// unexplained ids.
std::vector<InstructionSample> build_stage_dataset(std::span<const ExplainedRecord> split, TaskMode mode,
                                                   std::optional<Language> language,
                                                   const InstructionTemplates& templates,
                                                   const LabelSet& labels);

/// Splits "Label: x\nExplanation: y" style text. The explanation is whatever
/// follows the first "Explanation:" marker (case-insensitive), trimmed.
std::optional<std::string> extract_explanation(std::string_view text);

}  // namespace memexplain
