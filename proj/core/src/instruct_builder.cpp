#include "memexplain/instruct_builder.hpp"

#include "memexplain/error.hpp"
#include "memexplain/text.hpp"

#include <algorithm>
#include <cctype>

namespace memexplain {

std::string_view to_string(TaskMode mode) noexcept {
    return mode == TaskMode::classify ? "classify" : "classify_explain";
}

TaskMode parse_task_mode(std::string_view name) {
    if (name == "classify") return TaskMode::classify;
    if (name == "classify_explain") return TaskMode::classify_explain;
    throw ValidationError("unknown task mode '" + std::string(name) + "'", "task_mode");
}

json to_json(const InstructionSample& sample) {
    json row = {{"id", sample.id},
                {"task_mode", std::string(to_string(sample.task_mode))},
                {"instruction", sample.instruction},
                {"target", sample.target},
                {"image_ref", sample.image_ref}};
    if (sample.language) row["language"] = std::string(to_string(*sample.language));
    return row;
}

InstructionSample sample_from_json(const json& row) {
    InstructionSample sample;
    try {
        sample.id = row.at("id").get<std::string>();
        sample.task_mode = parse_task_mode(row.at("task_mode").get<std::string>());
        sample.instruction = row.at("instruction").get<std::string>();
        sample.target = row.at("target").get<std::string>();
        sample.image_ref = row.at("image_ref").get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed instruction sample: ") + e.what());
    }
    if (const auto it = row.find("language"); it != row.end() && it->is_string()) {
        sample.language = parse_language(it->get<std::string>());
    }
    return sample;
}

const std::string& InstructionTemplates::for_mode(TaskMode mode, std::optional<Language> language) const {
    if (mode == TaskMode::classify) return classify;
    return language == Language::ar ? classify_explain_ar : classify_explain_en;
}

std::string render_instruction(std::string_view instruction_template, const LabelSet& labels) {
    std::string joined;
    for (const auto& label : labels.labels) {
        if (!joined.empty()) joined += ", ";
        joined += label;
    }
    std::string out(instruction_template);
    constexpr std::string_view placeholder = "{labels}";
    for (auto pos = out.find(placeholder); pos != std::string::npos; pos = out.find(placeholder, pos + joined.size())) {
        out.replace(pos, placeholder.size(), joined);
    }
    return out;
}

InstructionSample build_classification_sample(const MemeRecord& record, std::string_view instruction) {
    return {record.id, TaskMode::classify, std::string(instruction), std::string(kLabelPrefix) + record.label,
            record.image_ref, std::nullopt};
}

InstructionSample build_joint_sample(const ExplainedRecord& record, Language language,
                                     std::string_view instruction) {
    if (!record.has_explanation(language)) {
        throw RecordError("no " + std::string(to_string(language)) + " explanation", {record.base.id});
    }
    std::string target = std::string(kLabelPrefix) + record.base.label + "\n" + std::string(kExplanationPrefix) +
                         record.explanations.at(language);
    return {record.base.id, TaskMode::classify_explain, std::string(instruction), std::move(target),
            record.base.image_ref, language};
}

std::vector<InstructionSample> build_stage_dataset(std::span<const ExplainedRecord> split, TaskMode mode,
                                                   std::optional<Language> language,
                                                   const InstructionTemplates& templates,
                                                   const LabelSet& labels) {
    if (mode == TaskMode::classify_explain && !language) {
        throw ValidationError("classify_explain datasets need an explanation language", "language");
    }
    if (mode == TaskMode::classify_explain) {
        std::vector<std::string> missing;
        for (const auto& r : split) {
            if (!r.has_explanation(*language)) missing.push_back(r.base.id);
        }
        if (!missing.empty()) {
            throw RecordError("records lack " + std::string(to_string(*language)) + " explanations", missing);
        }
    }
    const std::string instruction = render_instruction(templates.for_mode(mode, language), labels);
    std::vector<InstructionSample> samples;
    samples.reserve(split.size());
    for (const auto& r : split) {
        samples.push_back(mode == TaskMode::classify ? build_classification_sample(r.base, instruction)
                                                     : build_joint_sample(r, *language, instruction));
    }
    std::stable_sort(samples.begin(), samples.end(),
                     [](const InstructionSample& a, const InstructionSample& b) { return a.id < b.id; });
    return samples;
}

std::optional<std::string> extract_explanation(std::string_view text) {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto at = lowered.find("explanation:");
    if (at == std::string::npos) return std::nullopt;
    return text::trim(text.substr(at + std::string_view("explanation:").size()));
}

}  // namespace memexplain
