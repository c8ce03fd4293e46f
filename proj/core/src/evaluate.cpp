#include "memexplain/evaluate.hpp"

#include "memexplain/error.hpp"
#include "memexplain/label_extraction.hpp"

#include <spdlog/spdlog.h>

namespace memexplain {

std::optional<double> MetricReport::get(std::string_view metric) const {
    if (metric == "accuracy") return accuracy;
    if (metric == "weighted_f1") return weighted_f1;
    if (metric == "macro_f1") return macro_f1;
    if (metric == "bleu") return bleu;
    if (metric == "meteor") return meteor;
    if (metric == "embed_sim_f1") return embed_sim_f1;
    return std::nullopt;
}

json to_json(const MetricReport& r) {
    json j = {{"n", r.n},
              {"accuracy", r.accuracy},
              {"weighted_f1", r.weighted_f1},
              {"macro_f1", r.macro_f1},
              {"support", r.support},
              {"unparsed", r.unparsed},
              {"fallback_label", r.fallback_label},
              {"variants", r.variants}};
    if (r.bleu) j["bleu"] = *r.bleu;
    if (r.meteor) j["meteor"] = *r.meteor;
    if (r.embed_sim_f1) j["embed_sim_f1"] = *r.embed_sim_f1;
    json per_class = json::array();
    for (const auto& c : r.per_class) {
        per_class.push_back({{"label", c.label},
                             {"precision", c.precision},
                             {"recall", c.recall},
                             {"f1", c.f1},
                             {"support", c.support}});
    }
    j["per_class"] = std::move(per_class);
    return j;
}

MetricReport metric_report_from_json(const json& j) {
    MetricReport r;
    r.n = j.at("n").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.weighted_f1 = j.at("weighted_f1").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    if (j.contains("bleu")) r.bleu = j["bleu"].get<double>();
    if (j.contains("meteor")) r.meteor = j["meteor"].get<double>();
    if (j.contains("embed_sim_f1")) r.embed_sim_f1 = j["embed_sim_f1"].get<double>();
    r.support = j.value("support", std::map<std::string, std::size_t>{});
    r.unparsed = j.value("unparsed", std::size_t{0});
    r.fallback_label = j.value("fallback_label", std::string{});
    r.variants = j.value("variants", std::map<std::string, std::string>{});
    for (const auto& c : j.value("per_class", json::array())) {
        r.per_class.push_back({c.at("label").get<std::string>(), c.at("precision").get<double>(),
                               c.at("recall").get<double>(), c.at("f1").get<double>(),
                               c.at("support").get<std::size_t>()});
    }
    return r;
}

json to_json(const PredictionRecord& p) {
    return {{"id", p.id}, {"gold", p.gold}, {"pred", p.pred}, {"response", p.response}, {"parsed", p.parsed}};
}

std::string target_label(const InstructionSample& sample) {
    std::string_view t = sample.target;
    if (!t.starts_with(kLabelPrefix)) throw RecordError("target does not start with \"Label: \"", {sample.id});
    t.remove_prefix(kLabelPrefix.size());
    return std::string(t.substr(0, t.find('\n')));
}

Evaluation score_responses(std::span<const InstructionSample> samples, std::span<const std::string> responses,
                           const LabelSet& labels, const EvaluateOptions& options) {
    if (samples.size() != responses.size()) {
        throw ValidationError("got " + std::to_string(responses.size()) + " responses for " +
                              std::to_string(samples.size()) + " samples");
    }
    if (labels.labels.empty()) throw ValidationError("label set is empty", "labels");
    const std::string fallback = options.fallback_label.empty() ? labels.labels.front() : options.fallback_label;
    if (!labels.contains(fallback)) throw ValidationError("not in the label set", "eval.fallback_label");

    Evaluation out;
    MetricReport& report = out.report;
    report.n = samples.size();
    report.fallback_label = fallback;
    for (const auto& l : labels.labels) report.support[l] = 0;

    std::vector<std::string> golds, preds;
    std::vector<std::string> candidates, references;
    std::optional<Language> language;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& sample = samples[i];
        const std::string gold = target_label(sample);
        if (!labels.contains(gold)) throw RecordError("gold label '" + gold + "' not in label set", {sample.id});
        const auto extraction = extract_label(responses[i], labels, fallback);
        if (!extraction.parsed) ++report.unparsed;
        ++report.support[gold];
        golds.push_back(gold);
        preds.push_back(extraction.label);
        out.predictions.push_back({sample.id, gold, extraction.label, responses[i], extraction.parsed});

        if (sample.task_mode != TaskMode::classify_explain) continue;
        auto reference = extract_explanation(sample.target);
        if (!reference || reference->empty()) continue;
        if (!language) language = sample.language.value_or(Language::en);
        candidates.push_back(extract_explanation(responses[i]).value_or(std::string{}));
        references.push_back(std::move(*reference));
    }

    const auto cls = classification_metrics(preds, golds, labels);
    report.accuracy = cls.accuracy;
    report.weighted_f1 = cls.weighted_f1;
    report.macro_f1 = cls.macro_f1;
    report.per_class = cls.per_class;

    if (options.generation_metrics && !candidates.empty()) {
        report.bleu = bleu(candidates, references, {}, options.bleu);
        report.variants["bleu"] = bleu_variant(options.bleu);
        report.meteor = meteor(candidates, references, *language);
        report.variants["meteor"] = *language == Language::en ? "exact+porter" : "exact";
        if (options.embedder != nullptr) {
            double sum = 0.0;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                const auto ref = options.embedder->embed(references[i]);
                if (ref.empty()) throw ValidationError("reference explanation has no tokens");
                const auto cand = options.embedder->embed(candidates[i]);
                if (!cand.empty()) sum += embed_sim_pair(cand, ref).f1;
            }
            report.embed_sim_f1 = sum / static_cast<double>(candidates.size());
            report.variants["embed_sim"] = options.embedder->name() + "-plain";
        }
    }
    return out;
}

Evaluation evaluate_model(ModelAdapter& model, std::span<const InstructionSample> samples, const LabelSet& labels,
                          const EvaluateOptions& options) {
    std::vector<std::string> responses;
    responses.reserve(samples.size());
    for (const auto& sample : samples) {
        try {
            responses.push_back(model.evaluate_generate(sample.image_ref, sample.instruction));
        } catch (const std::exception& e) {
            const std::string message =
                "generation failed on sample " + sample.id + " (" + std::to_string(responses.size()) + "/" +
                std::to_string(samples.size()) + " done): " + e.what();
            if (options.partial_report_path) {
                try {
                    json partial = {{"complete", false}, {"error", message}};
                    if (!responses.empty()) {
                        partial["report"] =
                            to_json(score_responses(samples.first(responses.size()), responses, labels, options).report);
                    }
                    write_json(*options.partial_report_path, partial);
                } catch (const std::exception& dump_error) {
                    spdlog::error("could not write partial report: {}", dump_error.what());
                }
            }
            throw RuntimeFailure(message);
        }
    }
    return score_responses(samples, responses, labels, options);
}

}  // namespace memexplain
