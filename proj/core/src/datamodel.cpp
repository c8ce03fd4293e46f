#include "memexplain/datamodel.hpp"

#include "memexplain/error.hpp"
#include "memexplain/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace memexplain {

namespace fs = std::filesystem;

std::string_view to_string(Split split) noexcept {
    switch (split) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "train";
}

std::string_view to_string(Language language) noexcept {
    return language == Language::ar ? "ar" : "en";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "dev") return Split::dev;
    if (name == "test") return Split::test;
    throw ValidationError("unknown split '" + std::string(name) + "' (expected train|dev|test)", "split");
}

Language parse_language(std::string_view name) {
    if (name == "ar") return Language::ar;
    if (name == "en") return Language::en;
    throw ValidationError("unknown language '" + std::string(name) + "' (expected ar|en)", "language");
}

bool LabelSet::contains(std::string_view label) const noexcept {
    return index_of(label).has_value();
}

std::optional<std::size_t> LabelSet::index_of(std::string_view label) const noexcept {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
}

LabelSet LabelSet::armeme() {
    return {"armeme", {"Not propaganda", "Propaganda", "Not-meme", "Other"}};
}

LabelSet LabelSet::hateful() {
    return {"hateful", {"Not Hateful", "Hateful"}};
}

LabelSet LabelSet::by_name(std::string_view name) {
    std::string lowered(name);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "armeme") return armeme();
    if (lowered == "hateful" || lowered == "hateful_memes") return hateful();
    throw ValidationError("unknown dataset profile '" + std::string(name) + "' (expected armeme|hateful)",
                          "profile");
}

bool ExplainedRecord::has_explanation(Language language) const {
    const auto it = explanations.find(language);
    return it != explanations.end() && !it->second.empty();
}

json to_json(const ExplainedRecord& record) {
    json row = {
        {"id", record.base.id},
        {"img_path", record.base.image_ref},
        {"text", record.base.text},
        {"class_label", record.base.label},
        {"split", std::string(to_string(record.base.split))},
    };
    for (const auto& [language, explanation] : record.explanations) {
        row["explanation_" + std::string(to_string(language))] = explanation;
    }
    if (!record.gen_meta.empty()) {
        const auto& primary = record.gen_meta.count(Language::en) ? record.gen_meta.at(Language::en)
                                                                   : record.gen_meta.begin()->second;
        row["gen_model"] = primary.model_version;
        row["gen_timestamp"] = primary.timestamp;
        json meta = json::object();
        for (const auto& [language, m] : record.gen_meta) {
            meta[std::string(to_string(language))] = {
                {"provider", m.provider},
                {"model_version", m.model_version},
                {"prompt_hash", m.prompt_hash},
                {"template_id", m.template_id},
                {"timestamp", m.timestamp},
            };
        }
        row["gen_meta"] = std::move(meta);
    }
    return row;
}

namespace {

std::string required_string(const json& row, const char* field) {
    const auto it = row.find(field);
    if (it == row.end() || !it->is_string()) {
        std::string id = row.contains("id") && row["id"].is_string() ? row["id"].get<std::string>() : "?";
        throw ValidationError("row '" + id + "' is missing string field", field);
    }
    return it->get<std::string>();
}

}  // namespace

ExplainedRecord record_from_json(const json& row) {
    if (!row.is_object()) throw ValidationError("manifest row is not a JSON object");
    ExplainedRecord record;
    record.base.id = required_string(row, "id");
    record.base.image_ref = required_string(row, "img_path");
    record.base.text = required_string(row, "text");
    record.base.label = required_string(row, "class_label");
    record.base.split = parse_split(required_string(row, "split"));
    for (Language language : {Language::ar, Language::en}) {
        const std::string key = "explanation_" + std::string(to_string(language));
        if (const auto it = row.find(key); it != row.end() && it->is_string() && !it->get<std::string>().empty()) {
            record.explanations[language] = it->get<std::string>();
        }
    }
    if (const auto it = row.find("gen_meta"); it != row.end() && it->is_object()) {
        for (const auto& [lang, m] : it->items()) {
            GenerationMeta meta;
            meta.provider = m.value("provider", "");
            meta.model_version = m.value("model_version", "");
            meta.prompt_hash = m.value("prompt_hash", "");
            meta.template_id = m.value("template_id", "");
            meta.timestamp = m.value("timestamp", "");
            record.gen_meta[parse_language(lang)] = std::move(meta);
        }
    } else if (row.contains("gen_model") || row.contains("gen_timestamp")) {
        for (const auto& [language, _] : record.explanations) {
            GenerationMeta meta;
            meta.model_version = row.value("gen_model", "");
            meta.timestamp = row.value("gen_timestamp", "");
            record.gen_meta[language] = std::move(meta);
        }
    }
    return record;
}

const std::vector<ExplainedRecord>& LoadedDataset::split(Split s) const {
    switch (s) {
        case Split::train: return train;
        case Split::dev: return dev;
        case Split::test: return test;
    }
    return train;
}

std::vector<ExplainedRecord>& LoadedDataset::split(Split s) {
    return const_cast<std::vector<ExplainedRecord>&>(std::as_const(*this).split(s));
}

std::vector<ExplainedRecord> LoadedDataset::all() const {
    std::vector<ExplainedRecord> out;
    out.reserve(total());
    for (Split s : kAllSplits) out.insert(out.end(), split(s).begin(), split(s).end());
    return out;
}

LoadedDataset dataset_from_records(std::vector<ExplainedRecord> records, const LabelSet& label_set,
                                   const fs::path& root, const LoadOptions& options) {
    std::vector<std::string> unknown_label_ids;
    std::vector<std::string> duplicate_ids;
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (!label_set.contains(r.base.label)) unknown_label_ids.push_back(r.base.id);
        if (!seen.insert(r.base.id).second) duplicate_ids.push_back(r.base.id);
    }
    if (!unknown_label_ids.empty()) {
        throw RecordError("labels outside the '" + label_set.name + "' label set", unknown_label_ids);
    }
    if (!duplicate_ids.empty()) throw RecordError("duplicate record ids", duplicate_ids);

    LoadedDataset dataset;
    dataset.label_set = label_set;
    for (Split s : kAllSplits) {
        for (const auto& label : label_set.labels) dataset.counts[s][label] = 0;
    }
    if (!root.empty() && options.missing_files != MissingFilePolicy::ignore) {
        for (const auto& r : records) {
            std::error_code ec;
            if (!fs::is_regular_file(root / r.base.image_ref, ec)) dataset.missing_files.push_back(r.base.id);
        }
        if (!dataset.missing_files.empty() && options.missing_files == MissingFilePolicy::error) {
            throw RecordError("image files not found under " + root.string(), dataset.missing_files);
        }
    }
    for (auto& r : records) {
        ++dataset.counts[r.base.split][r.base.label];
        dataset.split(r.base.split).push_back(std::move(r));
    }
    return dataset;
}

LoadedDataset load_dataset(const fs::path& root, const fs::path& manifest, const LabelSet& label_set,
                           const LoadOptions& options) {
    if (!fs::exists(manifest)) throw ValidationError("manifest not found: " + manifest.string(), "manifest");
    std::vector<ExplainedRecord> records;
    for (const auto& row : read_jsonl(manifest)) records.push_back(record_from_json(row));
    return dataset_from_records(std::move(records), label_set, root, options);
}

void save_dataset(const fs::path& manifest, std::span<const ExplainedRecord> records) {
    std::vector<json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(to_json(r));
    write_jsonl(manifest, rows);
}

std::size_t round_half_up(double value) {
    if (!(value > 0.0)) return 0;
    return static_cast<std::size_t>(std::floor(value + 0.5));
}

CorpusStats corpus_stats(std::span<const ExplainedRecord> records, const WordCounter& counter) {
    const WordCounter count = counter ? counter : WordCounter([](std::string_view s) { return text::count_words(s); });
    CorpusStats stats;
    stats.record_count = records.size();
    std::map<Language, std::size_t> explained;
    for (const auto& r : records) {
        stats.total_words += count(r.base.text);
        for (const auto& [language, explanation] : r.explanations) {
            stats.total_expl_words[language] += count(explanation);
            ++explained[language];
        }
    }
    if (stats.record_count > 0) {
        stats.avg_words_raw = static_cast<double>(stats.total_words) / static_cast<double>(stats.record_count);
        stats.avg_words = round_half_up(stats.avg_words_raw);
    }
    for (const auto& [language, n] : explained) {
        const double avg = static_cast<double>(stats.total_expl_words[language]) / static_cast<double>(n);
        stats.avg_expl_words_raw[language] = avg;
        stats.avg_expl_words[language] = round_half_up(avg);
    }
    return stats;
}

DatasetStats dataset_stats(const LoadedDataset& dataset, const WordCounter& counter) {
    DatasetStats out;
    std::size_t non_empty = 0;
    double avg_sum = 0.0;
    std::map<Language, double> expl_avg_sum;
    std::map<Language, std::size_t> expl_splits;
    for (Split s : kAllSplits) {
        const auto stats = corpus_stats(dataset.split(s), counter);
        out.total.record_count += stats.record_count;
        out.total.total_words += stats.total_words;
        if (stats.record_count > 0) {
            ++non_empty;
            avg_sum += stats.avg_words_raw;
        }
        for (const auto& [language, total] : stats.total_expl_words) {
            out.total.total_expl_words[language] += total;
            expl_avg_sum[language] += stats.avg_expl_words_raw.at(language);
            ++expl_splits[language];
        }
        out.splits[s] = stats;
    }
    if (non_empty > 0) {
        out.total.avg_words_raw = avg_sum / static_cast<double>(non_empty);
        out.total.avg_words = round_half_up(out.total.avg_words_raw);
    }
    for (const auto& [language, sum] : expl_avg_sum) {
        const double avg = sum / static_cast<double>(expl_splits[language]);
        out.total.avg_expl_words_raw[language] = avg;
        out.total.avg_expl_words[language] = round_half_up(avg);
    }
    const auto all = dataset.all();
    const auto pooled = corpus_stats(all, counter);
    out.pooled_avg_words_raw = pooled.avg_words_raw;
    out.pooled_avg_expl_words_raw = pooled.avg_expl_words_raw;
    return out;
}

json to_json(const CorpusStats& stats) {
    json out = {
        {"record_count", stats.record_count},
        {"total_words", stats.total_words},
        {"avg_words", stats.avg_words},
        {"avg_words_raw", stats.avg_words_raw},
    };
    if (!stats.total_expl_words.empty()) {
        json total = json::object();
        json avg = json::object();
        json avg_raw = json::object();
        for (const auto& [language, n] : stats.total_expl_words) {
            const std::string key(to_string(language));
            total[key] = n;
            avg[key] = stats.avg_expl_words.at(language);
            avg_raw[key] = stats.avg_expl_words_raw.at(language);
        }
        out["total_expl_words"] = std::move(total);
        out["avg_expl_words"] = std::move(avg);
        out["avg_expl_words_raw"] = std::move(avg_raw);
    }
    return out;
}

json to_json(const DatasetStats& stats) {
    json out = json::object();
    for (const auto& [split, s] : stats.splits) out[std::string(to_string(split))] = to_json(s);
    out["total"] = to_json(stats.total);
    json pooled = {{"avg_words_raw", stats.pooled_avg_words_raw}};
    for (const auto& [language, v] : stats.pooled_avg_expl_words_raw) {
        pooled["avg_expl_words_raw"][std::string(to_string(language))] = v;
    }
    out["pooled"] = std::move(pooled);
    out["rounding"] = "half-up";
    out["word_rule"] = "unicode-whitespace";
    return out;
}

}  // namespace memexplain
