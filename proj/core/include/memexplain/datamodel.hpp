#pragma once

#include "memexplain/jsonl.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memexplain {

enum class Split { train, dev, test };
enum class Language { ar, en };

inline constexpr Split kAllSplits[] = {Split::train, Split::dev, Split::test};

std::string_view to_string(Split split) noexcept;
std::string_view to_string(Language language) noexcept;
Split parse_split(std::string_view name);
Language parse_language(std::string_view name);

/// Ordered label vocabulary of one dataset.
struct LabelSet {
    std::string name;
    std::vector<std::string> labels;

    bool contains(std::string_view label) const noexcept;
    std::optional<std::size_t> index_of(std::string_view label) const noexcept;

    static LabelSet armeme();
    static LabelSet hateful();
    /// "armeme" or "hateful" (case-insensitive).
    static LabelSet by_name(std::string_view name);

    bool operator==(const LabelSet&) const = default;
};

struct MemeRecord {
    std::string id;
    std::string image_ref;  ///< relative to the dataset root
    std::string text;
    std::string label;
    Split split = Split::train;

    bool operator==(const MemeRecord&) const = default;
};

struct GenerationMeta {
    std::string provider;
    std::string model_version;
    std::string prompt_hash;
    std::string template_id;
    std::string timestamp;

    bool operator==(const GenerationMeta&) const = default;
};

/// A meme record plus whatever explanations have been generated for it.
/// An empty explanation map is a plain, not-yet-enhanced record.
struct ExplainedRecord {
    MemeRecord base;
    std::map<Language, std::string> explanations;
    std::map<Language, GenerationMeta> gen_meta;

    bool has_explanation(Language language) const;

    bool operator==(const ExplainedRecord&) const = default;
};

/// On-disk manifest row. Field names follow the published JSON-lines schema:
/// id, img_path, text, class_label, split, explanation_en/ar, gen_model, gen_timestamp.
json to_json(const ExplainedRecord& record);
ExplainedRecord record_from_json(const json& row);

enum class MissingFilePolicy { warn, error, ignore };

struct LoadOptions {
    MissingFilePolicy missing_files = MissingFilePolicy::warn;
};

struct LoadedDataset {
    LabelSet label_set;
    std::vector<ExplainedRecord> train;
    std::vector<ExplainedRecord> dev;
    std::vector<ExplainedRecord> test;
    /// counts[split][label]; every label of the set is present (possibly 0).
    std::map<Split, std::map<std::string, std::size_t>> counts;
    std::vector<std::string> missing_files;

    const std::vector<ExplainedRecord>& split(Split s) const;
    std::vector<ExplainedRecord>& split(Split s);
    std::size_t split_total(Split s) const { return split(s).size(); }
    std::size_t total() const { return train.size() + dev.size() + test.size(); }
    std::vector<ExplainedRecord> all() const;
};

/// Loads a JSON-lines manifest. An empty root skips image existence checks.
/// Throws RecordError for unknown labels or duplicate ids (listing every
/// offending id) and ValidationError for rows missing required fields.
LoadedDataset load_dataset(const std::filesystem::path& root, const std::filesystem::path& manifest,
                           const LabelSet& label_set, const LoadOptions& options = {});
LoadedDataset dataset_from_records(std::vector<ExplainedRecord> records, const LabelSet& label_set,
                                   const std::filesystem::path& root = {},
                                   const LoadOptions& options = {});

void save_dataset(const std::filesystem::path& manifest, std::span<const ExplainedRecord> records);

using WordCounter = std::function<std::size_t(std::string_view)>;

/// Half-up rounding used for every integer average.
std::size_t round_half_up(double value);

struct CorpusStats {
    std::size_t record_count = 0;
    std::size_t total_words = 0;
    std::size_t avg_words = 0;
    double avg_words_raw = 0.0;
    std::map<Language, std::size_t> total_expl_words;
    std::map<Language, std::size_t> avg_expl_words;
    std::map<Language, double> avg_expl_words_raw;
};

/// Word statistics over one record collection. Explanation entries appear
/// only for languages at least one record carries.
CorpusStats corpus_stats(std::span<const ExplainedRecord> records, const WordCounter& counter = {});

/// Per-split statistics plus a total row. The total row sums the counts and
/// averages the per-split averages (unweighted), which is how the published
/// descriptive-statistics tables present their totals; the record-weighted
/// pooled averages are kept alongside.
struct DatasetStats {
    std::map<Split, CorpusStats> splits;
    CorpusStats total;
    double pooled_avg_words_raw = 0.0;
    std::map<Language, double> pooled_avg_expl_words_raw;
};

DatasetStats dataset_stats(const LoadedDataset& dataset, const WordCounter& counter = {});

json to_json(const CorpusStats& stats);
json to_json(const DatasetStats& stats);

}  // namespace memexplain
