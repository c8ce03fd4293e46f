#pragma once

#include "memexplain/agreement.hpp"
#include "memexplain/datamodel.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace memexplain {

/// One (meme, label, explanation) item shown to annotators.
struct AnnotationTask {
    std::string item_id;
    std::string image_ref;
    std::string assigned_label;
    std::string explanation;
    Language language = Language::en;
    std::string guideline_ref;
};

json to_json(const AnnotationTask& task);

/// Items for one explanation language, in record order. Records without an
/// explanation in that language are skipped.
std::vector<AnnotationTask> tasks_from_records(std::span<const ExplainedRecord> records, Language language,
                                               std::string_view guideline_ref);

class StoreError : public std::runtime_error {
public:
    enum class Kind { invalid, unknown_annotator, unknown_item, unassigned, duplicate, quota_full };

    StoreError(Kind kind, const std::string& message, std::string field = {})
        : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

    Kind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    Kind kind_;
    std::string field_;
};

struct StoreOptions {
    std::size_t quota = 3;  ///< annotators per item
    ScaleBounds bounds;
};

struct AnnotatorProgress {
    std::string annotator_id;
    std::size_t completed = 0;   ///< ratings by this annotator
    std::size_t available = 0;   ///< items this annotator could still rate
    std::size_t total_items = 0;
    std::size_t full_items = 0;  ///< items at quota
    std::size_t total_ratings = 0;
};

json to_json(const AnnotatorProgress& progress);

/// Append-only JSON-lines rating store. The file is the source of truth; the
/// in-memory index is rebuilt from it on construction. Thread-safe.
class AnnotationStore {
public:
    AnnotationStore(std::vector<AnnotationTask> items, std::set<std::string> annotators,
                    std::filesystem::path ratings_path, StoreOptions options = {});

    /// Lowest-index item the annotator has not rated and that is below quota;
    /// nullopt when none remain. Asking again before submitting returns the
    /// same item.
    std::optional<AnnotationTask> next_task(const std::string& annotator_id);

    /// Validates and persists. The item must have been handed out to this
    /// annotator by next_task (or be the item next_task would return).
    void submit(const AnnotationRating& rating);

    AnnotatorProgress progress(const std::string& annotator_id) const;

    /// Persisted ratings ordered by (item_id, annotator_id).
    std::vector<AnnotationRating> export_ratings() const;

    const AnnotationTask* find_item(std::string_view item_id) const;
    const StoreOptions& options() const noexcept { return options_; }
    bool is_annotator(const std::string& annotator_id) const { return annotators_.contains(annotator_id); }

private:
    void require_annotator(const std::string& annotator_id) const;
    std::optional<std::size_t> next_index(const std::string& annotator_id) const;

    std::vector<AnnotationTask> items_;
    std::map<std::string, std::size_t, std::less<>> item_index_;
    std::set<std::string> annotators_;
    StoreOptions options_;

    mutable std::mutex mutex_;
    std::vector<std::set<std::string>> raters_;  // per item
    std::set<std::pair<std::string, std::size_t>> handed_out_;
    std::vector<AnnotationRating> ratings_;
    std::unique_ptr<JsonlAppender> writer_;
};

}  // namespace memexplain
