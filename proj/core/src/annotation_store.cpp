#include "memexplain/annotation_store.hpp"

#include "memexplain/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

namespace memexplain {

json to_json(const AnnotationTask& t) {
    return {{"item_id", t.item_id},
            {"image_ref", t.image_ref},
            {"assigned_label", t.assigned_label},
            {"explanation", t.explanation},
            {"language", std::string(to_string(t.language))},
            {"guideline_ref", t.guideline_ref}};
}

json to_json(const AnnotatorProgress& p) {
    return {{"annotator_id", p.annotator_id},
            {"completed", p.completed},
            {"available", p.available},
            {"total_items", p.total_items},
            {"full_items", p.full_items},
            {"total_ratings", p.total_ratings}};
}

std::vector<AnnotationTask> tasks_from_records(std::span<const ExplainedRecord> records, Language language,
                                               std::string_view guideline_ref) {
    std::vector<AnnotationTask> tasks;
    for (const auto& r : records) {
        const auto it = r.explanations.find(language);
        if (it == r.explanations.end() || it->second.empty()) continue;
        tasks.push_back({r.base.id, r.base.image_ref, r.base.label, it->second, language, std::string(guideline_ref)});
    }
    return tasks;
}

AnnotationStore::AnnotationStore(std::vector<AnnotationTask> items, std::set<std::string> annotators,
                                 std::filesystem::path ratings_path, StoreOptions options)
    : items_(std::move(items)), annotators_(std::move(annotators)), options_(options) {
    options_.bounds.validate();
    if (options_.quota == 0) throw ValidationError("must be positive", "annotation.quota");
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (!item_index_.emplace(items_[i].item_id, i).second) {
            throw RecordError("duplicate annotation item", {items_[i].item_id});
        }
    }
    raters_.resize(items_.size());

    if (std::filesystem::exists(ratings_path)) {
        for (const auto& row : read_jsonl(ratings_path)) {
            AnnotationRating r = rating_from_json(row, options_.bounds);
            if (const auto it = item_index_.find(r.item_id); it != item_index_.end()) {
                raters_[it->second].insert(r.annotator_id);
            } else {
                spdlog::warn("stored rating refers to unknown item {}", r.item_id);
            }
            ratings_.push_back(std::move(r));
        }
        spdlog::info("annotation store: restored {} ratings from {}", ratings_.size(), ratings_path.string());
    }
    if (ratings_path.has_parent_path()) std::filesystem::create_directories(ratings_path.parent_path());
    writer_ = std::make_unique<JsonlAppender>(ratings_path);
}

void AnnotationStore::require_annotator(const std::string& annotator_id) const {
    if (!annotators_.contains(annotator_id)) {
        throw StoreError(StoreError::Kind::unknown_annotator, "unknown annotator", "annotator_id");
    }
}

std::optional<std::size_t> AnnotationStore::next_index(const std::string& annotator_id) const {
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (raters_[i].size() < options_.quota && !raters_[i].contains(annotator_id)) return i;
    }
    return std::nullopt;
}

std::optional<AnnotationTask> AnnotationStore::next_task(const std::string& annotator_id) {
    require_annotator(annotator_id);
    std::lock_guard lock(mutex_);
    const auto index = next_index(annotator_id);
    if (!index) return std::nullopt;
    handed_out_.emplace(annotator_id, *index);
    return items_[*index];
}

void AnnotationStore::submit(const AnnotationRating& rating) {
    try {
        validate_rating(rating, options_.bounds);
    } catch (const ValidationError& e) {
        throw StoreError(StoreError::Kind::invalid, e.what(), e.field());
    }
    require_annotator(rating.annotator_id);
    const auto it = item_index_.find(rating.item_id);
    if (it == item_index_.end()) throw StoreError(StoreError::Kind::unknown_item, "unknown item", "item_id");
    const std::size_t index = it->second;

    std::lock_guard lock(mutex_);
    if (raters_[index].contains(rating.annotator_id)) {
        throw StoreError(StoreError::Kind::duplicate, "item already rated by this annotator", "item_id");
    }
    if (raters_[index].size() >= options_.quota) {
        throw StoreError(StoreError::Kind::quota_full, "item already has its full set of ratings", "item_id");
    }
    if (!handed_out_.contains({rating.annotator_id, index}) && next_index(rating.annotator_id) != index) {
        throw StoreError(StoreError::Kind::unassigned, "item is not assigned to this annotator", "item_id");
    }
    writer_->append(to_json(rating));
    raters_[index].insert(rating.annotator_id);
    handed_out_.erase({rating.annotator_id, index});
    ratings_.push_back(rating);
}

AnnotatorProgress AnnotationStore::progress(const std::string& annotator_id) const {
    require_annotator(annotator_id);
    std::lock_guard lock(mutex_);
    AnnotatorProgress p;
    p.annotator_id = annotator_id;
    p.total_items = items_.size();
    p.total_ratings = ratings_.size();
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const bool mine = raters_[i].contains(annotator_id);
        if (mine) ++p.completed;
        if (raters_[i].size() >= options_.quota) {
            ++p.full_items;
        } else if (!mine) {
            ++p.available;
        }
    }
    return p;
}

std::vector<AnnotationRating> AnnotationStore::export_ratings() const {
    std::vector<AnnotationRating> out;
    {
        std::lock_guard lock(mutex_);
        out = ratings_;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.item_id, a.annotator_id) < std::tie(b.item_id, b.annotator_id);
    });
    return out;
}

const AnnotationTask* AnnotationStore::find_item(std::string_view item_id) const {
    const auto it = item_index_.find(item_id);
    return it == item_index_.end() ? nullptr : &items_[it->second];
}

}  // namespace memexplain
