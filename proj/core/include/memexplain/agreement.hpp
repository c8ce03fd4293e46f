#pragma once

#include "memexplain/jsonl.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memexplain {

enum class LikertMetric { faithfulness, clarity, plausibility, informativeness };

/// Report column order.
inline constexpr std::array<LikertMetric, 4> kLikertMetrics{LikertMetric::faithfulness, LikertMetric::clarity,
                                                            LikertMetric::plausibility,
                                                            LikertMetric::informativeness};

std::string_view to_string(LikertMetric metric) noexcept;
LikertMetric parse_likert_metric(std::string_view name);

struct ScaleBounds {
    int lower = 1;
    int upper = 5;
    void validate() const;
};

struct AnnotationRating {
    std::string item_id;
    std::string annotator_id;
    std::map<LikertMetric, int> scores;

    bool operator==(const AnnotationRating&) const = default;
};

json to_json(const AnnotationRating& rating);
/// Throws ValidationError naming the offending field ("scores.clarity", ...)
/// for missing or out-of-range scores.
AnnotationRating rating_from_json(const json& j, const ScaleBounds& bounds = {});
void validate_rating(const AnnotationRating& rating, const ScaleBounds& bounds = {});

/// Variance expected under complete disagreement:
/// 0.5 (X_U^2 + X_L^2) - (0.5 (X_U + X_L))^2.
double max_variance(const ScaleBounds& bounds);

enum class VarianceDenominator { sample, population };

/// 1 - S^2 / max_variance, not truncated below zero. S^2 is the sample
/// variance (n - 1) by default. Needs at least two ratings.
double rwg_star(std::span<const int> ratings, const ScaleBounds& bounds = {},
                VarianceDenominator denominator = VarianceDenominator::sample);

struct AgreementOptions {
    ScaleBounds bounds;
    std::size_t annotators_per_item = 3;
    VarianceDenominator denominator = VarianceDenominator::sample;
};

struct MetricAgreement {
    double mean = 0.0;      ///< mean over complete items of the item mean
    double rwg_mean = 0.0;  ///< mean r*_wg over complete items
    std::size_t negative_rwg = 0;
};

struct AgreementReport {
    std::map<LikertMetric, MetricAgreement> metrics;
    std::size_t items = 0;
    std::size_t complete_items = 0;
    std::size_t ratings = 0;
    std::vector<std::string> incomplete_items;
    AgreementOptions options;
};

json to_json(const AgreementReport& report);

/// Likert means and r*_wg per metric. Only items with exactly the configured
/// annotator count enter the averages; the rest are listed as incomplete.
/// Throws ValidationError on empty input, a duplicate (item, annotator) pair
/// or when no item is complete.
AgreementReport aggregate(std::span<const AnnotationRating> ratings, const AgreementOptions& options = {});

}  // namespace memexplain
