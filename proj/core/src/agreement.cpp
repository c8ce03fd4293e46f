#include "memexplain/agreement.hpp"

#include "memexplain/error.hpp"

#include <set>

namespace memexplain {

std::string_view to_string(LikertMetric metric) noexcept {
    switch (metric) {
        case LikertMetric::faithfulness: return "faithfulness";
        case LikertMetric::clarity: return "clarity";
        case LikertMetric::plausibility: return "plausibility";
        case LikertMetric::informativeness: return "informativeness";
    }
    return "faithfulness";
}

LikertMetric parse_likert_metric(std::string_view name) {
    for (LikertMetric m : kLikertMetrics) {
        if (to_string(m) == name) return m;
    }
    throw ValidationError("unknown metric '" + std::string(name) + "'", "scores");
}

void ScaleBounds::validate() const {
    if (lower >= upper) throw ValidationError("lower bound must be below upper bound", "bounds");
}

json to_json(const AnnotationRating& r) {
    json scores = json::object();
    for (const auto& [metric, value] : r.scores) scores[std::string(to_string(metric))] = value;
    return {{"item_id", r.item_id}, {"annotator_id", r.annotator_id}, {"scores", std::move(scores)}};
}

void validate_rating(const AnnotationRating& r, const ScaleBounds& bounds) {
    if (r.item_id.empty()) throw ValidationError("must not be empty", "item_id");
    if (r.annotator_id.empty()) throw ValidationError("must not be empty", "annotator_id");
    for (LikertMetric m : kLikertMetrics) {
        const std::string field = "scores." + std::string(to_string(m));
        const auto it = r.scores.find(m);
        if (it == r.scores.end()) throw ValidationError("missing", field);
        if (it->second < bounds.lower || it->second > bounds.upper) {
            throw ValidationError("score " + std::to_string(it->second) + " outside [" +
                                      std::to_string(bounds.lower) + ", " + std::to_string(bounds.upper) + "]",
                                  field);
        }
    }
}

AnnotationRating rating_from_json(const json& j, const ScaleBounds& bounds) {
    if (!j.is_object()) throw ValidationError("rating must be a JSON object");
    AnnotationRating r;
    for (const char* key : {"item_id", "annotator_id"}) {
        if (!j.contains(key) || !j[key].is_string()) throw ValidationError("missing or not a string", key);
    }
    r.item_id = j["item_id"].get<std::string>();
    r.annotator_id = j["annotator_id"].get<std::string>();
    if (!j.contains("scores") || !j["scores"].is_object()) throw ValidationError("missing or not an object", "scores");
    for (const auto& [name, value] : j["scores"].items()) {
        const LikertMetric m = parse_likert_metric(name);
        if (!value.is_number_integer()) throw ValidationError("must be an integer", "scores." + name);
        r.scores[m] = value.get<int>();
    }
    validate_rating(r, bounds);
    return r;
}

double max_variance(const ScaleBounds& bounds) {
    bounds.validate();
    const double u = bounds.upper;
    const double l = bounds.lower;
    const double mid = 0.5 * (u + l);
    return 0.5 * (u * u + l * l) - mid * mid;
}

double rwg_star(std::span<const int> ratings, const ScaleBounds& bounds, VarianceDenominator denominator) {
    if (ratings.size() < 2) throw ValidationError("r*_wg needs at least two ratings");
    double mean = 0.0;
    for (int x : ratings) {
        if (x < bounds.lower || x > bounds.upper) throw ValidationError("rating outside the scale bounds");
        mean += x;
    }
    const double n = static_cast<double>(ratings.size());
    mean /= n;
    double ss = 0.0;
    for (int x : ratings) ss += (x - mean) * (x - mean);
    const double variance = ss / (denominator == VarianceDenominator::sample ? n - 1.0 : n);
    return 1.0 - variance / max_variance(bounds);
}

json to_json(const AgreementReport& report) {
    json columns = json::array();
    json means = json::object();
    json rwg = json::object();
    json negative = json::object();
    for (LikertMetric m : kLikertMetrics) {
        const std::string name(to_string(m));
        const auto& a = report.metrics.at(m);
        columns.push_back(name);
        means[name] = a.mean;
        rwg[name] = a.rwg_mean;
        negative[name] = a.negative_rwg;
    }
    return {{"columns", std::move(columns)},
            {"likert_mean", std::move(means)},
            {"rwg_star_mean", std::move(rwg)},
            {"rwg_star_negative_items", std::move(negative)},
            {"items", report.items},
            {"complete_items", report.complete_items},
            {"ratings", report.ratings},
            {"incomplete_items", report.incomplete_items},
            {"annotators_per_item", report.options.annotators_per_item},
            {"bounds", {report.options.bounds.lower, report.options.bounds.upper}},
            {"variance", report.options.denominator == VarianceDenominator::sample ? "sample" : "population"}};
}

AgreementReport aggregate(std::span<const AnnotationRating> ratings, const AgreementOptions& options) {
    if (ratings.empty()) throw ValidationError("no ratings to aggregate");
    options.bounds.validate();
    if (options.annotators_per_item < 2) {
        throw ValidationError("must be at least 2", "agreement.annotators_per_item");
    }

    std::map<std::string, std::vector<const AnnotationRating*>> by_item;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : ratings) {
        validate_rating(r, options.bounds);
        if (!seen.emplace(r.item_id, r.annotator_id).second) {
            throw RecordError("duplicate rating for (item, annotator)", {r.item_id + "/" + r.annotator_id});
        }
        by_item[r.item_id].push_back(&r);
    }

    AgreementReport report;
    report.options = options;
    report.items = by_item.size();
    report.ratings = ratings.size();
    std::map<LikertMetric, double> mean_sum, rwg_sum;
    for (const auto& [item, group] : by_item) {
        if (group.size() != options.annotators_per_item) {
            report.incomplete_items.push_back(item);
            continue;
        }
        ++report.complete_items;
        for (LikertMetric m : kLikertMetrics) {
            std::vector<int> values;
            values.reserve(group.size());
            double sum = 0.0;
            for (const auto* r : group) {
                values.push_back(r->scores.at(m));
                sum += values.back();
            }
            mean_sum[m] += sum / static_cast<double>(values.size());
            const double rwg = rwg_star(values, options.bounds, options.denominator);
            rwg_sum[m] += rwg;
            if (rwg < 0.0) ++report.metrics[m].negative_rwg;
        }
    }
    if (report.complete_items == 0) {
        throw ValidationError("no item has " + std::to_string(options.annotators_per_item) + " ratings");
    }
    const double n = static_cast<double>(report.complete_items);
    for (LikertMetric m : kLikertMetrics) {
        report.metrics[m].mean = mean_sum[m] / n;
        report.metrics[m].rwg_mean = rwg_sum[m] / n;
    }
    return report;
}

}  // namespace memexplain
