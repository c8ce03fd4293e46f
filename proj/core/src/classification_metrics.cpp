#include "memexplain/classification_metrics.hpp"

#include "memexplain/error.hpp"

namespace memexplain {

ClassificationMetrics classification_metrics(std::span<const std::string> predictions,
                                             std::span<const std::string> golds, const LabelSet& labels) {
    if (predictions.size() != golds.size()) {
        throw ValidationError("predictions (" + std::to_string(predictions.size()) + ") and golds (" +
                              std::to_string(golds.size()) + ") differ in length");
    }
    const std::size_t k = labels.labels.size();
    std::vector<std::size_t> tp(k, 0), fp(k, 0), support(k, 0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const auto g = labels.index_of(golds[i]);
        if (!g) throw ValidationError("gold label '" + golds[i] + "' is not in the label set");
        ++support[*g];
        const auto p = labels.index_of(predictions[i]);
        if (p && *p == *g) {
            ++tp[*g];
            ++correct;
        } else if (p) {
            ++fp[*p];
        }
    }
    ClassificationMetrics m;
    if (golds.empty()) {
        for (const auto& label : labels.labels) m.per_class.push_back({label});
        return m;
    }
    const double n = static_cast<double>(golds.size());
    m.accuracy = static_cast<double>(correct) / n;
    for (std::size_t c = 0; c < k; ++c) {
        ClassScores s;
        s.label = labels.labels[c];
        s.support = support[c];
        const std::size_t predicted = tp[c] + fp[c];
        s.precision = predicted ? static_cast<double>(tp[c]) / static_cast<double>(predicted) : 0.0;
        s.recall = support[c] ? static_cast<double>(tp[c]) / static_cast<double>(support[c]) : 0.0;
        s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
        m.macro_f1 += s.f1;
        m.weighted_f1 += s.f1 * static_cast<double>(support[c]) / n;
        m.per_class.push_back(std::move(s));
    }
    if (k > 0) m.macro_f1 /= static_cast<double>(k);
    return m;
}

}  // namespace memexplain
