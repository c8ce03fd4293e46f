#pragma once

#include "memexplain/datamodel.hpp"

#include <span>
#include <string>
#include <vector>

namespace memexplain {

struct ClassScores {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ClassificationMetrics {
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassScores> per_class;  ///< label-set order
};

/// Per-class precision/recall/F1 with 0/0 taken as 0. Macro-F1 averages over
/// every label of the set, so classes absent from the gold data count as 0.
/// Weighted-F1 weights by gold support. Throws ValidationError on length
/// mismatch or a gold label outside the set.
ClassificationMetrics classification_metrics(std::span<const std::string> predictions,
                                             std::span<const std::string> golds, const LabelSet& labels);

}  // namespace memexplain
