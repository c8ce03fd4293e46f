#pragma once

#include "memexplain/datamodel.hpp"

#include <string>
#include <string_view>

namespace memexplain {

struct LabelExtraction {
    std::string label;
    bool parsed = false;  ///< false when the fallback label was substituted
};

/// Recovers a predicted label from generated text.
///
/// 1. Case-insensitive "Label:" marker, then the longest label of the set that
///    prefixes the remainder ("Not propaganda" wins over "Propaganda").
/// 2. Otherwise the earliest label occurrence anywhere in the text, longest
///    label first at equal positions.
/// 3. Otherwise `fallback` with parsed = false.
LabelExtraction extract_label(std::string_view response, const LabelSet& labels, std::string_view fallback);

/// Fallback defaults to the first label of the set, the majority class of
/// both bundled label sets.
LabelExtraction extract_label(std::string_view response, const LabelSet& labels);

}  // namespace memexplain
