#include "memexplain/label_extraction.hpp"

#include <algorithm>
#include <cctype>

namespace memexplain {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Index of the longest label that prefixes `rest`, or npos.
std::size_t longest_prefix_label(std::string_view rest, const std::vector<std::string>& lowered_labels) {
    std::size_t best = std::string::npos;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < lowered_labels.size(); ++i) {
        const auto& label = lowered_labels[i];
        if (label.size() > best_len && rest.substr(0, label.size()) == label) {
            best = i;
            best_len = label.size();
        }
    }
    return best;
}

}  // namespace

LabelExtraction extract_label(std::string_view response, const LabelSet& labels, std::string_view fallback) {
    const std::string lowered = ascii_lower(response);
    std::vector<std::string> lowered_labels;
    lowered_labels.reserve(labels.labels.size());
    for (const auto& l : labels.labels) lowered_labels.push_back(ascii_lower(l));

    constexpr std::string_view marker = "label:";
    for (auto at = lowered.find(marker); at != std::string::npos; at = lowered.find(marker, at + 1)) {
        std::size_t pos = at + marker.size();
        while (pos < lowered.size() &&
               (std::isspace(static_cast<unsigned char>(lowered[pos])) || lowered[pos] == '(' ||
                lowered[pos] == '"' || lowered[pos] == '\'' || lowered[pos] == '*' || lowered[pos] == '[')) {
            ++pos;
        }
        const auto idx = longest_prefix_label(std::string_view(lowered).substr(pos), lowered_labels);
        if (idx != std::string::npos) return {labels.labels[idx], true};
    }

    std::size_t best = std::string::npos;
    std::size_t best_pos = std::string::npos;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < lowered_labels.size(); ++i) {
        const auto pos = lowered.find(lowered_labels[i]);
        if (pos == std::string::npos) continue;
        if (pos < best_pos || (pos == best_pos && lowered_labels[i].size() > best_len)) {
            best = i;
            best_pos = pos;
            best_len = lowered_labels[i].size();
        }
    }
    if (best != std::string::npos) return {labels.labels[best], true};
    return {std::string(fallback), false};
}

LabelExtraction extract_label(std::string_view response, const LabelSet& labels) {
    return extract_label(response, labels, labels.labels.empty() ? std::string_view{} : labels.labels.front());
}

}  // namespace memexplain
