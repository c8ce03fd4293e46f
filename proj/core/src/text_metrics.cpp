#include "memexplain/text_metrics.hpp"

#include "memexplain/error.hpp"
#include "memexplain/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace memexplain {

Tokenizer default_metric_tokenizer() {
    return [](std::string_view s) { return text::metric_tokens(s); };
}

std::string bleu_variant(const BleuOptions& options) {
    std::string v = options.sentence_mean ? "sentence-mean" : "corpus";
    v += "-bleu" + std::to_string(options.max_order);
    v += "-add-epsilon-smoothing";
    return v;
}

namespace {

void check_corpus(std::size_t candidates, std::size_t references) {
    if (candidates != references) {
        throw ValidationError("candidates (" + std::to_string(candidates) + ") and references (" +
                              std::to_string(references) + ") differ in length");
    }
    if (candidates == 0) throw ValidationError("empty corpus");
}

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts ngrams(const Tokens& tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::vector<std::string_view> gram;
        gram.reserve(n);
        for (std::size_t k = 0; k < n; ++k) gram.emplace_back(tokens[i + k]);
        ++counts[gram];
    }
    return counts;
}

struct Pooled {
    std::vector<std::size_t> numerators;
    std::vector<std::size_t> denominators;
    std::size_t hyp_length = 0;
    std::size_t ref_length = 0;
};

void accumulate(Pooled& pooled, const Tokens& candidate, const Tokens& reference, std::size_t max_order) {
    for (std::size_t n = 1; n <= max_order; ++n) {
        const auto hyp = ngrams(candidate, n);
        const auto ref = ngrams(reference, n);
        std::size_t clipped = 0;
        std::size_t total = 0;
        for (const auto& [gram, count] : hyp) {
            total += count;
            const auto it = ref.find(gram);
            if (it != ref.end()) clipped += std::min(count, it->second);
        }
        pooled.numerators[n - 1] += clipped;
        // A candidate shorter than n contributes a denominator of 1.
        pooled.denominators[n - 1] += std::max<std::size_t>(1, total);
    }
    pooled.hyp_length += candidate.size();
    pooled.ref_length += reference.size();
}

double score(const Pooled& pooled, const BleuOptions& options) {
    if (pooled.numerators.empty() || pooled.numerators[0] == 0) return 0.0;
    double bp = 1.0;
    if (pooled.hyp_length == 0) {
        bp = 0.0;
    } else if (pooled.hyp_length < pooled.ref_length) {
        bp = std::exp(1.0 - static_cast<double>(pooled.ref_length) / static_cast<double>(pooled.hyp_length));
    }
    const double weight = 1.0 / static_cast<double>(options.max_order);
    double log_sum = 0.0;
    for (std::size_t n = 0; n < options.max_order; ++n) {
        const double numerator = pooled.numerators[n] == 0 ? options.smoothing_epsilon
                                                           : static_cast<double>(pooled.numerators[n]);
        const double p = numerator / static_cast<double>(pooled.denominators[n]);
        if (p > 0.0) log_sum += weight * std::log(p);
    }
    return bp * std::exp(log_sum);
}

}  // namespace

double bleu_tokens(std::span<const Tokens> candidates, std::span<const Tokens> references,
                   const BleuOptions& options) {
    check_corpus(candidates.size(), references.size());
    if (options.max_order == 0) throw ValidationError("max_order must be positive", "bleu.max_order");
    if (options.sentence_mean) {
        double sum = 0.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            Pooled pooled{std::vector<std::size_t>(options.max_order), std::vector<std::size_t>(options.max_order)};
            accumulate(pooled, candidates[i], references[i], options.max_order);
            sum += score(pooled, options);
        }
        return sum / static_cast<double>(candidates.size());
    }
    Pooled pooled{std::vector<std::size_t>(options.max_order), std::vector<std::size_t>(options.max_order)};
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        accumulate(pooled, candidates[i], references[i], options.max_order);
    }
    return score(pooled, options);
}

double bleu(std::span<const std::string> candidates, std::span<const std::string> references,
            const Tokenizer& tokenizer, const BleuOptions& options) {
    check_corpus(candidates.size(), references.size());
    const Tokenizer tok = tokenizer ? tokenizer : default_metric_tokenizer();
    std::vector<Tokens> c, r;
    c.reserve(candidates.size());
    r.reserve(references.size());
    for (const auto& s : candidates) c.push_back(tok(s));
    for (const auto& s : references) r.push_back(tok(s));
    return bleu_tokens(c, r, options);
}

MeteorOptions meteor_options_for(Language language) {
    MeteorOptions options;
    options.use_stemmer = language == Language::en;
    return options;
}

namespace {

using Enumerated = std::vector<std::pair<std::size_t, std::string>>;
using Alignment = std::vector<std::pair<std::size_t, std::size_t>>;

// Each candidate word, scanned from the end, takes the latest unused
// reference position holding the same form.
void match_stage(Enumerated& hyp, Enumerated& ref, Alignment& matches) {
    std::unordered_map<std::string, std::vector<std::size_t>> positions;
    for (std::size_t j = 0; j < ref.size(); ++j) positions[ref[j].second].push_back(j);
    std::vector<bool> hyp_used(hyp.size(), false), ref_used(ref.size(), false);
    for (std::size_t ii = hyp.size(); ii-- > 0;) {
        auto it = positions.find(hyp[ii].second);
        if (it == positions.end() || it->second.empty()) continue;
        const std::size_t j = it->second.back();
        it->second.pop_back();
        hyp_used[ii] = true;
        ref_used[j] = true;
        matches.emplace_back(hyp[ii].first, ref[j].first);
    }
    Enumerated hyp_left, ref_left;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
        if (!hyp_used[i]) hyp_left.push_back(std::move(hyp[i]));
    }
    for (std::size_t j = 0; j < ref.size(); ++j) {
        if (!ref_used[j]) ref_left.push_back(std::move(ref[j]));
    }
    hyp = std::move(hyp_left);
    ref = std::move(ref_left);
}

std::size_t count_chunks(const Alignment& matches) {
    std::size_t chunks = 1;
    for (std::size_t i = 0; i + 1 < matches.size(); ++i) {
        const bool adjacent = matches[i + 1].first == matches[i].first + 1 &&
                              matches[i + 1].second == matches[i].second + 1;
        if (!adjacent) ++chunks;
    }
    return chunks;
}

}  // namespace

double meteor_sentence(const Tokens& candidate, const Tokens& reference, const MeteorOptions& options) {
    Enumerated hyp, ref;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        hyp.emplace_back(i, options.lowercase ? text::to_lower(candidate[i]) : candidate[i]);
    }
    for (std::size_t j = 0; j < reference.size(); ++j) {
        ref.emplace_back(j, options.lowercase ? text::to_lower(reference[j]) : reference[j]);
    }
    const std::size_t hyp_len = hyp.size();
    const std::size_t ref_len = ref.size();

    Alignment matches;
    match_stage(hyp, ref, matches);
    if (options.use_stemmer) {
        const PorterStemmer stemmer(options.stemmer_mode);
        Alignment stem_matches;
        Enumerated hyp_stems, ref_stems;
        for (const auto& [i, w] : hyp) hyp_stems.emplace_back(i, stemmer.stem(w));
        for (const auto& [j, w] : ref) ref_stems.emplace_back(j, stemmer.stem(w));
        match_stage(hyp_stems, ref_stems, stem_matches);
        matches.insert(matches.end(), stem_matches.begin(), stem_matches.end());
    }
    std::stable_sort(matches.begin(), matches.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    const std::size_t m = matches.size();
    if (m == 0 || hyp_len == 0 || ref_len == 0) return 0.0;
    const double precision = static_cast<double>(m) / static_cast<double>(hyp_len);
    const double recall = static_cast<double>(m) / static_cast<double>(ref_len);
    const double fmean = precision * recall / (options.alpha * precision + (1.0 - options.alpha) * recall);
    const double frag = static_cast<double>(count_chunks(matches)) / static_cast<double>(m);
    const double penalty = options.gamma * std::pow(frag, options.beta);
    return (1.0 - penalty) * fmean;
}

double meteor(std::span<const std::string> candidates, std::span<const std::string> references,
              const MeteorOptions& options, const Tokenizer& tokenizer) {
    check_corpus(candidates.size(), references.size());
    const Tokenizer tok = tokenizer ? tokenizer : default_metric_tokenizer();
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        sum += meteor_sentence(tok(candidates[i]), tok(references[i]), options);
    }
    return sum / static_cast<double>(candidates.size());
}

double meteor(std::span<const std::string> candidates, std::span<const std::string> references, Language language,
              const Tokenizer& tokenizer) {
    return meteor(candidates, references, meteor_options_for(language), tokenizer);
}

}  // namespace memexplain
