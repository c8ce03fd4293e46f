#pragma once

#include "memexplain/datamodel.hpp"
#include "memexplain/porter_stemmer.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memexplain {

using Tokens = std::vector<std::string>;
using Tokenizer = std::function<Tokens(std::string_view)>;

/// Whitespace + Unicode punctuation tokenizer shared by BLEU and METEOR.
Tokenizer default_metric_tokenizer();

struct BleuOptions {
    std::size_t max_order = 4;
    /// Added to the numerator of any zero n-gram match count.
    double smoothing_epsilon = 1e-9;
    /// Mean of per-pair sentence BLEU instead of pooled corpus counts.
    bool sentence_mean = false;
};

/// Short identifier of the BLEU variant, recorded in metric reports.
std::string bleu_variant(const BleuOptions& options);

/// BLEU over pre-tokenized pairs (single reference per candidate).
double bleu_tokens(std::span<const Tokens> candidates, std::span<const Tokens> references,
                   const BleuOptions& options = {});

/// Corpus BLEU with brevity penalty and add-epsilon smoothing. Throws
/// ValidationError on an empty corpus or mismatched lengths.
double bleu(std::span<const std::string> candidates, std::span<const std::string> references,
            const Tokenizer& tokenizer = {}, const BleuOptions& options = {});

struct MeteorOptions {
    double alpha = 0.9;
    double beta = 3.0;
    double gamma = 0.5;
    bool lowercase = true;
    /// Stem-match stage after exact matching. Disabled for languages without
    /// a stemmer (Arabic runs exact match only).
    bool use_stemmer = true;
    PorterStemmer::Mode stemmer_mode = PorterStemmer::Mode::nltk_extensions;
};

MeteorOptions meteor_options_for(Language language);

/// Sentence METEOR: exact then stem unigram alignment, harmonic mean weighted
/// by alpha, fragmentation penalty gamma * (chunks / matches)^beta.
double meteor_sentence(const Tokens& candidate, const Tokens& reference, const MeteorOptions& options = {});

/// Mean sentence METEOR over the corpus.
double meteor(std::span<const std::string> candidates, std::span<const std::string> references, Language language,
              const Tokenizer& tokenizer = {});
double meteor(std::span<const std::string> candidates, std::span<const std::string> references,
              const MeteorOptions& options, const Tokenizer& tokenizer = {});

}  // namespace memexplain
