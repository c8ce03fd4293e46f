#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memexplain {

using Vector = std::vector<double>;

/// Supplies one embedding per token of a text. All vectors produced by one
/// embedder share a dimensionality.
class TokenEmbedder {
public:
    virtual ~TokenEmbedder() = default;
    virtual std::vector<Vector> embed(std::string_view text) const = 0;
    virtual std::string name() const = 0;
};

/// Deterministic pseudo-random vectors with components in [0, 1), one per
/// distinct lowercased token. Distinct tokens get different but positively
/// correlated vectors.
class HashToyEmbedder final : public TokenEmbedder {
public:
    explicit HashToyEmbedder(std::size_t dimension = 32, std::uint64_t seed = 0x5eed);
    std::vector<Vector> embed(std::string_view text) const override;
    std::string name() const override { return "toy-hash-" + std::to_string(dimension_); }

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

/// Each vocabulary word is its own basis vector, so distinct words have
/// cosine 0. Tokens outside the vocabulary are rejected.
class OrthogonalToyEmbedder final : public TokenEmbedder {
public:
    explicit OrthogonalToyEmbedder(std::vector<std::string> vocabulary);
    static OrthogonalToyEmbedder from_texts(std::span<const std::string> texts);

    std::vector<Vector> embed(std::string_view text) const override;
    std::string name() const override { return "toy-orthogonal"; }

private:
    std::map<std::string, std::size_t> index_;
};

/// Token embeddings exported by an external encoder (one JSON-lines row per
/// text: {"text": str, "vectors": [[float...]...]}). Lets production runs use
/// a language-specific encoder without linking one in.
class PrecomputedEmbedder final : public TokenEmbedder {
public:
    explicit PrecomputedEmbedder(const std::filesystem::path& jsonl, std::string model_name = "precomputed");
    std::vector<Vector> embed(std::string_view text) const override;
    std::string name() const override { return model_name_; }

private:
    std::map<std::string, std::vector<Vector>, std::less<>> table_;
    std::string model_name_;
};

struct SimilarityScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

double cosine(const Vector& a, const Vector& b);

/// Greedy matching: recall averages, over reference tokens, the best cosine
/// against any candidate token; precision is the mirror image.
SimilarityScore embed_sim_pair(std::span<const Vector> candidate, std::span<const Vector> reference);

/// Mean per-pair similarity F1 (plain variant: no IDF weighting, no baseline
/// rescaling). Throws ValidationError on an empty corpus, mismatched lengths
/// or a text with no tokens.
SimilarityScore embed_sim(std::span<const std::string> candidates, std::span<const std::string> references,
                          const TokenEmbedder& embedder);
double embed_sim_f1(std::span<const std::string> candidates, std::span<const std::string> references,
                    const TokenEmbedder& embedder);

}  // namespace memexplain
