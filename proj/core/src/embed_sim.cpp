#include "memexplain/embed_sim.hpp"

#include "memexplain/error.hpp"
#include "memexplain/jsonl.hpp"
#include "memexplain/text.hpp"

#include <cmath>
#include <limits>

namespace memexplain {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> embed_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : text::metric_tokens(text)) out.push_back(text::to_lower(t));
    return out;
}

}  // namespace

HashToyEmbedder::HashToyEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw ValidationError("embedding dimension must be positive", "embedder.dimension");
}

std::vector<Vector> HashToyEmbedder::embed(std::string_view text) const {
    std::vector<Vector> out;
    for (const auto& token : embed_tokens(text)) {
        std::uint64_t state = fnv1a(token) ^ seed_;
        Vector v(dimension_);
        for (auto& x : v) {
            x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
        }
        out.push_back(std::move(v));
    }
    return out;
}

OrthogonalToyEmbedder::OrthogonalToyEmbedder(std::vector<std::string> vocabulary) {
    for (auto& word : vocabulary) index_.emplace(text::to_lower(word), index_.size());
}

OrthogonalToyEmbedder OrthogonalToyEmbedder::from_texts(std::span<const std::string> texts) {
    std::vector<std::string> vocab;
    for (const auto& t : texts) {
        for (auto& token : embed_tokens(t)) vocab.push_back(std::move(token));
    }
    return OrthogonalToyEmbedder(std::move(vocab));
}

std::vector<Vector> OrthogonalToyEmbedder::embed(std::string_view text) const {
    std::vector<Vector> out;
    for (const auto& token : embed_tokens(text)) {
        const auto it = index_.find(token);
        if (it == index_.end()) throw ValidationError("token '" + token + "' outside the toy vocabulary");
        Vector v(index_.size(), 0.0);
        v[it->second] = 1.0;
        out.push_back(std::move(v));
    }
    return out;
}

PrecomputedEmbedder::PrecomputedEmbedder(const std::filesystem::path& jsonl, std::string model_name)
    : model_name_(std::move(model_name)) {
    std::size_t dim = 0;
    for (const auto& row : read_jsonl(jsonl)) {
        auto vectors = row.at("vectors").get<std::vector<Vector>>();
        for (const auto& v : vectors) {
            if (dim == 0) dim = v.size();
            if (v.size() != dim || dim == 0) {
                throw ValidationError("inconsistent embedding dimensionality in " + jsonl.string());
            }
        }
        table_.insert_or_assign(row.at("text").get<std::string>(), std::move(vectors));
    }
}

std::vector<Vector> PrecomputedEmbedder::embed(std::string_view text) const {
    const auto it = table_.find(text);
    if (it == table_.end()) throw ValidationError("no precomputed embeddings for text: " + std::string(text.substr(0, 60)));
    return it->second;
}

double cosine(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ValidationError("embedding dimensionality mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

SimilarityScore embed_sim_pair(std::span<const Vector> candidate, std::span<const Vector> reference) {
    if (candidate.empty() || reference.empty()) throw ValidationError("text has no tokens after tokenization");
    std::vector<double> best_for_candidate(candidate.size(), -std::numeric_limits<double>::infinity());
    std::vector<double> best_for_reference(reference.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        for (std::size_t j = 0; j < reference.size(); ++j) {
            const double s = cosine(candidate[i], reference[j]);
            best_for_candidate[i] = std::max(best_for_candidate[i], s);
            best_for_reference[j] = std::max(best_for_reference[j], s);
        }
    }
    SimilarityScore score;
    for (double s : best_for_candidate) score.precision += s;
    for (double s : best_for_reference) score.recall += s;
    score.precision /= static_cast<double>(candidate.size());
    score.recall /= static_cast<double>(reference.size());
    const double denom = score.precision + score.recall;
    score.f1 = denom > 0.0 ? 2.0 * score.precision * score.recall / denom : 0.0;
    return score;
}

SimilarityScore embed_sim(std::span<const std::string> candidates, std::span<const std::string> references,
                          const TokenEmbedder& embedder) {
    if (candidates.size() != references.size()) throw ValidationError("candidates and references differ in length");
    if (candidates.empty()) throw ValidationError("empty corpus");
    SimilarityScore mean;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto c = embedder.embed(candidates[i]);
        const auto r = embedder.embed(references[i]);
        const auto s = embed_sim_pair(c, r);
        mean.precision += s.precision;
        mean.recall += s.recall;
        mean.f1 += s.f1;
    }
    const double n = static_cast<double>(candidates.size());
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    return mean;
}

double embed_sim_f1(std::span<const std::string> candidates, std::span<const std::string> references,
                    const TokenEmbedder& embedder) {
    return embed_sim(candidates, references, embedder).f1;
}

}  // namespace memexplain
