#include "memexplain/explain_gen.hpp"

#include "memexplain/error.hpp"
#include "memexplain/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <atomic>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace memexplain {

namespace fs = std::filesystem;

namespace {

constexpr const char* kArmemeArabic = R"tmpl(You are a Propaganda Image Detection Expert. A human expert has already classified the image as {class_label}. 
Do not change or re-identify the classified label of the image.
First, analyze the image's visual elements (objects, symbols, color usage, composition) 
and provide a concise description. Next, read and paraphrase any text in the image-especially if 
it is in non-Arabic-so that a Arabic speaker could understand its literal or intended meaning. 
Explain how that text, in conjunction with the visual elements, supports or illustrates the known 
propaganda technique. Think carefully about emotional appeals, humor, cultural references, manipulative 
language, or other rhetorical strategies.
Finally, provide a thoughtful explanation in Arabic (up to {explanation_length} words) of why these elements led the human to classify 
the image as propaganda. Be specific about how the text and visuals interact, referencing the 
Arabic context or cultural nuances if relevant. Your answer must be valid JSON with a single field:
{{
"explanation": "Your explanation here (up to {explanation_length} words) in Arabic."
}})tmpl";

// English variant of the ArMeme prompt: same instructions, output language
// switched to English.
constexpr const char* kArmemeEnglish = R"tmpl(You are a Propaganda Image Detection Expert. A human expert has already classified the image as {class_label}. 
Do not change or re-identify the classified label of the image.
First, analyze the image's visual elements (objects, symbols, color usage, composition) 
and provide a concise description. Next, read and paraphrase any text in the image-especially if 
it is in non-English-so that an English speaker could understand its literal or intended meaning. 
Explain how that text, in conjunction with the visual elements, supports or illustrates the known 
propaganda technique. Think carefully about emotional appeals, humor, cultural references, manipulative 
language, or other rhetorical strategies.
Finally, provide a thoughtful explanation in English (up to {explanation_length} words) of why these elements led the human to classify 
the image as propaganda. Be specific about how the text and visuals interact, referencing the 
Arabic context or cultural nuances if relevant. Your answer must be valid JSON with a single field:
{{
"explanation": "Your explanation here (up to {explanation_length} words) in English."
}})tmpl";

constexpr const char* kHatefulEnglish = R"tmpl(You are a Hateful Image Detection Expert. A human expert has already classified the image as {class_label}. Do not change or re-identify the classified label of the image.
First, analyze the image's visual elements (objects, symbols, color usage, composition) and provide a concise description. Next, read and paraphrase any text in the image so anyone speaking English can understand its literal or intended meaning. 
Explain how that text, in conjunction with the visual elements, supports or illustrates the known hateful content. 
Finally, provide a thoughtful explanation in English (up to {explanation_length} words) of why these elements led the human to classify the image as hateful. Be specific about how the text and visuals interact, referencing the context or cultural nuances if relevant. Your answer must be valid JSON with a single field:
{{
"explanation": "Your explanation here (up to {explanation_length} words) in English."
}})tmpl";

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
    switch (id) {
        case TemplateId::armeme_ar: return "armeme_ar";
        case TemplateId::armeme_en: return "armeme_en";
        case TemplateId::hateful_en: return "hateful_en";
    }
    return "armeme_ar";
}

TemplateId parse_template_id(std::string_view name) {
    if (name == "armeme_ar") return TemplateId::armeme_ar;
    if (name == "armeme_en") return TemplateId::armeme_en;
    if (name == "hateful_en") return TemplateId::hateful_en;
    throw ValidationError("unknown template id '" + std::string(name) + "'", "template_id");
}

const PromptTemplate& builtin_template(TemplateId id) {
    static const PromptTemplate armeme_ar{TemplateId::armeme_ar, Language::ar, "armeme", kArmemeArabic};
    static const PromptTemplate armeme_en{TemplateId::armeme_en, Language::en, "armeme", kArmemeEnglish};
    static const PromptTemplate hateful_en{TemplateId::hateful_en, Language::en, "hateful", kHatefulEnglish};
    switch (id) {
        case TemplateId::armeme_ar: return armeme_ar;
        case TemplateId::armeme_en: return armeme_en;
        case TemplateId::hateful_en: return hateful_en;
    }
    throw ValidationError("unknown template id", "template_id");
}

namespace {

// Python str.format semantics restricted to named fields.
std::string format_named(std::string_view body, const std::map<std::string, std::string>& values,
                         std::vector<std::string>* seen = nullptr) {
    std::string out;
    out.reserve(body.size() + 64);
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c == '{') {
            if (i + 1 < body.size() && body[i + 1] == '{') {
                out.push_back('{');
                ++i;
                continue;
            }
            const auto close = body.find('}', i + 1);
            if (close == std::string_view::npos) throw ValidationError("unterminated placeholder in template");
            const std::string name(body.substr(i + 1, close - i - 1));
            if (seen) seen->push_back(name);
            if (!seen) {
                const auto it = values.find(name);
                if (it == values.end()) throw ValidationError("unknown placeholder {" + name + "}", "template");
                out += it->second;
            }
            i = close;
        } else if (c == '}') {
            if (i + 1 < body.size() && body[i + 1] == '}') ++i;
            out.push_back('}');
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> template_placeholders(std::string_view body) {
    std::vector<std::string> names;
    format_named(body, {}, &names);
    return names;
}

std::string build_prompt(const PromptTemplate& tmpl, std::string_view label, std::size_t word_limit) {
    const LabelSet labels = LabelSet::by_name(tmpl.dataset);
    if (!labels.contains(label)) {
        throw ValidationError("label '" + std::string(label) + "' is not in the " + tmpl.dataset + " label set",
                              "class_label");
    }
    return format_named(tmpl.body, {{"class_label", std::string(label)},
                                    {"explanation_length", std::to_string(word_limit)}});
}

std::string_view to_string(FailureReason reason) noexcept {
    switch (reason) {
        case FailureReason::malformed_json: return "malformed_json";
        case FailureReason::missing_field: return "missing_field";
        case FailureReason::empty: return "empty";
        case FailureReason::over_limit: return "over_limit";
        case FailureReason::transport: return "transport";
    }
    return "transport";
}

namespace {

std::string_view strip_code_fence(std::string_view s) {
    const auto open = s.find("```");
    if (open == std::string_view::npos) return s;
    auto body_start = s.find('\n', open);
    if (body_start == std::string_view::npos) return s;
    ++body_start;
    const auto close = s.find("```", body_start);
    if (close == std::string_view::npos) return s.substr(body_start);
    return s.substr(body_start, close - body_start);
}

}  // namespace

ProviderResponse parse_response(std::string_view raw, std::size_t word_limit, double tolerance,
                                const WordCounter& counter) {
    ProviderResponse response;
    response.raw_text = std::string(raw);
    const std::string_view body = strip_code_fence(raw);
    const auto open = body.find('{');
    const auto close = body.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        response.failure_reason = FailureReason::malformed_json;
        return response;
    }
    json parsed = json::parse(body.substr(open, close - open + 1), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        response.failure_reason = FailureReason::malformed_json;
        return response;
    }
    const auto it = parsed.find("explanation");
    if (it == parsed.end() || !it->is_string()) {
        response.failure_reason = FailureReason::missing_field;
        return response;
    }
    std::string explanation = text::trim(it->get<std::string>());
    if (explanation.empty()) {
        response.failure_reason = FailureReason::empty;
        return response;
    }
    response.word_count = counter ? counter(explanation) : text::count_words(explanation);
    const double hard_limit = tolerance * static_cast<double>(word_limit);
    if (static_cast<double>(response.word_count) > hard_limit) {
        response.failure_reason = FailureReason::over_limit;
        return response;
    }
    response.over_soft_limit = response.word_count > word_limit;
    response.parsed_explanation = std::move(explanation);
    return response;
}

json to_json(const FailureEntry& failure) {
    json row = {{"id", failure.id}, {"failure_reason", std::string(to_string(failure.reason))},
                {"attempts", failure.attempts}};
    if (!failure.detail.empty()) row["detail"] = failure.detail;
    return row;
}

namespace {

std::string utc_now_iso8601() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string mime_for(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") return "image/png";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return "image/jpeg";
}

std::optional<ImagePayload> load_image(const ExplainedRecord& record, const fs::path& root) {
    ImagePayload image{record.base.image_ref, mime_for(record.base.image_ref), {}};
    if (root.empty()) return image;
    std::ifstream in(root / record.base.image_ref, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream bytes;
    bytes << in.rdbuf();
    image.bytes = bytes.str();
    return image;
}

}  // namespace

GenerationOutcome generate_one(const ExplainedRecord& record, const PromptTemplate& tmpl,
                               const GenerationConfig& config, ExpertProvider& provider,
                               const fs::path& image_root) {
    GenerationOutcome outcome;
    const auto image = load_image(record, image_root);
    if (!image) {
        outcome.failure = FailureReason::transport;
        outcome.detail = "image not readable: " + (image_root / record.base.image_ref).string();
        return outcome;
    }
    ProviderRequest request;
    request.record_id = record.base.id;
    request.prompt = build_prompt(tmpl, record.base.label, config.word_limit);
    request.image = *image;
    request.temperature = config.temperature;

    const std::size_t max_attempts = std::max<std::size_t>(1, config.max_retries);
    bool over_limit_retried = false;
    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
        outcome.attempts = attempt;
        if (attempt > 1 && config.retry_backoff.count() > 0) {
            std::this_thread::sleep_for(config.retry_backoff * (1 << std::min<std::size_t>(attempt - 2, 6)));
        }
        std::string raw;
        try {
            raw = provider.complete(request);
        } catch (const TransportError& e) {
            outcome.failure = FailureReason::transport;
            outcome.detail = e.what();
            continue;
        }
        ProviderResponse response = parse_response(raw, config.word_limit, config.over_limit_tolerance);
        if (response.parsed_explanation) {
            ExplainedRecord out = record;
            out.explanations[tmpl.language] = std::move(*response.parsed_explanation);
            out.gen_meta[tmpl.language] = GenerationMeta{
                provider.id(),
                provider.model_version(),
                sha256_hex(request.prompt),
                std::string(to_string(tmpl.id)),
                config.fixed_timestamp ? *config.fixed_timestamp : utc_now_iso8601(),
            };
            if (response.over_soft_limit) {
                spdlog::warn("{}: explanation has {} words (limit {})", record.base.id, response.word_count,
                             config.word_limit);
            }
            outcome.record = std::move(out);
            outcome.failure.reset();
            outcome.detail.clear();
            outcome.over_soft_limit = response.over_soft_limit;
            return outcome;
        }
        outcome.failure = response.failure_reason;
        outcome.detail.clear();
        if (response.failure_reason == FailureReason::over_limit) {
            outcome.detail = std::to_string(response.word_count) + " words";
            if (over_limit_retried) break;
            over_limit_retried = true;
        }
    }
    return outcome;
}

namespace {

json cache_key(const std::string& id, const PromptTemplate& tmpl, const GenerationConfig& config,
               const ExpertProvider& provider) {
    return {{"id", id},
            {"template_id", std::string(to_string(tmpl.id))},
            {"word_limit", config.word_limit},
            {"model_version", provider.model_version()}};
}

}  // namespace

BatchResult batch_generate(std::span<const ExplainedRecord> records, const PromptTemplate& tmpl,
                           const GenerationConfig& config, ExpertProvider& provider,
                           const BatchOptions& options) {
    BatchResult result;
    result.records.assign(records.begin(), records.end());

    std::map<std::string, ExplainedRecord> cached;
    if (!options.checkpoint_path.empty() && fs::exists(options.checkpoint_path)) {
        for (const auto& row : read_jsonl(options.checkpoint_path)) {
            if (!row.contains("cache_key") || !row.contains("record")) continue;
            const auto& key = row["cache_key"];
            const std::string id = key.value("id", "");
            if (key == cache_key(id, tmpl, config, provider)) cached.insert_or_assign(id, record_from_json(row["record"]));
        }
    }

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto it = cached.find(result.records[i].base.id);
        if (it != cached.end() && it->second.has_explanation(tmpl.language)) {
            auto& out = result.records[i];
            out.explanations[tmpl.language] = it->second.explanations.at(tmpl.language);
            if (const auto m = it->second.gen_meta.find(tmpl.language); m != it->second.gen_meta.end()) {
                out.gen_meta[tmpl.language] = m->second;
            }
            ++result.resumed;
        } else {
            pending.push_back(i);
        }
    }

    std::optional<JsonlAppender> checkpoint;
    if (!options.checkpoint_path.empty()) checkpoint.emplace(options.checkpoint_path);

    std::vector<std::optional<GenerationOutcome>> outcomes(result.records.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    const auto worker = [&] {
        while (!stop.load()) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size()) return;
            const std::size_t index = pending[k];
            try {
                GenerationOutcome outcome = generate_one(result.records[index], tmpl, config, provider,
                                                         options.image_root);
                if (outcome.record && checkpoint) {
                    checkpoint->append({{"cache_key", cache_key(outcome.record->base.id, tmpl, config, provider)},
                                        {"record", to_json(*outcome.record)}});
                }
                outcomes[index] = std::move(outcome);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                stop = true;
                return;
            }
        }
    };

    const std::size_t threads = std::min(std::max<std::size_t>(1, config.concurrency_limit), pending.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    for (std::size_t index : pending) {
        auto& outcome = outcomes[index];
        if (outcome && outcome->record) {
            result.records[index] = std::move(*outcome->record);
            ++result.generated;
        } else if (outcome) {
            result.failures.push_back({result.records[index].base.id, *outcome->failure, outcome->attempts,
                                       outcome->detail});
        }
    }
    if (!result.records.empty()) {
        result.failure_fraction =
            static_cast<double>(result.failures.size()) / static_cast<double>(result.records.size());
    }
    result.exceeds_threshold = result.failure_fraction > config.failure_threshold;
    return result;
}

}  // namespace memexplain
