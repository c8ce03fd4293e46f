#include "memexplain/providers.hpp"

#include "memexplain/error.hpp"
#include "memexplain/jsonl.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <cstdlib>
#include <functional>
#include <iomanip>
#include <sstream>

namespace memexplain {

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw RuntimeFailure("sha256 digest failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < length; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return os.str();
}

ScriptedProvider::ScriptedProvider(Script script, std::string model_version)
    : script_(std::move(script)), model_version_(std::move(model_version)) {}

std::unique_ptr<ScriptedProvider> ScriptedProvider::replay(std::vector<std::string> responses) {
    return std::make_unique<ScriptedProvider>(
        [responses = std::move(responses)](const ProviderRequest&, std::size_t call) {
            if (responses.empty()) throw TransportError("no scripted responses");
            return responses[std::min(call, responses.size() - 1)];
        });
}

namespace {

std::string label_from_prompt(std::string_view prompt) {
    constexpr std::string_view marker = "classified the image as ";
    const auto at = prompt.find(marker);
    if (at == std::string_view::npos) return "unknown";
    const auto start = at + marker.size();
    auto end = prompt.find(". ", start);
    const auto newline = prompt.find('\n', start);
    if (newline < end) end = newline;
    std::string label(prompt.substr(start, end - start));
    while (!label.empty() && (label.back() == '.' || label.back() == ' ')) label.pop_back();
    return label;
}

const char* const kEnglishOpeners[] = {
    "The image combines bold text with a familiar visual",
    "The meme pairs a short caption with a recognizable scene",
    "The visual composition places the text over a striking photo",
    "The picture uses strong colors and a short slogan",
};
const char* const kEnglishBodies[] = {
    "and the wording appeals to emotion rather than evidence",
    "and the caption relies on humor and cultural references",
    "and the message frames the subject in a simplified way",
    "and the text reads as an ordinary comment without persuasion",
};
const char* const kArabicOpeners[] = {
    "تجمع الصورة بين نص واضح وعنصر بصري مألوف",
    "يقرن الميم تعليقا قصيرا بمشهد معروف",
    "تضع الصورة النص فوق خلفية لافتة للنظر",
    "تستخدم الصورة ألوانا قوية وشعارا قصيرا",
};
const char* const kArabicBodies[] = {
    "ويعتمد النص على إثارة المشاعر بدلا من الأدلة",
    "ويعتمد التعليق على الفكاهة والإشارات الثقافية",
    "وتقدم الرسالة الموضوع بصورة مبسطة",
    "ويبدو النص تعليقا عاديا دون محاولة للإقناع",
};

}  // namespace

std::unique_ptr<ScriptedProvider> ScriptedProvider::deterministic() {
    return std::make_unique<ScriptedProvider>([](const ProviderRequest& request, std::size_t) {
        const std::string label = label_from_prompt(request.prompt);
        const std::size_t h = std::hash<std::string>{}(request.record_id + "|" + label);
        const bool arabic = request.prompt.find("explanation in Arabic") != std::string::npos;
        std::string explanation;
        if (arabic) {
            explanation = std::string(kArabicOpeners[h % 4]) + " " + kArabicBodies[(h / 4) % 4] +
                          "، ولذلك صنفها الخبير على أنها " + label + ".";
        } else {
            explanation = std::string(kEnglishOpeners[h % 4]) + ", " + kEnglishBodies[(h / 4) % 4] +
                          ", which is why the human expert classified it as " + label + ".";
        }
        return json{{"explanation", explanation}}.dump();
    });
}

std::string ScriptedProvider::complete(const ProviderRequest& request) {
    const std::size_t call = calls_.fetch_add(1);
    {
        std::lock_guard lock(mutex_);
        called_ids_.push_back(request.record_id);
    }
    return script_(request, call);
}

std::vector<std::string> ScriptedProvider::called_ids() const {
    std::lock_guard lock(mutex_);
    return called_ids_;
}

namespace {

struct SplitUrl {
    std::string base;  ///< scheme://host[:port]
    std::string path;  ///< path plus query
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("endpoint must be an absolute URL", "endpoint");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

RemoteProvider::RemoteProvider(RemoteProviderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ValidationError("remote provider needs an endpoint", "generation.remote.endpoint");
    split_url(config_.endpoint);
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    }
}

std::string RemoteProvider::complete(const ProviderRequest& request) {
    const auto [base, path] = split_url(config_.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    json content = json::array();
    content.push_back({{"type", "text"}, {"text", request.prompt}});
    if (!request.image.bytes.empty()) {
        content.push_back({{"type", "image_url"},
                           {"image_url", {{"url", "data:" + request.image.mime_type + ";base64," +
                                                      base64_encode(request.image.bytes)}}}});
    }
    json body = {{"model", config_.model},
                 {"temperature", request.temperature},
                 {"messages", json::array({{{"role", "user"}, {"content", std::move(content)}}})}};

    httplib::Headers headers;
    if (!api_key_.empty()) {
        if (config_.auth_header == "authorization") {
            headers.emplace("Authorization", "Bearer " + api_key_);
        } else {
            headers.emplace(config_.auth_header, api_key_);
        }
    }
    const auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw TransportError("provider returned non-JSON body");
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw TransportError("provider reply lacks choices[0].message.content");
    }
}

}  // namespace memexplain
