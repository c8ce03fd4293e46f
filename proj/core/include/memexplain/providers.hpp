#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace memexplain {

struct ImagePayload {
    std::string ref;
    std::string mime_type;
    std::string bytes;  ///< empty when no dataset root was supplied
};

struct ProviderRequest {
    std::string record_id;
    std::string prompt;
    ImagePayload image;
    double temperature = 0.0;
};

/// Retryable provider failure (network, HTTP status, rate limit).
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expert vision-language model behind a single completion call.
/// Implementations must be safe to call from several threads at once.
class ExpertProvider {
public:
    virtual ~ExpertProvider() = default;

    /// Returns the raw completion text. Throws TransportError on retryable
    /// failures; any other exception aborts the surrounding batch.
    virtual std::string complete(const ProviderRequest& request) = 0;

    virtual std::string id() const = 0;
    virtual std::string model_version() const = 0;
};

/// Deterministic provider for tests and offline runs. The script receives the
/// request and the zero-based global call index.
class ScriptedProvider final : public ExpertProvider {
public:
    using Script = std::function<std::string(const ProviderRequest&, std::size_t call_index)>;

    explicit ScriptedProvider(Script script, std::string model_version = "scripted-mock-1");

    /// Replays fixed responses in order; the last one repeats.
    static std::unique_ptr<ScriptedProvider> replay(std::vector<std::string> responses);

    /// Answers every prompt with a well-formed JSON explanation derived from the
    /// label named in the prompt and the record id. Output language follows the
    /// prompt's requested explanation language.
    static std::unique_ptr<ScriptedProvider> deterministic();

    std::string complete(const ProviderRequest& request) override;
    std::string id() const override { return "mock"; }
    std::string model_version() const override { return model_version_; }

    std::size_t calls() const noexcept { return calls_.load(); }
    std::vector<std::string> called_ids() const;

private:
    Script script_;
    std::string model_version_;
    std::atomic<std::size_t> calls_{0};
    mutable std::mutex mutex_;
    std::vector<std::string> called_ids_;
};

struct RemoteProviderConfig {
    /// Full chat-completions URL, e.g. https://host/openai/deployments/x/chat/completions?api-version=...
    std::string endpoint;
    std::string model;
    /// Environment variable holding the credential; never stored in config files.
    std::string api_key_env = "MEMEXPLAIN_API_KEY";
    /// "api-key" for Azure-style endpoints, "authorization" for bearer tokens.
    std::string auth_header = "api-key";
    std::chrono::seconds timeout{120};
};

/// OpenAI-compatible chat-completions client. The image travels as a base64
/// data URL attachment next to the text prompt.
class RemoteProvider final : public ExpertProvider {
public:
    explicit RemoteProvider(RemoteProviderConfig config);

    std::string complete(const ProviderRequest& request) override;
    std::string id() const override { return "remote"; }
    std::string model_version() const override { return config_.model; }

private:
    RemoteProviderConfig config_;
    std::string api_key_;
};

std::string base64_encode(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

}  // namespace memexplain
