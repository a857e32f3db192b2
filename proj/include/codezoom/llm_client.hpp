#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace codezoom::llm {

struct LlmConfig {
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string model_name = "gpt-5-mini";
    std::string api_key_ref = "CODEZOOM_API_KEY"; // environment variable holding the key
    double timeout_seconds = 120.0;
    int max_retries = 2;
    double temperature = 0.0;

    /// Throws std::invalid_argument on a bad value.
    void validate() const;
};

LlmConfig config_from_json(const nlohmann::json& j, LlmConfig base = {});
nlohmann::json to_json(const LlmConfig& config);

/// Shape the structured response must have.
enum class ResponseSchema {
    Program, // full interchange document {goal, steps}
    Steps,   // {"steps": [Node+]}
};

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    std::optional<ResponseSchema> response_schema;
    /// Extra acceptance test on the validated document; throwing
    /// std::invalid_argument counts as a violation and triggers a retry.
    std::function<void(const nlohmann::json&)> check = nullptr;

    /// Text a transcript `match` or cassette key is compared against.
    std::string request_text() const { return system_text + "\n" + user_text; }
};

struct Usage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    std::optional<nlohmann::json> structured; // validated against the request schema
    std::optional<Usage> usage;
    double latency_seconds = 0.0;
    int attempts = 1;
};

enum class LlmErrorKind { Network, Auth, SchemaAfterRetries, TranscriptExhausted, TranscriptMismatch, CassetteMiss };

std::string_view to_string(LlmErrorKind kind);

class LlmError : public std::runtime_error {
public:
    LlmError(LlmErrorKind kind, const std::string& message, int attempts = 0);

    LlmErrorKind kind() const noexcept { return kind_; }
    int attempts() const noexcept { return attempts_; }
    /// The message without the kind prefix that what() carries.
    const std::string& message() const noexcept { return message_; }

private:
    LlmErrorKind kind_;
    int attempts_;
    std::string message_;
};

struct RawReply {
    std::string text;
    std::optional<Usage> usage;
};

/// One completion round trip. Implementations must be safe to call from
/// several threads.
class Backend {
public:
    virtual ~Backend() = default;
    virtual RawReply send(const LlmConfig& config, const ChatRequest& request) = 0;
};

/// OpenAI-style `{model, messages, response_format}` POST.
class HttpBackend : public Backend {
public:
    RawReply send(const LlmConfig& config, const ChatRequest& request) override;

    /// Requests attempted by any HttpBackend in this process.
    static std::size_t requests_attempted() noexcept { return attempted_.load(); }

private:
    static std::atomic<std::size_t> attempted_;
};

struct TranscriptEntry {
    std::optional<std::string> match; // substring the request text must contain
    std::string response;
};

using Transcript = std::vector<TranscriptEntry>;

/// Accepts `[{"match"?: string, "response": string | json}]`; a non-string
/// response is stored as its compact JSON text.
Transcript transcript_from_json(const nlohmann::json& j);
Transcript load_transcript(const std::filesystem::path& path);
nlohmann::json to_json(const Transcript& transcript);

/// Replays canned responses strictly in order.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(Transcript transcript);

    RawReply send(const LlmConfig& config, const ChatRequest& request) override;

    std::size_t consumed() const;
    std::size_t remaining() const;
    /// Requests received, in arrival order.
    std::vector<ChatRequest> requests() const;

private:
    mutable std::mutex mutex_;
    Transcript transcript_;
    std::size_t cursor_ = 0;
    std::vector<ChatRequest> requests_;
};

struct CassetteEntry {
    std::string request_text;
    std::string response_text;
};

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path);
void save_cassette(const std::filesystem::path& path, const std::vector<CassetteEntry>& entries);

/// Forwards to a live backend and appends every exchange to a cassette file.
class RecordingBackend : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> live, std::filesystem::path cassette);

    RawReply send(const LlmConfig& config, const ChatRequest& request) override;

private:
    std::mutex mutex_;
    std::shared_ptr<Backend> live_;
    std::filesystem::path path_;
    std::vector<CassetteEntry> entries_;
};

/// Answers from a cassette; the request text must match byte for byte.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::vector<CassetteEntry> entries);
    explicit ReplayBackend(const std::filesystem::path& cassette);

    RawReply send(const LlmConfig& config, const ChatRequest& request) override;

private:
    std::mutex mutex_;
    std::vector<CassetteEntry> entries_;
    std::vector<bool> used_;
};

/// Strips one outer pair of ``` fences (with optional language tag) when the
/// text both starts and ends with a fence; otherwise returns it unchanged.
std::string strip_code_fence(const std::string& text);

/// Extracts and validates the structured document in a response. Throws
/// std::invalid_argument describing the first violation.
nlohmann::json parse_structured(const std::string& text, ResponseSchema schema);

/// JSON schema sent as `response_format` for a given response shape.
nlohmann::json response_format(ResponseSchema schema);

/// Shareable handle combining a backend with a configuration. Structured
/// requests are validated client-side and retried up to max_retries times.
class Client {
public:
    Client(std::shared_ptr<Backend> backend, LlmConfig config);

    ChatResponse complete(const ChatRequest& request) const;

    const LlmConfig& config() const noexcept { return config_; }
    Backend& backend() const noexcept { return *backend_; }

private:
    std::shared_ptr<Backend> backend_;
    LlmConfig config_;
};

ChatResponse complete(Backend& backend, const LlmConfig& config, const ChatRequest& request);

} // namespace codezoom::llm
