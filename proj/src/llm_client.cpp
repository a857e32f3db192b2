#include "codezoom/llm_client.hpp"

#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "codezoom/grammar.hpp"
#include "codezoom/util.hpp"

namespace codezoom::llm {

using nlohmann::json;

void LlmConfig::validate() const
{
    if (!(timeout_seconds > 0))
        throw std::invalid_argument("timeout must be positive");
    if (max_retries < 0)
        throw std::invalid_argument("max_retries must be >= 0");
    if (temperature < 0 || temperature > 2)
        throw std::invalid_argument("temperature must be within [0, 2]");
    if (model_name.empty())
        throw std::invalid_argument("model name is empty");
}

LlmConfig config_from_json(const json& j, LlmConfig c)
{
    c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
    c.model_name = j.value("model_name", c.model_name);
    c.api_key_ref = j.value("api_key_ref", c.api_key_ref);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.temperature = j.value("temperature", c.temperature);
    c.validate();
    return c;
}

json to_json(const LlmConfig& c)
{
    return {{"endpoint_url", c.endpoint_url}, {"model_name", c.model_name},   {"api_key_ref", c.api_key_ref},
            {"timeout_seconds", c.timeout_seconds}, {"max_retries", c.max_retries}, {"temperature", c.temperature}};
}

std::string_view to_string(LlmErrorKind kind)
{
    switch (kind) {
    case LlmErrorKind::Network: return "network";
    case LlmErrorKind::Auth: return "auth";
    case LlmErrorKind::SchemaAfterRetries: return "schema-after-retries";
    case LlmErrorKind::TranscriptExhausted: return "transcript-exhausted";
    case LlmErrorKind::TranscriptMismatch: return "transcript-mismatch";
    case LlmErrorKind::CassetteMiss: return "cassette-miss";
    }
    return "unknown";
}

LlmError::LlmError(LlmErrorKind kind, const std::string& message, int attempts)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), attempts_(attempts),
      message_(message)
{
}

// ---------------------------------------------------------------------------
// HTTP

std::atomic<std::size_t> HttpBackend::attempted_{0};

RawReply HttpBackend::send(const LlmConfig& config, const ChatRequest& request)
{
    const char* key = std::getenv(config.api_key_ref.c_str());
    if (!key || !*key)
        throw LlmError(LlmErrorKind::Auth, "environment variable " + config.api_key_ref + " is not set");

    const std::string& url = config.endpoint_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw LlmError(LlmErrorKind::Network, "endpoint URL has no scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    json body = {{"model", config.model_name},
                 {"temperature", config.temperature},
                 {"messages",
                  {{{"role", "system"}, {"content", request.system_text}},
                   {{"role", "user"}, {"content", request.user_text}}}}};
    if (request.response_schema)
        body["response_format"] = response_format(*request.response_schema);

    ++attempted_;
    httplib::Client http(origin);
    auto seconds = static_cast<time_t>(config.timeout_seconds);
    http.set_connection_timeout(seconds);
    http.set_read_timeout(seconds);
    http.set_write_timeout(seconds);
    http.set_bearer_token_auth(key);
    auto res = http.Post(path, body.dump(), "application/json");
    if (!res)
        throw LlmError(LlmErrorKind::Network, "request to " + origin + " failed: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw LlmError(LlmErrorKind::Auth, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    if (res->status < 200 || res->status >= 300)
        throw LlmError(LlmErrorKind::Network, "endpoint returned HTTP " + std::to_string(res->status));

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty())
        throw LlmError(LlmErrorKind::Network, "endpoint returned an unexpected body");
    RawReply out;
    const json& message = reply["choices"][0]["message"];
    out.text = message.value("content", std::string());
    if (reply.contains("usage") && reply["usage"].is_object())
        out.usage = Usage{reply["usage"].value("prompt_tokens", 0), reply["usage"].value("completion_tokens", 0)};
    return out;
}

// ---------------------------------------------------------------------------
// Scripted

Transcript transcript_from_json(const json& j)
{
    if (!j.is_array())
        throw LlmError(LlmErrorKind::TranscriptMismatch, "transcript must be a JSON array");
    Transcript t;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& e = j[i];
        if (!e.is_object() || !e.contains("response"))
            throw LlmError(LlmErrorKind::TranscriptMismatch,
                           "transcript entry " + std::to_string(i) + " has no response");
        TranscriptEntry entry;
        if (e.contains("match") && !e["match"].is_null()) {
            if (!e["match"].is_string())
                throw LlmError(LlmErrorKind::TranscriptMismatch,
                               "transcript entry " + std::to_string(i) + " has a non-string match");
            entry.match = e["match"].get<std::string>();
        }
        entry.response = e["response"].is_string() ? e["response"].get<std::string>() : e["response"].dump();
        t.push_back(std::move(entry));
    }
    return t;
}

Transcript load_transcript(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::runtime_error& e) {
        throw LlmError(LlmErrorKind::TranscriptMismatch, e.what());
    }
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw LlmError(LlmErrorKind::TranscriptMismatch, "transcript " + path.string() + " is not valid JSON");
    return transcript_from_json(j);
}

json to_json(const Transcript& transcript)
{
    json out = json::array();
    for (const auto& e : transcript) {
        json entry = {{"response", e.response}};
        if (e.match)
            entry["match"] = *e.match;
        out.push_back(std::move(entry));
    }
    return out;
}

ScriptedBackend::ScriptedBackend(Transcript transcript) : transcript_(std::move(transcript)) {}

RawReply ScriptedBackend::send(const LlmConfig&, const ChatRequest& request)
{
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    if (cursor_ >= transcript_.size())
        throw LlmError(LlmErrorKind::TranscriptExhausted,
                       "no scripted response left after " + std::to_string(cursor_) + " requests");
    const auto& entry = transcript_[cursor_];
    if (entry.match && request.request_text().find(*entry.match) == std::string::npos)
        throw LlmError(LlmErrorKind::TranscriptMismatch, "request " + std::to_string(cursor_ + 1) +
                                                             " does not contain \"" + *entry.match + "\"");
    ++cursor_;
    return RawReply{entry.response, std::nullopt};
}

std::size_t ScriptedBackend::consumed() const
{
    std::lock_guard lock(mutex_);
    return cursor_;
}

std::size_t ScriptedBackend::remaining() const
{
    std::lock_guard lock(mutex_);
    return transcript_.size() - cursor_;
}

std::vector<ChatRequest> ScriptedBackend::requests() const
{
    std::lock_guard lock(mutex_);
    return requests_;
}

// ---------------------------------------------------------------------------
// Record / replay

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path)
{
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw LlmError(LlmErrorKind::CassetteMiss, "cassette " + path.string() + " is not a JSON array");
    std::vector<CassetteEntry> out;
    for (const auto& e : j)
        out.push_back({e.at("request_text").get<std::string>(), e.at("response_text").get<std::string>()});
    return out;
}

void save_cassette(const std::filesystem::path& path, const std::vector<CassetteEntry>& entries)
{
    json j = json::array();
    for (const auto& e : entries)
        j.push_back({{"request_text", e.request_text}, {"response_text", e.response_text}});
    write_file_atomic(path, j.dump(2) + "\n");
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> live, std::filesystem::path cassette)
    : live_(std::move(live)), path_(std::move(cassette))
{
    if (std::filesystem::exists(path_))
        entries_ = load_cassette(path_);
}

RawReply RecordingBackend::send(const LlmConfig& config, const ChatRequest& request)
{
    RawReply reply = live_->send(config, request);
    std::lock_guard lock(mutex_);
    entries_.push_back({request.request_text(), reply.text});
    save_cassette(path_, entries_);
    return reply;
}

ReplayBackend::ReplayBackend(std::vector<CassetteEntry> entries)
    : entries_(std::move(entries)), used_(entries_.size(), false)
{
}

ReplayBackend::ReplayBackend(const std::filesystem::path& cassette) : ReplayBackend(load_cassette(cassette)) {}

RawReply ReplayBackend::send(const LlmConfig&, const ChatRequest& request)
{
    std::lock_guard lock(mutex_);
    const std::string key = request.request_text();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!used_[i] && entries_[i].request_text == key) {
            used_[i] = true;
            return RawReply{entries_[i].response_text, std::nullopt};
        }
    }
    throw LlmError(LlmErrorKind::CassetteMiss, "no recorded response for this request");
}

// ---------------------------------------------------------------------------
// Structured output

std::string strip_code_fence(const std::string& text)
{
    std::size_t begin = 0;
    while (begin < text.size() && (text[begin] == ' ' || text[begin] == '\n' || text[begin] == '\r' || text[begin] == '\t'))
        ++begin;
    std::size_t end = text.size();
    while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\n' || text[end - 1] == '\r' || text[end - 1] == '\t'))
        --end;
    if (text.compare(begin, 3, "```") != 0 || end < begin + 6 || text.compare(end - 3, 3, "```") != 0)
        return text;
    std::size_t open_nl = text.find('\n', begin);
    if (open_nl == std::string::npos || open_nl + 1 > end - 3)
        return text;
    // The language tag, if any, is a single word on the opening line.
    std::string_view tag(text.data() + begin + 3, open_nl - begin - 3);
    for (char c : tag)
        if (c == ' ' || c == '`')
            return text;
    return text.substr(open_nl + 1, end - 3 - (open_nl + 1));
}

namespace {

std::string without_region_markers(const std::string& text)
{
    std::string out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        std::size_t end = nl == std::string::npos ? text.size() : nl + 1;
        std::string_view line(text.data() + start, end - start);
        std::string_view trimmed = line;
        while (!trimmed.empty() && (trimmed.back() == '\n' || trimmed.back() == '\r' || trimmed.back() == ' '))
            trimmed.remove_suffix(1);
        while (!trimmed.empty() && trimmed.front() == ' ')
            trimmed.remove_prefix(1);
        if (trimmed != "<<<REGION" && trimmed != "REGION>>>")
            out += line;
        start = end;
    }
    return out;
}

} // namespace

json parse_structured(const std::string& text, ResponseSchema schema)
{
    json doc = json::parse(strip_code_fence(without_region_markers(text)), nullptr, false);
    if (doc.is_discarded())
        throw std::invalid_argument("response is not a JSON document");
    try {
        if (schema == ResponseSchema::Program)
            return to_interchange(from_interchange(doc));
        if (doc.is_array())
            doc = json{{"steps", doc}};
        if (!doc.is_object() || !doc.contains("steps"))
            throw SchemaError("steps", "required property missing");
        for (const auto& [key, value] : doc.items())
            if (key != "steps")
                throw SchemaError("$." + key, "unexpected property");
        auto steps = to_interchange(block_from_interchange(doc["steps"], "steps"));
        return json{{"steps", std::move(steps)}};
    } catch (const SchemaError& e) {
        throw std::invalid_argument(std::string("schema violation at ") + e.what());
    }
}

json response_format(ResponseSchema schema)
{
    json program = json::parse(interchange_schema());
    json body = program;
    if (schema == ResponseSchema::Steps) {
        body = {{"type", "object"},
                {"additionalProperties", false},
                {"required", {"steps"}},
                {"properties", {{"steps", {{"$ref", "#/$defs/block"}}}}},
                {"$defs", program["$defs"]}};
    }
    body.erase("$schema");
    return {{"type", "json_schema"},
            {"json_schema",
             {{"name", schema == ResponseSchema::Program ? "pseudocode_program" : "pseudocode_steps"},
              {"schema", body}}}};
}

// ---------------------------------------------------------------------------

Client::Client(std::shared_ptr<Backend> backend, LlmConfig config)
    : backend_(std::move(backend)), config_(std::move(config))
{
    if (!backend_)
        throw std::invalid_argument("client requires a backend");
    config_.validate();
}

ChatResponse Client::complete(const ChatRequest& request) const
{
    return llm::complete(*backend_, config_, request);
}

ChatResponse complete(Backend& backend, const LlmConfig& config, const ChatRequest& request)
{
    if (request.user_text.empty())
        throw std::invalid_argument("chat request has no user text");
    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    ChatRequest attempt = request;
    const int max_attempts = 1 + config.max_retries;
    for (int n = 1;; ++n) {
        RawReply reply = backend.send(config, attempt);
        ChatResponse response{reply.text, std::nullopt, reply.usage, 0.0, n};
        if (!request.response_schema) {
            response.latency_seconds = elapsed();
            return response;
        }
        try {
            response.structured = parse_structured(reply.text, *request.response_schema);
            if (request.check)
                request.check(*response.structured);
            response.latency_seconds = elapsed();
            return response;
        } catch (const std::invalid_argument& violation) {
            if (n >= max_attempts)
                throw LlmError(LlmErrorKind::SchemaAfterRetries,
                               "no valid structured response after " + std::to_string(n) +
                                   " attempts; last violation: " + violation.what(),
                               n);
            attempt.user_text = request.user_text +
                                "\n\nYour previous response was rejected: " + violation.what() +
                                "\nRespond again with only a JSON document that conforms to the schema.";
        }
    }
}

} // namespace codezoom::llm
