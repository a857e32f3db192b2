#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "codezoom/grammar.hpp"
#include "codezoom/llm_client.hpp"

namespace codezoom {

struct SourceDocument {
    std::filesystem::path path;
    std::string language_hint;
    std::string text;
    std::string content_hash;

    /// Builds a document and computes its hash; the hint defaults to one
    /// guessed from the file extension.
    static SourceDocument from_text(std::filesystem::path path, std::string text, std::string language_hint = {});
    static SourceDocument load(const std::filesystem::path& path);

    bool hash_matches() const;
    friend bool operator==(const SourceDocument&, const SourceDocument&) = default;
};

/// "python" for .py, "cpp" for .cc and so on; "text" when unknown.
std::string language_for(const std::filesystem::path& path);

struct TranslationResult {
    PseudoProgram program;
    int attempts = 1;
    std::string raw_response;
};

enum class PipelineErrorKind { SchemaAfterRetries };

class PipelineError : public std::runtime_error {
public:
    PipelineError(PipelineErrorKind kind, const std::string& message, int attempts);

    PipelineErrorKind kind() const noexcept { return kind_; }
    int attempts() const noexcept { return attempts_; }

private:
    PipelineErrorKind kind_;
    int attempts_;
};

llm::ChatRequest translation_request(const SourceDocument& source, const std::optional<PseudoProgram>& previous);
llm::ChatRequest generation_request(const PseudoProgram& program, const std::optional<SourceDocument>& existing,
                                    const std::string& language);

TranslationResult code_to_pseudo(const SourceDocument& source, const std::optional<PseudoProgram>& previous,
                                 const llm::Client& client);

/// Revises `existing` minimally when given, otherwise writes a new file at
/// `target` (whose extension picks the language).
SourceDocument pseudo_to_code(const PseudoProgram& program, const std::optional<SourceDocument>& existing,
                              const llm::Client& client, const std::filesystem::path& target = {});

} // namespace codezoom
