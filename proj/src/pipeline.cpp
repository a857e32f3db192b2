#include "codezoom/pipeline.hpp"

#include <algorithm>
#include <map>

#include "codezoom/prompts.hpp"
#include "codezoom/util.hpp"

namespace codezoom {

SourceDocument SourceDocument::from_text(std::filesystem::path path, std::string text, std::string language_hint)
{
    SourceDocument doc;
    doc.language_hint = language_hint.empty() ? language_for(path) : std::move(language_hint);
    doc.path = std::move(path);
    doc.content_hash = sha256_hex(text);
    doc.text = std::move(text);
    return doc;
}

SourceDocument SourceDocument::load(const std::filesystem::path& path)
{
    return from_text(path, read_file(path));
}

bool SourceDocument::hash_matches() const
{
    return content_hash == sha256_hex(text);
}

std::string language_for(const std::filesystem::path& path)
{
    static const std::map<std::string, std::string> by_ext{
        {".py", "python"}, {".c", "c"},         {".h", "c"},       {".cc", "cpp"},     {".cpp", "cpp"},
        {".hpp", "cpp"},   {".cxx", "cpp"},     {".js", "javascript"}, {".ts", "typescript"},
        {".java", "java"}, {".go", "go"},       {".rs", "rust"},   {".rb", "ruby"},    {".cs", "csharp"},
        {".kt", "kotlin"}, {".swift", "swift"}, {".sh", "bash"},   {".sql", "sql"},
    };
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    auto it = by_ext.find(ext);
    return it == by_ext.end() ? "text" : it->second;
}

PipelineError::PipelineError(PipelineErrorKind kind, const std::string& message, int attempts)
    : std::runtime_error(message), kind_(kind), attempts_(attempts)
{
}

namespace {

std::string grammar_text()
{
    return std::string(prompts::resource("grammar"));
}

} // namespace

llm::ChatRequest translation_request(const SourceDocument& source, const std::optional<PseudoProgram>& previous)
{
    llm::ChatRequest req;
    req.system_text = prompts::fill_resource(
        "translate_system", {{"grammar", grammar_text()}, {"schema", std::string(interchange_schema())}});
    std::string prev;
    if (previous)
        prev = prompts::fill_resource("translate_previous", {{"pseudocode", render_text(*previous)}});
    req.user_text = prompts::fill_resource("translate_user", {{"language", source.language_hint},
                                                              {"source", prompts::terminated(source.text)},
                                                              {"previous", prev}});
    req.response_schema = llm::ResponseSchema::Program;
    return req;
}

llm::ChatRequest generation_request(const PseudoProgram& program, const std::optional<SourceDocument>& existing,
                                    const std::string& language)
{
    llm::ChatRequest req;
    req.system_text = prompts::fill_resource("generate_system", {{"grammar", grammar_text()}});
    if (existing && !existing->text.empty())
        req.user_text = prompts::fill_resource("revise_code_user", {{"language", language},
                                                                    {"source", prompts::terminated(existing->text)},
                                                                    {"pseudocode", render_text(program)}});
    else
        req.user_text =
            prompts::fill_resource("generate_user", {{"language", language}, {"pseudocode", render_text(program)}});
    return req;
}

TranslationResult code_to_pseudo(const SourceDocument& source, const std::optional<PseudoProgram>& previous,
                                 const llm::Client& client)
{
    if (source.text.empty())
        throw std::invalid_argument("source text is empty");
    try {
        auto response = client.complete(translation_request(source, previous));
        return {from_interchange(*response.structured), response.attempts, response.text};
    } catch (const llm::LlmError& e) {
        if (e.kind() == llm::LlmErrorKind::SchemaAfterRetries)
            throw PipelineError(PipelineErrorKind::SchemaAfterRetries, e.what(), e.attempts());
        throw;
    }
}

SourceDocument pseudo_to_code(const PseudoProgram& program, const std::optional<SourceDocument>& existing,
                              const llm::Client& client, const std::filesystem::path& target)
{
    check_invariants(program);
    std::filesystem::path path = existing ? existing->path : target;
    std::string language = existing && !existing->language_hint.empty() ? existing->language_hint : language_for(path);
    auto response = client.complete(generation_request(program, existing, language));
    return SourceDocument::from_text(path, llm::strip_code_fence(response.text), language);
}

} // namespace codezoom
