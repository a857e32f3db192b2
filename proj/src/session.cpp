#include "codezoom/session.hpp"

#include <ctime>
#include <random>

#include "codezoom/util.hpp"

namespace codezoom {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_now()
{
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string new_id()
{
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    return buf;
}

json source_json(const SourceDocument& s)
{
    return {{"path", s.path.generic_string()},
            {"language_hint", s.language_hint},
            {"text", s.text},
            {"content_hash", s.content_hash}};
}

SourceDocument source_from_json(const json& j)
{
    auto doc = SourceDocument::from_text(j.at("path").get<std::string>(), j.at("text").get<std::string>(),
                                         j.at("language_hint").get<std::string>());
    if (doc.content_hash != j.at("content_hash").get<std::string>())
        throw SchemaError("source.content_hash", "does not match the stored text");
    return doc;
}

json optional_program(const std::optional<PseudoProgram>& p)
{
    return p ? to_interchange(*p) : json(nullptr);
}

std::optional<PseudoProgram> program_from(const json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    return from_interchange(j[key]);
}

bool valid_utf8(const std::string& text)
{
    try {
        (void)json(text).dump();
        return true;
    } catch (const json::type_error&) {
        return false;
    }
}

} // namespace

std::vector<EditOp> Session::pending_edits() const
{
    if (!baseline || !program)
        return {};
    return diff_pseudo(*baseline, *program);
}

void Session::record(std::string kind, std::string_view payload)
{
    history.push_back({utc_now(), std::move(kind), sha256_hex(payload)});
}

json to_json(const Session& s)
{
    json history = json::array();
    for (const auto& e : s.history)
        history.push_back({{"timestamp", e.timestamp}, {"kind", e.kind}, {"digest", e.digest}});
    return {{"id", s.id},
            {"sequence", s.sequence},
            {"source", source_json(s.source)},
            {"program", optional_program(s.program)},
            {"baseline", optional_program(s.baseline)},
            {"zoom_cache", s.zoom_cache.to_json()},
            {"pending_preview", s.pending_preview ? to_json(*s.pending_preview) : json(nullptr)},
            {"preview_program", optional_program(s.preview_program)},
            {"history", history}};
}

Session session_from_json(const json& j)
{
    try {
        Session s;
        s.id = j.at("id").get<std::string>();
        s.sequence = j.at("sequence").get<std::uint64_t>();
        s.source = source_from_json(j.at("source"));
        s.program = program_from(j, "program");
        s.baseline = program_from(j, "baseline");
        s.zoom_cache = ZoomCache::from_json(j.at("zoom_cache"));
        if (!j.at("pending_preview").is_null()) {
            s.pending_preview = preview_from_json(j["pending_preview"]);
            if (s.pending_preview->status != PreviewStatus::Pending)
                throw SchemaError("pending_preview.status", "stored preview is not pending");
        }
        s.preview_program = program_from(j, "preview_program");
        for (const auto& e : j.at("history"))
            s.history.push_back({e.at("timestamp"), e.at("kind"), e.at("digest")});
        return s;
    } catch (const json::exception& e) {
        throw SchemaError("session", e.what());
    }
}

json session_view(const Session& s)
{
    json view = to_json(s);
    view.erase("zoom_cache");
    view.erase("preview_program");
    view["pseudocode"] = s.program ? json(render_text(*s.program)) : json(nullptr);
    json lines = json::array();
    if (s.program) {
        auto rendering = render(*s.program);
        for (const auto& e : rendering.map.entries())
            lines.push_back({{"line", e.line}, {"kind", to_string(e.kind)}, {"path", e.path}});
    }
    view["line_map"] = lines;
    json edits = json::array();
    for (const auto& op : s.pending_edits())
        edits.push_back(to_json(op));
    view["pending_edits"] = edits;
    view["zoom_cache_entries"] = s.zoom_cache.size();
    return view;
}

SessionStore::SessionStore(fs::path state_dir) : state_dir_(std::move(state_dir))
{
    fs::create_directories(state_dir_ / "sessions");
}

fs::path SessionStore::session_file(const std::string& id) const
{
    return state_dir_ / "sessions" / (id + ".json");
}

std::shared_ptr<std::mutex> SessionStore::lock_for(const std::string& id)
{
    std::lock_guard lock(locks_mutex_);
    auto& m = locks_[id];
    if (!m)
        m = std::make_shared<std::mutex>();
    return m;
}

Session SessionStore::load(const std::string& id) const
{
    bool plausible = !id.empty() && id.find_first_not_of("0123456789abcdef") == std::string::npos;
    auto path = session_file(id);
    if (!plausible || !fs::exists(path))
        throw NotFoundError("no session " + id);
    return session_from_json(json::parse(read_file(path)));
}

void SessionStore::save(const Session& session) const
{
    write_file_atomic(session_file(session.id), to_json(session).dump(1));
}

template <class F>
auto SessionStore::with_session(const std::string& id, F&& f)
{
    auto mutex = lock_for(id);
    std::lock_guard lock(*mutex);
    Session s = load(id);
    auto result = f(s);
    save(s);
    return result;
}

Session SessionStore::create(const fs::path& source_path)
{
    fs::path path = fs::absolute(source_path).lexically_normal();
    if (!fs::exists(path))
        throw NotFoundError("source file not found: " + source_path.string());
    if (!fs::is_regular_file(path))
        throw UnreadableError("not a regular file: " + source_path.string());
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw UnreadableError(e.what());
    }
    if (!valid_utf8(text))
        throw UnreadableError("source file is not UTF-8 text: " + source_path.string());

    std::lock_guard lock(locks_mutex_);
    Session s;
    s.id = new_id();
    for (const auto& entry : fs::directory_iterator(state_dir_ / "sessions")) {
        if (entry.path().extension() != ".json")
            continue;
        try {
            auto j = json::parse(read_file(entry.path()));
            s.sequence = std::max<std::uint64_t>(s.sequence, j.at("sequence").get<std::uint64_t>());
        } catch (const std::exception&) {
        }
    }
    ++s.sequence;
    s.source = SourceDocument::from_text(path, std::move(text));
    s.record("create", s.source.text);
    save(s);
    return s;
}

Session SessionStore::get(const std::string& id)
{
    auto mutex = lock_for(id);
    std::lock_guard lock(*mutex);
    return load(id);
}

std::optional<std::string> SessionStore::find_by_source(const fs::path& source_path)
{
    fs::path wanted = fs::absolute(source_path).lexically_normal();
    std::optional<std::string> best;
    std::uint64_t best_seq = 0;
    for (const auto& entry : fs::directory_iterator(state_dir_ / "sessions")) {
        if (entry.path().extension() != ".json")
            continue;
        try {
            auto j = json::parse(read_file(entry.path()));
            if (fs::path(j.at("source").at("path").get<std::string>()) == wanted &&
                j.at("sequence").get<std::uint64_t>() >= best_seq) {
                best_seq = j["sequence"];
                best = j.at("id").get<std::string>();
            }
        } catch (const std::exception&) {
        }
    }
    return best;
}

Session SessionStore::translate(const std::string& id, Direction direction, const llm::Client& client)
{
    return with_session(id, [&](Session& s) {
        if (s.pending_preview)
            throw InvalidState("a preview is pending; confirm or reject it first");
        if (direction == Direction::ToPseudo) {
            auto result = code_to_pseudo(s.source, s.program, client);
            s.program = result.program;
            s.baseline = result.program;
            s.record("translate-to-pseudo", render_text(result.program));
        } else {
            if (!s.program)
                throw InvalidState("the session has no pseudocode to generate code from");
            std::optional<SourceDocument> existing;
            if (!s.source.text.empty())
                existing = s.source;
            auto doc = pseudo_to_code(*s.program, existing, client, s.source.path);
            s.pending_preview = make_preview(s.source, doc.text);
            s.preview_program = s.program;
            s.record("translate-to-code", doc.text);
        }
        return s;
    });
}

ZoomOutcome SessionStore::zoom(const std::string& id, ZoomOp op, LineRange range, const llm::Client& client)
{
    return with_session(id, [&](Session& s) {
        if (!s.program)
            throw InvalidState("the session has no pseudocode to zoom");
        if (s.baseline && *s.baseline != *s.program)
            throw InvalidState("the pseudocode has unapplied edits; apply them before zooming");
        auto result = codezoom::zoom(op, *s.program, s.source, range, s.zoom_cache, client);
        s.program = result.program;
        if (s.baseline)
            s.baseline = result.program;
        s.record(op == ZoomOp::Expand ? "zoom-expand" : "zoom-collapse", render_text(result.program));
        return ZoomOutcome{s, result};
    });
}

std::vector<EditOp> SessionStore::put_pseudocode(const std::string& id, std::string_view text)
{
    return with_session(id, [&](Session& s) {
        auto program = parse(text);
        s.program = program;
        s.record("edit", render_text(program));
        return s.pending_edits();
    });
}

DiffPreview SessionStore::apply(const std::string& id, const llm::Client& client)
{
    return with_session(id, [&](Session& s) {
        if (s.pending_preview)
            throw InvalidState("a preview is already pending");
        auto ops = s.pending_edits();
        if (ops.empty())
            throw InvalidState("there are no pseudocode edits to apply");
        auto preview = apply_revision(s.source, *s.baseline, ops, client);
        s.pending_preview = preview;
        s.preview_program = s.program;
        s.record("apply", preview.new_source_text);
        return preview;
    });
}

Session SessionStore::confirm(const std::string& id)
{
    return with_session(id, [&](Session& s) {
        if (!s.pending_preview)
            throw InvalidState("there is no pending preview to confirm");
        s.source = codezoom::confirm(*s.pending_preview, true);
        if (s.preview_program)
            s.baseline = s.preview_program;
        s.pending_preview.reset();
        s.preview_program.reset();
        s.record("confirm", s.source.text);
        return s;
    });
}

Session SessionStore::reject(const std::string& id)
{
    return with_session(id, [&](Session& s) {
        if (!s.pending_preview)
            throw InvalidState("there is no pending preview to reject");
        s.pending_preview.reset();
        s.preview_program.reset();
        s.record("reject", s.source.text);
        return s;
    });
}

ErrorInfo describe_current_exception()
{
    auto body = [](std::string kind, const std::string& message) {
        return json{{"error_kind", std::move(kind)}, {"message", message}};
    };
    try {
        throw;
    } catch (const NotFoundError& e) {
        return {404, body("not-found", e.what())};
    } catch (const UnreadableError& e) {
        return {422, body("unreadable", e.what())};
    } catch (const ParseError& e) {
        auto b = body("parse-error", e.message());
        b["location"] = {{"line", e.line()}, {"column", e.column()}};
        b["expected"] = e.expected();
        return {422, b};
    } catch (const SchemaError& e) {
        auto b = body("schema-error", e.message());
        b["location"] = {{"path", e.path()}};
        return {422, b};
    } catch (const RangeError& e) {
        return {422, body("range-error", e.what())};
    } catch (const InvariantError& e) {
        return {422, body("invariant-error", e.what())};
    } catch (const InvalidState& e) {
        return {409, body("invalid-state", e.what())};
    } catch (const SummaryShapeError& e) {
        auto b = body("summary-shape", e.what());
        b["attempts"] = e.attempts();
        return {502, b};
    } catch (const PipelineError& e) {
        auto b = body("schema-after-retries", e.what());
        if (b["message"].get<std::string>().starts_with("schema-after-retries: "))
            b["message"] = b["message"].get<std::string>().substr(22);
        b["attempts"] = e.attempts();
        return {502, b};
    } catch (const llm::LlmError& e) {
        auto b = body(std::string(llm::to_string(e.kind())), e.message());
        b["attempts"] = e.attempts();
        return {502, b};
    } catch (const json::exception& e) {
        return {422, body("schema-error", e.what())};
    } catch (const std::invalid_argument& e) {
        return {422, body("invalid-argument", e.what())};
    } catch (const std::exception& e) {
        return {500, body("internal", e.what())};
    }
}

} // namespace codezoom
