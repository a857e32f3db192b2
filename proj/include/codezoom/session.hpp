#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "codezoom/grammar.hpp"
#include "codezoom/llm_client.hpp"
#include "codezoom/pipeline.hpp"
#include "codezoom/revision.hpp"
#include "codezoom/zoom.hpp"

namespace codezoom {

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnreadableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HistoryEvent {
    std::string timestamp; // UTC, ISO 8601
    std::string kind;
    std::string digest; // SHA-256 of the event's resulting payload
    friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

/// Iteration state for one source file.
///
/// `baseline` is the pseudocode the source currently agrees with; the
/// pending edits are diff_pseudo(baseline, program).
struct Session {
    std::string id;
    std::uint64_t sequence = 0; // creation order within a store
    SourceDocument source;
    std::optional<PseudoProgram> program;
    std::optional<PseudoProgram> baseline;
    ZoomCache zoom_cache;
    std::optional<DiffPreview> pending_preview;
    std::optional<PseudoProgram> preview_program; // pseudocode the pending preview implements
    std::vector<HistoryEvent> history;

    std::vector<EditOp> pending_edits() const;
    void record(std::string kind, std::string_view payload);
};

nlohmann::json to_json(const Session& session);
Session session_from_json(const nlohmann::json& j);
/// Client-facing view: the stored state plus canonical rendering and pending edits.
nlohmann::json session_view(const Session& session);

enum class Direction { ToPseudo, ToCode };

struct ZoomOutcome {
    Session session;
    ZoomResult result;
};

/// Owns the sessions under `state_dir/sessions`. Calls on one session are
/// serialized; different sessions proceed concurrently.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path state_dir);

    const std::filesystem::path& state_dir() const noexcept { return state_dir_; }

    Session create(const std::filesystem::path& source_path);
    Session get(const std::string& id);
    /// Newest session whose source is `source_path`.
    std::optional<std::string> find_by_source(const std::filesystem::path& source_path);

    Session translate(const std::string& id, Direction direction, const llm::Client& client);
    ZoomOutcome zoom(const std::string& id, ZoomOp op, LineRange range, const llm::Client& client);
    std::vector<EditOp> put_pseudocode(const std::string& id, std::string_view text);
    DiffPreview apply(const std::string& id, const llm::Client& client);
    Session confirm(const std::string& id);
    Session reject(const std::string& id);

    std::filesystem::path session_file(const std::string& id) const;

private:
    std::shared_ptr<std::mutex> lock_for(const std::string& id);
    Session load(const std::string& id) const;
    void save(const Session& session) const;

    template <class F>
    auto with_session(const std::string& id, F&& f);

    std::filesystem::path state_dir_;
    std::mutex locks_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

/// HTTP status and `{error_kind, message, location?, attempts?}` body for the
/// exception currently being handled.
struct ErrorInfo {
    int status;
    nlohmann::json body;
};

ErrorInfo describe_current_exception();

} // namespace codezoom
