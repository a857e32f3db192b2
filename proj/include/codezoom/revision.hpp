#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "codezoom/grammar.hpp"
#include "codezoom/llm_client.hpp"
#include "codezoom/pipeline.hpp"

namespace codezoom {

enum class EditKind { Addition, Deletion, Replacement };

std::string_view to_string(EditKind kind);

/// One maximal run of changed lines between two canonical renderings.
///
/// `range` is in the old rendering. For an Addition it is the single line
/// the new block is inserted before (one past the end when appending).
struct EditOp {
    EditKind kind;
    LineRange range;
    std::vector<std::string> context_before; // up to 3 old lines preceding range.start
    std::vector<std::string> old_block;
    std::vector<std::string> new_block;

    /// Throws InvariantError when the fields disagree with `kind`.
    void validate() const;
    friend bool operator==(const EditOp&, const EditOp&) = default;
};

std::vector<EditOp> diff_pseudo(const PseudoProgram& old_program, const PseudoProgram& new_program);
std::vector<EditOp> diff_lines(const std::vector<std::string>& old_lines, const std::vector<std::string>& new_lines);

/// Replays ops (ordered, non-overlapping, old-rendering positions) onto `old_lines`.
std::vector<std::string> apply_edit_ops(const std::vector<std::string>& old_lines, const std::vector<EditOp>& ops);

std::string build_revision_prompt(const EditOp& op);

nlohmann::json to_json(const EditOp& op);
EditOp edit_op_from_json(const nlohmann::json& j);

enum class PreviewStatus { Pending, Confirmed, Rejected };

std::string_view to_string(PreviewStatus status);

/// Changed region of the source; starts are 1-based, counts may be 0.
struct Hunk {
    int old_start = 1;
    int old_count = 0;
    int new_start = 1;
    int new_count = 0;
    std::vector<std::string> old_lines; // with their line terminators
    std::vector<std::string> new_lines;
    friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct DiffPreview {
    SourceDocument old_source;
    std::string new_source_text;
    std::vector<Hunk> hunks;
    PreviewStatus status = PreviewStatus::Pending;

    /// Unified diff of old against new with three lines of context.
    std::string unified() const;
    friend bool operator==(const DiffPreview&, const DiffPreview&) = default;
};

DiffPreview make_preview(const SourceDocument& old_source, std::string new_text);

/// Applies the hunks to the old text.
std::string apply_hunks(const std::string& old_text, const std::vector<Hunk>& hunks);

nlohmann::json to_json(const DiffPreview& preview);
DiffPreview preview_from_json(const nlohmann::json& j);

llm::ChatRequest revision_request(const SourceDocument& source, const PseudoProgram& old_program,
                                  const std::vector<EditOp>& ops);

/// One model call for all ops; the source is left untouched.
DiffPreview apply_revision(const SourceDocument& source, const PseudoProgram& old_program,
                           const std::vector<EditOp>& ops, const llm::Client& client);

/// Marks the preview confirmed and returns the revised document; with
/// `write` the file at its path is replaced atomically. InvalidState unless pending.
SourceDocument confirm(DiffPreview& preview, bool write = true);
void reject(DiffPreview& preview);

} // namespace codezoom
