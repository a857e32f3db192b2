#include "codezoom/revision.hpp"

#include "codezoom/line_diff.hpp"
#include "codezoom/prompts.hpp"
#include "codezoom/util.hpp"

namespace codezoom {

using nlohmann::json;

std::string_view to_string(EditKind kind)
{
    switch (kind) {
    case EditKind::Addition: return "addition";
    case EditKind::Deletion: return "deletion";
    case EditKind::Replacement: return "replacement";
    }
    return "?";
}

std::string_view to_string(PreviewStatus status)
{
    switch (status) {
    case PreviewStatus::Pending: return "pending";
    case PreviewStatus::Confirmed: return "confirmed";
    case PreviewStatus::Rejected: return "rejected";
    }
    return "?";
}

void EditOp::validate() const
{
    bool ok = kind == EditKind::Addition   ? old_block.empty() && !new_block.empty() && range.length() == 1
              : kind == EditKind::Deletion ? !old_block.empty() && new_block.empty()
                                           : !old_block.empty() && !new_block.empty();
    if (kind != EditKind::Addition && static_cast<int>(old_block.size()) != range.length())
        ok = false;
    if (static_cast<int>(context_before.size()) != std::min(3, range.start - 1))
        ok = false;
    if (!ok)
        throw InvariantError("edit operation fields do not match its kind");
}

std::vector<EditOp> diff_lines(const std::vector<std::string>& old_lines, const std::vector<std::string>& new_lines)
{
    std::vector<EditOp> ops;
    for (const auto& run : diff::change_runs(old_lines, new_lines)) {
        int start = static_cast<int>(run.old_start) + 1;
        EditOp op{run.old_lines.empty()   ? EditKind::Addition
                  : run.new_lines.empty() ? EditKind::Deletion
                                          : EditKind::Replacement,
                  LineRange(start, run.old_lines.empty() ? start : start + static_cast<int>(run.old_lines.size()) - 1),
                  {},
                  run.old_lines,
                  run.new_lines};
        std::size_t from = run.old_start >= 3 ? run.old_start - 3 : 0;
        op.context_before.assign(old_lines.begin() + from, old_lines.begin() + run.old_start);
        ops.push_back(std::move(op));
    }
    return ops;
}

std::vector<EditOp> diff_pseudo(const PseudoProgram& old_program, const PseudoProgram& new_program)
{
    return diff_lines(render(old_program).lines, render(new_program).lines);
}

std::vector<std::string> apply_edit_ops(const std::vector<std::string>& old_lines, const std::vector<EditOp>& ops)
{
    std::vector<std::string> out;
    std::size_t cursor = 0;
    for (const auto& op : ops) {
        op.validate();
        std::size_t at = static_cast<std::size_t>(op.range.start - 1);
        if (at < cursor || at > old_lines.size())
            throw std::invalid_argument("edit operations overlap or are out of order");
        out.insert(out.end(), old_lines.begin() + cursor, old_lines.begin() + at);
        cursor = at;
        if (op.kind != EditKind::Addition) {
            if (at + op.old_block.size() > old_lines.size() ||
                !std::equal(op.old_block.begin(), op.old_block.end(), old_lines.begin() + at))
                throw std::invalid_argument("edit operation does not match the old lines");
            cursor += op.old_block.size();
        }
        out.insert(out.end(), op.new_block.begin(), op.new_block.end());
    }
    out.insert(out.end(), old_lines.begin() + cursor, old_lines.end());
    return out;
}

namespace {

std::string fenced(const std::vector<std::string>& lines)
{
    std::string out = "```pseudocode\n";
    for (const auto& l : lines)
        out += l + "\n";
    return out + "```\n";
}

std::string lines_label(const LineRange& r)
{
    return r.start == r.end ? std::to_string(r.start) : std::to_string(r.start) + "-" + std::to_string(r.end);
}

} // namespace

std::string build_revision_prompt(const EditOp& op)
{
    op.validate();
    std::string out =
        op.context_before.empty() ? "At the beginning of the pseudocode,\n" : "After the context \n" + fenced(op.context_before);
    switch (op.kind) {
    case EditKind::Replacement:
        out += " the pseudocode in lines " + lines_label(op.range) + ":\n" + fenced(op.old_block) + "is replaced with:\n" +
               fenced(op.new_block);
        break;
    case EditKind::Deletion:
        out += " the pseudocode in lines " + lines_label(op.range) + " is deleted:\n" + fenced(op.old_block);
        break;
    case EditKind::Addition:
        out += op.range.start == 1 ? " the following pseudocode is inserted at the beginning:\n"
                                   : " the following pseudocode is inserted after line " +
                                         std::to_string(op.range.start - 1) + ":\n";
        out += fenced(op.new_block);
        break;
    }
    return out;
}

json to_json(const EditOp& op)
{
    return {{"kind", to_string(op.kind)},
            {"start", op.range.start},
            {"end", op.range.end},
            {"context_before", op.context_before},
            {"old_block", op.old_block},
            {"new_block", op.new_block}};
}

EditOp edit_op_from_json(const json& j)
{
    try {
        std::string kind = j.at("kind");
        EditOp op{kind == "addition"   ? EditKind::Addition
                  : kind == "deletion" ? EditKind::Deletion
                  : kind == "replacement"
                      ? EditKind::Replacement
                      : throw SchemaError("kind", "unknown edit kind " + kind),
                  LineRange(j.at("start").get<int>(), j.at("end").get<int>()),
                  j.at("context_before").get<std::vector<std::string>>(),
                  j.at("old_block").get<std::vector<std::string>>(),
                  j.at("new_block").get<std::vector<std::string>>()};
        op.validate();
        return op;
    } catch (const json::exception& e) {
        throw SchemaError("edit_op", e.what());
    }
}

DiffPreview make_preview(const SourceDocument& old_source, std::string new_text)
{
    DiffPreview p{old_source, std::move(new_text), {}, PreviewStatus::Pending};
    auto a = diff::split_keep_newlines(old_source.text);
    auto b = diff::split_keep_newlines(p.new_source_text);
    for (const auto& run : diff::change_runs(a, b)) {
        Hunk h;
        h.old_count = static_cast<int>(run.old_lines.size());
        h.new_count = static_cast<int>(run.new_lines.size());
        h.old_start = static_cast<int>(run.old_start) + (h.old_count ? 1 : 0);
        h.new_start = static_cast<int>(run.new_start) + (h.new_count ? 1 : 0);
        h.old_lines = run.old_lines;
        h.new_lines = run.new_lines;
        p.hunks.push_back(std::move(h));
    }
    return p;
}

std::string apply_hunks(const std::string& old_text, const std::vector<Hunk>& hunks)
{
    std::vector<diff::ChangeRun> runs;
    for (const auto& h : hunks)
        runs.push_back({static_cast<std::size_t>(h.old_count ? h.old_start - 1 : h.old_start),
                        static_cast<std::size_t>(h.new_count ? h.new_start - 1 : h.new_start), h.old_lines, h.new_lines});
    return diff::join(diff::apply_runs(diff::split_keep_newlines(old_text), runs));
}

std::string DiffPreview::unified() const
{
    std::string name = old_source.path.empty() ? "source" : old_source.path.filename().generic_string();
    return diff::unified_diff(diff::split_keep_newlines(old_source.text), diff::split_keep_newlines(new_source_text),
                              "a/" + name, "b/" + name);
}

json to_json(const DiffPreview& preview)
{
    json hunks = json::array();
    for (const auto& h : preview.hunks)
        hunks.push_back({{"old_start", h.old_start},
                         {"old_count", h.old_count},
                         {"new_start", h.new_start},
                         {"new_count", h.new_count},
                         {"old_lines", h.old_lines},
                         {"new_lines", h.new_lines}});
    return {{"old_source",
             {{"path", preview.old_source.path.generic_string()},
              {"language_hint", preview.old_source.language_hint},
              {"text", preview.old_source.text},
              {"content_hash", preview.old_source.content_hash}}},
            {"new_source_text", preview.new_source_text},
            {"hunks", hunks},
            {"status", to_string(preview.status)},
            {"unified_diff", preview.unified()}};
}

DiffPreview preview_from_json(const json& j)
{
    try {
        const auto& src = j.at("old_source");
        auto old_source = SourceDocument::from_text(src.at("path").get<std::string>(), src.at("text").get<std::string>(),
                                                    src.at("language_hint").get<std::string>());
        if (old_source.content_hash != src.at("content_hash").get<std::string>())
            throw SchemaError("old_source.content_hash", "does not match the stored text");
        auto p = make_preview(old_source, j.at("new_source_text").get<std::string>());
        std::string status = j.at("status");
        p.status = status == "pending"     ? PreviewStatus::Pending
                   : status == "confirmed" ? PreviewStatus::Confirmed
                   : status == "rejected"  ? PreviewStatus::Rejected
                                           : throw SchemaError("status", "unknown preview status " + status);
        return p;
    } catch (const json::exception& e) {
        throw SchemaError("preview", e.what());
    }
}

llm::ChatRequest revision_request(const SourceDocument& source, const PseudoProgram& old_program,
                                  const std::vector<EditOp>& ops)
{
    if (ops.empty())
        throw std::invalid_argument("no pseudocode edits to apply");
    std::string edits;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i)
            edits += "\n";
        edits += build_revision_prompt(ops[i]);
    }
    llm::ChatRequest req;
    req.system_text = prompts::fill_resource("revision_system", {{"grammar", std::string(prompts::resource("grammar"))}});
    req.user_text = prompts::fill_resource("revision_user", {{"language", source.language_hint},
                                                             {"source", prompts::terminated(source.text)},
                                                             {"pseudocode", render_text(old_program)},
                                                             {"edits", edits}});
    return req;
}

DiffPreview apply_revision(const SourceDocument& source, const PseudoProgram& old_program,
                           const std::vector<EditOp>& ops, const llm::Client& client)
{
    auto response = client.complete(revision_request(source, old_program, ops));
    return make_preview(source, llm::strip_code_fence(response.text));
}

namespace {

void require_pending(const DiffPreview& preview)
{
    if (preview.status != PreviewStatus::Pending)
        throw InvalidState("preview is " + std::string(to_string(preview.status)) + ", not pending");
}

} // namespace

SourceDocument confirm(DiffPreview& preview, bool write)
{
    require_pending(preview);
    auto doc = SourceDocument::from_text(preview.old_source.path, preview.new_source_text, preview.old_source.language_hint);
    if (write)
        write_file_atomic(doc.path, doc.text);
    preview.status = PreviewStatus::Confirmed;
    return doc;
}

void reject(DiffPreview& preview)
{
    require_pending(preview);
    preview.status = PreviewStatus::Rejected;
}

} // namespace codezoom
