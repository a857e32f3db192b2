#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "codezoom/errors.hpp"

namespace codezoom {

/// Natural-language text of a statement, condition or goal.
///
/// Nonempty after trimming, single line, and free of the structural
/// delimiters `;{}()`. It may not begin with a section header keyword.
class Description {
public:
    /// Trims surrounding spaces and validates; throws InvariantError.
    explicit Description(std::string_view text);

    const std::string& text() const noexcept { return text_; }

    friend bool operator==(const Description&, const Description&) = default;

    /// Returns the reason `text` (already trimmed) is not a valid description,
    /// or nullopt when it is.
    static std::optional<std::string> violation(std::string_view text);

private:
    std::string text_;
};

struct Statement;
using Block = std::vector<Statement>;

struct SimpleStmt {
    Description text;
    friend bool operator==(const SimpleStmt&, const SimpleStmt&) = default;
};

struct WhileStmt {
    Description cond;
    Block body;
    friend bool operator==(const WhileStmt&, const WhileStmt&) = default;
};

struct ForStmt {
    Description cond;
    Block body;
    friend bool operator==(const ForStmt&, const ForStmt&) = default;
};

struct ElifArm {
    Description cond;
    Block body;
    friend bool operator==(const ElifArm&, const ElifArm&) = default;
};

struct IfStmt {
    Description cond;
    Block then;
    std::vector<ElifArm> elifs;
    std::optional<Block> else_;
    friend bool operator==(const IfStmt&, const IfStmt&) = default;
};

struct Statement {
    std::variant<SimpleStmt, WhileStmt, IfStmt, ForStmt> node;

    friend bool operator==(const Statement&, const Statement&) = default;

    bool is_simple() const noexcept { return std::holds_alternative<SimpleStmt>(node); }

    /// Number of nested blocks: 0 for simple, 1 for loops, 1 + elifs (+ else) for if.
    std::size_t arm_count() const noexcept;
    const Block& arm(std::size_t index) const;
    Block& arm(std::size_t index);
};

Statement simple(std::string_view text);
Statement while_loop(std::string_view cond, Block body);
Statement for_loop(std::string_view cond, Block body);
Statement if_chain(std::string_view cond, Block then, std::vector<ElifArm> elifs = {},
                   std::optional<Block> else_ = std::nullopt);

struct PseudoProgram {
    Description goal;
    Block steps;
    friend bool operator==(const PseudoProgram&, const PseudoProgram&) = default;
};

/// Throws InvariantError if any block is empty.
void check_invariants(const PseudoProgram& program);
void check_invariants(const Block& block);

/// True when the goal reads as more than one sentence.
bool goal_lint_multiple_sentences(const PseudoProgram& program);

// ---------------------------------------------------------------------------
// Paths and line maps

/// Address of a statement: alternating [index, arm, index, arm, ..., index].
/// Odd length always; the even-length prefixes address statement lists.
using NodePath = std::vector<std::size_t>;

const Statement& statement_at(const PseudoProgram& program, const NodePath& path);
/// `list_path` has even length; the empty path is the top-level steps.
const Block& block_at(const PseudoProgram& program, const NodePath& list_path);
Block& block_at(PseudoProgram& program, const NodePath& list_path);

/// 1-based inclusive line range.
struct LineRange {
    int start = 1;
    int end = 1;

    LineRange() = default;
    /// Throws RangeError unless 1 <= start <= end.
    LineRange(int start, int end);

    int length() const noexcept { return end - start + 1; }
    bool contains(int line) const noexcept { return line >= start && line <= end; }
    friend bool operator==(const LineRange&, const LineRange&) = default;
};

enum class LineKind { GoalHeader, StepsHeader, Simple, BlockOpen, ElifOpen, ElseOpen, BlockClose };

std::string_view to_string(LineKind kind);

struct LineEntry {
    int line;
    NodePath path;       // statement path; empty for header lines
    LineKind kind;
    std::size_t arm = 0; // arm opened or closed by this line
};

class LineMap {
public:
    LineMap() = default;
    explicit LineMap(std::vector<LineEntry> entries);

    const std::vector<LineEntry>& entries() const noexcept { return entries_; }
    int line_count() const noexcept { return static_cast<int>(entries_.size()); }
    const LineEntry& at(int line) const;

    /// Lines covered by the statement at `path`.
    LineRange span_of(const NodePath& path) const;

private:
    std::vector<LineEntry> entries_;
};

struct RenderOptions {
    int indent_width = 2;
    bool with_line_numbers = false;
};

struct Rendering {
    std::string text;
    std::vector<std::string> lines; // without numbers, without trailing newline
    LineMap map;
};

Rendering render(const PseudoProgram& program, const RenderOptions& options = {});
/// Canonical text only.
std::string render_text(const PseudoProgram& program);
/// Renders a statement list at the given depth (no headers); used for
/// prompts and cache displays.
std::vector<std::string> render_block(const Block& block, int depth = 0, int indent_width = 2);

PseudoProgram parse(std::string_view text);

// ---------------------------------------------------------------------------
// Interchange (JSON) form

nlohmann::json to_interchange(const PseudoProgram& program);
nlohmann::json to_interchange(const Block& block);
nlohmann::json to_interchange(const Statement& statement);

PseudoProgram from_interchange(const nlohmann::json& document);
/// Validates a `[Node+]` array; `path` prefixes error paths.
Block block_from_interchange(const nlohmann::json& nodes, const std::string& path = "steps");

/// JSON Schema text describing the interchange document.
std::string_view interchange_schema();

// ---------------------------------------------------------------------------
// Range selection

struct BlockSelection {
    NodePath list_path;     // even-length path of the containing list
    std::size_t first = 0;  // first selected sibling
    std::size_t last = 0;   // last selected sibling (inclusive)
    LineRange lines;        // rendered lines of the selection
    bool widened = false;   // selection covers more than the requested range

    std::size_t count() const noexcept { return last - first + 1; }
    NodePath statement_path(std::size_t sibling) const;
};

/// Selects the minimal run of whole sibling statements covering `range`.
BlockSelection slice(const PseudoProgram& program, const LineMap& map, LineRange range);

/// Copies of the selected statements.
Block selected_statements(const PseudoProgram& program, const BlockSelection& selection);

/// Replaces the selected siblings with `replacement`; the inserted statements
/// start at `selection.first` in the same list.
PseudoProgram replace_selection(const PseudoProgram& program, const BlockSelection& selection,
                                const Block& replacement);

} // namespace codezoom
