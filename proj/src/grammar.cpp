#include "codezoom/grammar.hpp"

#include <algorithm>
#include <stdexcept>

namespace codezoom {

namespace {

constexpr std::string_view kGoalKeyword = "GOAL:";
constexpr std::string_view kStepsKeyword = "STEPS:";

std::string_view trim_spaces(std::string_view s)
{
    while (!s.empty() && s.front() == ' ')
        s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ')
        s.remove_suffix(1);
    return s;
}

} // namespace

ParseError::ParseError(int line, int column, std::string message, std::vector<std::string> expected)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line), column_(column), message_(std::move(message)), expected_(std::move(expected))
{
}

SchemaError::SchemaError(std::string path, std::string message)
    : std::runtime_error(path + ": " + message), path_(std::move(path)), message_(std::move(message))
{
}

std::optional<std::string> Description::violation(std::string_view text)
{
    if (text.empty())
        return "description is empty";
    if (text.front() == ' ' || text.back() == ' ')
        return "description has surrounding whitespace";
    for (unsigned char c : text) {
        if (c == '\n' || c == '\r')
            return "description spans multiple lines";
        if (c == ';' || c == '{' || c == '}' || c == '(' || c == ')')
            return std::string("description contains delimiter '") + static_cast<char>(c) + "'";
        if (c < 0x20 || c == 0x7f)
            return "description contains a control character";
    }
    if (text.starts_with(kGoalKeyword) || text.starts_with(kStepsKeyword))
        return "description begins with a section header";
    return std::nullopt;
}

Description::Description(std::string_view text) : text_(trim_spaces(text))
{
    if (auto why = violation(text_))
        throw InvariantError(*why + ": \"" + std::string(text) + "\"");
}

std::size_t Statement::arm_count() const noexcept
{
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SimpleStmt>)
                return 0;
            else if constexpr (std::is_same_v<T, IfStmt>)
                return 1 + s.elifs.size() + (s.else_ ? 1 : 0);
            else
                return 1;
        },
        node);
}

const Block& Statement::arm(std::size_t index) const
{
    return const_cast<Statement*>(this)->arm(index);
}

Block& Statement::arm(std::size_t index)
{
    if (index >= arm_count())
        throw std::out_of_range("statement has no arm " + std::to_string(index));
    if (auto* w = std::get_if<WhileStmt>(&node))
        return w->body;
    if (auto* f = std::get_if<ForStmt>(&node))
        return f->body;
    auto& chain = std::get<IfStmt>(node);
    if (index == 0)
        return chain.then;
    if (index <= chain.elifs.size())
        return chain.elifs[index - 1].body;
    return *chain.else_;
}

Statement simple(std::string_view text)
{
    return Statement{SimpleStmt{Description(text)}};
}

Statement while_loop(std::string_view cond, Block body)
{
    return Statement{WhileStmt{Description(cond), std::move(body)}};
}

Statement for_loop(std::string_view cond, Block body)
{
    return Statement{ForStmt{Description(cond), std::move(body)}};
}

Statement if_chain(std::string_view cond, Block then, std::vector<ElifArm> elifs, std::optional<Block> else_)
{
    return Statement{IfStmt{Description(cond), std::move(then), std::move(elifs), std::move(else_)}};
}

void check_invariants(const Block& block)
{
    if (block.empty())
        throw InvariantError("block must contain at least one statement");
    for (const auto& s : block)
        for (std::size_t a = 0; a < s.arm_count(); ++a)
            check_invariants(s.arm(a));
}

void check_invariants(const PseudoProgram& program)
{
    if (program.steps.empty())
        throw InvariantError("STEPS must contain at least one statement");
    check_invariants(program.steps);
}

bool goal_lint_multiple_sentences(const PseudoProgram& program)
{
    // A sentence ends at '.', '!' or '?' followed by a space or the end.
    const std::string& g = program.goal.text();
    int terminals = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        char c = g[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == g.size() || g[i + 1] == ' '))
            ++terminals;
    }
    return terminals > 1;
}

// ---------------------------------------------------------------------------

const Statement& statement_at(const PseudoProgram& program, const NodePath& path)
{
    if (path.empty() || path.size() % 2 == 0)
        throw std::out_of_range("statement path must have odd length");
    NodePath list(path.begin(), path.end() - 1);
    const Block& block = block_at(program, list);
    if (path.back() >= block.size())
        throw std::out_of_range("statement index out of range");
    return block[path.back()];
}

const Block& block_at(const PseudoProgram& program, const NodePath& list_path)
{
    return block_at(const_cast<PseudoProgram&>(program), list_path);
}

Block& block_at(PseudoProgram& program, const NodePath& list_path)
{
    if (list_path.size() % 2 != 0)
        throw std::out_of_range("list path must have even length");
    Block* block = &program.steps;
    for (std::size_t i = 0; i < list_path.size(); i += 2) {
        if (list_path[i] >= block->size())
            throw std::out_of_range("statement index out of range");
        block = &(*block)[list_path[i]].arm(list_path[i + 1]);
    }
    return *block;
}

LineRange::LineRange(int s, int e) : start(s), end(e)
{
    if (s < 1 || e < s)
        throw RangeError("invalid line range " + std::to_string(s) + "-" + std::to_string(e));
}

std::string_view to_string(LineKind kind)
{
    switch (kind) {
    case LineKind::GoalHeader: return "goal-header";
    case LineKind::StepsHeader: return "steps-header";
    case LineKind::Simple: return "simple";
    case LineKind::BlockOpen: return "block-open";
    case LineKind::ElifOpen: return "elif-open";
    case LineKind::ElseOpen: return "else-open";
    case LineKind::BlockClose: return "block-close";
    }
    return "unknown";
}

LineMap::LineMap(std::vector<LineEntry> entries) : entries_(std::move(entries))
{
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].line != static_cast<int>(i) + 1)
            throw InvariantError("line map entries must be numbered consecutively from 1");
}

const LineEntry& LineMap::at(int line) const
{
    if (line < 1 || line > line_count())
        throw RangeError("line " + std::to_string(line) + " is outside the document (1-" +
                         std::to_string(line_count()) + ")");
    return entries_[static_cast<std::size_t>(line - 1)];
}

LineRange LineMap::span_of(const NodePath& path) const
{
    int first = 0;
    int last = 0;
    for (const auto& e : entries_) {
        if (e.path.size() >= path.size() && std::equal(path.begin(), path.end(), e.path.begin())) {
            if (first == 0)
                first = e.line;
            last = e.line;
        }
    }
    if (first == 0)
        throw RangeError("statement path not present in line map");
    return LineRange(first, last);
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

class Renderer {
public:
    explicit Renderer(int indent_width) : indent_width_(indent_width) {}

    void emit(int depth, std::string text, NodePath path, LineKind kind, std::size_t arm = 0)
    {
        lines_.push_back(std::string(static_cast<std::size_t>(depth * indent_width_), ' ') + std::move(text));
        entries_.push_back(LineEntry{static_cast<int>(lines_.size()), std::move(path), kind, arm});
    }

    void block(const Block& statements, int depth, const NodePath& list_path)
    {
        for (std::size_t i = 0; i < statements.size(); ++i) {
            NodePath path = list_path;
            path.push_back(i);
            statement(statements[i], depth, path);
        }
    }

    void arm(const Block& body, int depth, const NodePath& path, std::size_t arm_index)
    {
        NodePath list = path;
        list.push_back(arm_index);
        block(body, depth + 1, list);
        emit(depth, "}", path, LineKind::BlockClose, arm_index);
    }

    void statement(const Statement& s, int depth, const NodePath& path)
    {
        if (auto* simple = std::get_if<SimpleStmt>(&s.node)) {
            emit(depth, simple->text.text() + ";", path, LineKind::Simple);
        } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
            emit(depth, "while (" + w->cond.text() + ";) {", path, LineKind::BlockOpen);
            arm(w->body, depth, path, 0);
        } else if (auto* f = std::get_if<ForStmt>(&s.node)) {
            emit(depth, "for (" + f->cond.text() + ";) {", path, LineKind::BlockOpen);
            arm(f->body, depth, path, 0);
        } else {
            const auto& chain = std::get<IfStmt>(s.node);
            emit(depth, "if (" + chain.cond.text() + ";) {", path, LineKind::BlockOpen);
            arm(chain.then, depth, path, 0);
            for (std::size_t k = 0; k < chain.elifs.size(); ++k) {
                emit(depth, "elif (" + chain.elifs[k].cond.text() + ";) {", path, LineKind::ElifOpen, k + 1);
                arm(chain.elifs[k].body, depth, path, k + 1);
            }
            if (chain.else_) {
                std::size_t a = chain.elifs.size() + 1;
                emit(depth, "else {", path, LineKind::ElseOpen, a);
                arm(*chain.else_, depth, path, a);
            }
        }
    }

    std::vector<std::string> lines_;
    std::vector<LineEntry> entries_;

private:
    int indent_width_;
};

} // namespace

Rendering render(const PseudoProgram& program, const RenderOptions& options)
{
    Renderer r(options.indent_width);
    r.emit(0, std::string(kGoalKeyword) + " " + program.goal.text() + ";", {}, LineKind::GoalHeader);
    r.emit(0, std::string(kStepsKeyword), {}, LineKind::StepsHeader);
    r.block(program.steps, 0, {});

    Rendering out;
    const std::size_t width = std::to_string(r.lines_.size()).size();
    for (std::size_t i = 0; i < r.lines_.size(); ++i) {
        if (options.with_line_numbers) {
            std::string number = std::to_string(i + 1);
            out.text += std::string(width - number.size(), ' ') + number + "  ";
        }
        out.text += r.lines_[i];
        out.text += '\n';
    }
    out.lines = std::move(r.lines_);
    out.map = LineMap(std::move(r.entries_));
    return out;
}

std::string render_text(const PseudoProgram& program)
{
    return render(program).text;
}

std::vector<std::string> render_block(const Block& block, int depth, int indent_width)
{
    Renderer r(indent_width);
    r.block(block, depth, {});
    return std::move(r.lines_);
}

// ---------------------------------------------------------------------------
// Selection

NodePath BlockSelection::statement_path(std::size_t sibling) const
{
    NodePath p = list_path;
    p.push_back(sibling);
    return p;
}

BlockSelection slice(const PseudoProgram& program, const LineMap& map, LineRange range)
{
    if (range.end > map.line_count())
        throw RangeError("lines " + std::to_string(range.start) + "-" + std::to_string(range.end) +
                         " extend past the end of the document (" + std::to_string(map.line_count()) +
                         " lines)");

    std::vector<const NodePath*> paths;
    for (int line = range.start; line <= range.end; ++line) {
        const auto& e = map.at(line);
        if (!e.path.empty())
            paths.push_back(&e.path);
    }
    if (paths.empty())
        throw RangeError("selection covers only the GOAL:/STEPS: header lines");

    std::size_t common = paths.front()->size();
    for (const auto* p : paths) {
        std::size_t n = 0;
        while (n < common && n < p->size() && (*p)[n] == (*paths.front())[n])
            ++n;
        common = n;
    }

    BlockSelection sel;
    if (common % 2 == 1) {
        // Every line belongs to one statement (or its descendants).
        sel.list_path.assign(paths.front()->begin(), paths.front()->begin() + static_cast<long>(common) - 1);
        sel.first = sel.last = (*paths.front())[common - 1];
    } else {
        sel.list_path.assign(paths.front()->begin(), paths.front()->begin() + static_cast<long>(common));
        sel.first = sel.last = (*paths.front())[common];
        for (const auto* p : paths) {
            sel.first = std::min(sel.first, (*p)[common]);
            sel.last = std::max(sel.last, (*p)[common]);
        }
    }

    (void)block_at(program, sel.list_path); // validates the path against the program
    LineRange first_span = map.span_of(sel.statement_path(sel.first));
    LineRange last_span = map.span_of(sel.statement_path(sel.last));
    sel.lines = LineRange(first_span.start, last_span.end);

    // Header lines inside the request are not part of any statement.
    int requested_start = range.start;
    while (requested_start <= range.end && map.at(requested_start).path.empty())
        ++requested_start;
    sel.widened = sel.lines.start < requested_start || sel.lines.end > range.end;
    return sel;
}

Block selected_statements(const PseudoProgram& program, const BlockSelection& selection)
{
    const Block& list = block_at(program, selection.list_path);
    return Block(list.begin() + static_cast<long>(selection.first),
                 list.begin() + static_cast<long>(selection.last) + 1);
}

PseudoProgram replace_selection(const PseudoProgram& program, const BlockSelection& selection,
                                const Block& replacement)
{
    if (replacement.empty())
        throw InvariantError("replacement must contain at least one statement");
    PseudoProgram out = program;
    Block& list = block_at(out, selection.list_path);
    auto first = list.begin() + static_cast<long>(selection.first);
    auto last = list.begin() + static_cast<long>(selection.last) + 1;
    first = list.erase(first, last);
    list.insert(first, replacement.begin(), replacement.end());
    return out;
}

} // namespace codezoom
