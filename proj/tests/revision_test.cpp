#include <doctest.h>

#include <random>

#include "codezoom/line_diff.hpp"
#include "codezoom/revision.hpp"
#include "support/diff_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/random_program.hpp"

using namespace codezoom;
using codezoom::testing::check_golden;
using codezoom::testing::fixture;
using llm::Client;
using llm::ScriptedBackend;
using llm::Transcript;
using Lines = std::vector<std::string>;

namespace {

llm::LlmConfig no_retries()
{
    llm::LlmConfig c;
    c.max_retries = 0;
    return c;
}

std::string strip_indent(const std::string& text)
{
    std::string out;
    bool line_start = true;
    for (char c : text) {
        if (line_start && c == ' ')
            continue;
        line_start = c == '\n';
        out += c;
    }
    return out;
}

std::size_t count(const std::string& hay, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1))
        ++n;
    return n;
}

// Random edit of a program: drop, duplicate or rewrite one top-level statement.
PseudoProgram mutate(PseudoProgram p, codezoom::testing::ProgramGenerator& gen)
{
    auto& steps = p.steps;
    std::size_t i = gen.pick(static_cast<int>(steps.size()));
    switch (gen.pick(3)) {
    case 0:
        if (steps.size() > 1)
            steps.erase(steps.begin() + i);
        break;
    case 1: steps.insert(steps.begin() + i, simple(gen.sentence())); break;
    default: steps[i] = gen.program().steps.front();
    }
    return p;
}

} // namespace

TEST_CASE("the prompt for a replacement inside a loop is byte-exact")
{
    EditOp op{EditKind::Replacement,
              LineRange(8, 10),
              {"Initialize game state and board;", "if (AI mode is requested;) {",
               "  while (Game is not over and step count < max_steps;) {"},
              {"  for (Each possible move direction;) {", "    Simulate move in current direction and get score gain;",
               "  }"},
              {"  Ask LLM API for the best move;"}};
    CHECK(build_revision_prompt(op) == fixture("revision_prompt_example.txt"));
}

TEST_CASE("diff_pseudo finds the loop edit as one replacement")
{
    auto ops = diff_pseudo(parse(fixture("game2048_detail.pseudo")), parse(fixture("game2048_edited.pseudo")));
    REQUIRE(ops.size() == 1);
    CHECK(ops[0].kind == EditKind::Replacement);
    CHECK(ops[0].range == LineRange(8, 10));
    CHECK(ops[0].new_block == Lines{"    Ask LLM API for the best move;"});
    CHECK(ops[0].context_before.front() == "Initialize game state and board;");
    // The example indents the inner block two spaces shallower than the canonical layout.
    CHECK(strip_indent(build_revision_prompt(ops[0])) == strip_indent(fixture("revision_prompt_example.txt")));
    CHECK(diff_pseudo(parse(fixture("game2048_detail.pseudo")), parse(fixture("game2048_detail.pseudo"))).empty());
}

TEST_CASE("three chat client insertions are additions after lines 11, 17 and 22")
{
    auto ops = diff_pseudo(parse(fixture("ai_expanded.pseudo")), parse(fixture("ai_edited.pseudo")));
    REQUIRE(ops.size() == 3);
    std::string all;
    for (const auto& op : ops) {
        CHECK(op.kind == EditKind::Addition);
        CHECK(op.new_block.size() == 1);
        all += build_revision_prompt(op) + "\n";
    }
    CHECK(ops[0].range == LineRange(12, 12));
    CHECK(build_revision_prompt(ops[0]).find(" the following pseudocode is inserted after line 11:\n") != std::string::npos);
    CHECK(build_revision_prompt(ops[1]).find("inserted after line 17:") != std::string::npos);
    CHECK(build_revision_prompt(ops[2]).find("inserted after line 22:") != std::string::npos);
    check_golden("revision_additions_ai.txt", all);
}

TEST_CASE("csvql edits: delete line 5 and add a HAVING block")
{
    auto ops = diff_pseudo(parse(fixture("csvql_translated.pseudo")), parse(fixture("csvql_edited.pseudo")));
    REQUIRE(ops.size() == 2);
    CHECK(ops[0].kind == EditKind::Deletion);
    CHECK(ops[0].range == LineRange(5, 5));
    CHECK(ops[0].old_block == Lines{"Authenticate the user before running queries;"});
    CHECK(build_revision_prompt(ops[0]).find(" the pseudocode in lines 5 is deleted:\n") != std::string::npos);
    CHECK(ops[1].kind == EditKind::Addition);
    CHECK(ops[1].new_block.size() == 3);
    CHECK(ops[1].new_block[0] == "  if (HAVING clause is present;) {");
    check_golden("revision_deletion_csvql.txt", build_revision_prompt(ops[0]));
    check_golden("revision_addition_csvql.txt", build_revision_prompt(ops[1]));
}

TEST_CASE("short context near the top and the zero-context opening")
{
    auto old_p = parse(fixture("csvql_initial.pseudo"));
    auto new_p = old_p;
    new_p.goal = Description("Implement a query engine for CSV files");
    auto ops = diff_pseudo(old_p, new_p);
    REQUIRE(ops.size() == 1);
    CHECK(ops[0].context_before.empty());
    check_golden("revision_goal_replacement.txt", build_revision_prompt(ops[0]));
    CHECK(build_revision_prompt(ops[0]).starts_with("At the beginning of the pseudocode,\n the pseudocode in lines 1:\n"));

    new_p = old_p;
    new_p.steps.erase(new_p.steps.begin());
    ops = diff_pseudo(old_p, new_p);
    REQUIRE(ops.size() == 1);
    CHECK(ops[0].context_before == Lines{"GOAL: Implement a SQL-like query engine for CSV files;", "STEPS:"});
}

TEST_CASE("edit op invariants")
{
    CHECK_THROWS_AS((EditOp{EditKind::Addition, LineRange(3, 3), {"a", "b"}, {"x"}, {"y"}}.validate()), InvariantError);
    CHECK_THROWS_AS((EditOp{EditKind::Deletion, LineRange(1, 1), {}, {"x"}, {"y"}}.validate()), InvariantError);
    CHECK_THROWS_AS((EditOp{EditKind::Replacement, LineRange(5, 6), {"a", "b", "c"}, {"x"}, {"y"}}.validate()),
                    InvariantError);
    CHECK_THROWS_AS((EditOp{EditKind::Replacement, LineRange(5, 5), {"a", "b"}, {"x"}, {"y"}}.validate()),
                    InvariantError);
    EditOp ok{EditKind::Replacement, LineRange(5, 5), {"a", "b", "c"}, {"x"}, {"y"}};
    CHECK_NOTHROW(ok.validate());
    CHECK(edit_op_from_json(to_json(ok)) == ok);
}

TEST_CASE("property: ops are optimal, ordered and reconstruct the new rendering")
{
    codezoom::testing::ProgramGenerator gen(31337, 4, 12);
    int checked = 0;
    while (checked < 500) {
        auto a = gen.program();
        auto b = gen.pick(2) ? mutate(a, gen) : gen.program();
        auto ra = render(a).lines;
        auto rb = render(b).lines;
        if (ra.size() > 30 || rb.size() > 30)
            continue;
        auto ops = diff_pseudo(a, b);
        std::size_t cost = 0;
        int last_end = 0;
        for (const auto& op : ops) {
            CHECK_NOTHROW(op.validate());
            CHECK(op.range.start > last_end);
            last_end = op.kind == EditKind::Addition ? op.range.start - 1 : op.range.end;
            cost += op.old_block.size() + op.new_block.size();
        }
        CHECK(cost == codezoom::testing::oracle_edit_distance(ra, rb));
        CHECK(apply_edit_ops(ra, ops) == rb);
        ++checked;
    }
}

TEST_CASE("apply_revision on the 2048 game: three hunks, nothing written")
{
    auto right = parse(fixture("game2048_detail.pseudo"));
    auto ops = diff_pseudo(right, parse(fixture("game2048_edited.pseudo")));
    auto source = SourceDocument::from_text("game2048.py", fixture("game2048.py"));
    auto backend = std::make_shared<ScriptedBackend>(
        Transcript{{"is replaced with:", "```python\n" + fixture("game2048_revised.py") + "```\n"}});
    auto preview = apply_revision(source, right, ops, Client(backend, no_retries()));
    CHECK(preview.status == PreviewStatus::Pending);
    CHECK(preview.old_source == source);
    CHECK(preview.new_source_text == fixture("game2048_revised.py"));
    CHECK(preview.hunks.size() == 3);
    CHECK(apply_hunks(source.text, preview.hunks) == preview.new_source_text);
    CHECK(preview.unified().find("+def ask_llm_for_best_move(board):\n") != std::string::npos);

    auto req = backend->requests().front();
    CHECK(backend->consumed() == 1);
    CHECK(req.user_text.find(source.text) != std::string::npos);
    CHECK(req.user_text.find(render_text(right)) != std::string::npos);
    CHECK(req.user_text.find(build_revision_prompt(ops[0])) != std::string::npos);
    check_golden("revision_request_game2048.txt", req.system_text + "\n" + req.user_text);
}

TEST_CASE("apply_revision echo gives an empty pending preview")
{
    auto source = SourceDocument::from_text("game2048.py", fixture("game2048.py"));
    auto right = parse(fixture("game2048_detail.pseudo"));
    auto ops = diff_pseudo(right, parse(fixture("game2048_edited.pseudo")));
    auto backend = std::make_shared<ScriptedBackend>(Transcript{{std::nullopt, source.text}});
    auto preview = apply_revision(source, right, ops, Client(backend, no_retries()));
    CHECK(preview.hunks.empty());
    CHECK(preview.status == PreviewStatus::Pending);
    CHECK(preview.unified().empty());
    CHECK_THROWS_AS(apply_revision(source, right, {}, Client(backend, no_retries())), std::invalid_argument);
}

TEST_CASE("chat client preview: sanitize_text appended and called three times")
{
    auto expanded = parse(fixture("ai_expanded.pseudo"));
    auto ops = diff_pseudo(expanded, parse(fixture("ai_edited.pseudo")));
    auto source = SourceDocument::from_text("ai.py", fixture("ai.py"));
    auto backend = std::make_shared<ScriptedBackend>(Transcript{{std::nullopt, fixture("ai_revised.py")}});
    auto preview = apply_revision(source, expanded, ops, Client(backend, no_retries()));
    REQUIRE(preview.hunks.size() == 4);
    int definitions = 0, calls = 0;
    for (const auto& h : preview.hunks) {
        CHECK(h.old_count == 0);
        std::string added;
        for (const auto& l : h.new_lines)
            added += l;
        definitions += static_cast<int>(count(added, "def sanitize_text("));
        calls += static_cast<int>(count(added, "= sanitize_text("));
    }
    CHECK(definitions == 1);
    CHECK(calls == 3);
}

TEST_CASE("csvql preview: grammar extension, auth removal and HAVING handling")
{
    auto translated = parse(fixture("csvql_translated.pseudo"));
    auto ops = diff_pseudo(translated, parse(fixture("csvql_edited.pseudo")));
    auto source = SourceDocument::from_text("csvql.py", fixture("csvql.py"));
    auto backend = std::make_shared<ScriptedBackend>(Transcript{{"is deleted:", fixture("csvql_revised.py")}});
    auto preview = apply_revision(source, translated, ops, Client(backend, no_retries()));
    REQUIRE(preview.hunks.size() == 3);
    CHECK(preview.hunks[0].new_lines.front().find("\"HAVING\"") != std::string::npos);
    CHECK(preview.hunks[1].new_lines.front().find("if \"HAVING\" in clauses:") != std::string::npos);
    CHECK(preview.hunks[2].new_count == 0);
    CHECK(preview.hunks[2].old_lines.front().find("getpass.getuser()") != std::string::npos);
}

TEST_CASE("confirm writes once, reject leaves the file alone")
{
    auto dir = codezoom::testing::scratch_dir("revision");
    auto path = dir / "game2048.py";
    write_file_atomic(path, fixture("game2048.py"));
    auto source = SourceDocument::load(path);

    auto preview = make_preview(source, fixture("game2048_revised.py"));
    auto revised = confirm(preview);
    CHECK(preview.status == PreviewStatus::Confirmed);
    CHECK(revised.content_hash != source.content_hash);
    CHECK(read_file(path) == fixture("game2048_revised.py"));
    CHECK_THROWS_AS(confirm(preview), InvalidState);
    CHECK_THROWS_AS(reject(preview), InvalidState);

    auto current = SourceDocument::load(path);
    auto second = make_preview(current, "print('replaced')\n");
    reject(second);
    CHECK(second.status == PreviewStatus::Rejected);
    CHECK(SourceDocument::load(path).content_hash == current.content_hash);
    CHECK_THROWS_AS(confirm(second), InvalidState);
    std::filesystem::remove_all(dir);
}

TEST_CASE("preview persistence and hunk faithfulness")
{
    std::mt19937_64 rng(8);
    const char* pieces[] = {"a\n", "b\n", "c\n", "", "d", "\n"};
    for (int i = 0; i < 300; ++i) {
        std::string x, y;
        for (int k = static_cast<int>(rng() % 20); k > 0; --k)
            x += pieces[rng() % 6];
        for (int k = static_cast<int>(rng() % 20); k > 0; --k)
            y += pieces[rng() % 6];
        auto p = make_preview(SourceDocument::from_text("f.txt", x), y);
        CHECK(apply_hunks(x, p.hunks) == y);
        CHECK(preview_from_json(nlohmann::json::parse(to_json(p).dump())) == p);
    }
}
