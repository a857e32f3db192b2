#include <doctest.h>

#include <thread>

#include "support/service_harness.hpp"

using namespace codezoom;
using codezoom::testing::fixture;
using codezoom::testing::interchange_text;
using codezoom::testing::ServiceHarness;
using llm::Transcript;
using nlohmann::json;

namespace {

std::string line(const std::string& text, int n)
{
    std::size_t pos = 0;
    for (int i = 1; i < n; ++i)
        pos = text.find('\n', pos) + 1;
    return text.substr(pos, text.find('\n', pos) - pos);
}

std::string steps_text(const Block& block)
{
    return json{{"steps", to_interchange(block)}}.dump();
}

// The persisted file reloads to exactly the state it was written from.
void check_reload(ServiceHarness& h, const std::string& id)
{
    auto path = h.service().store().session_file(id);
    auto stored = json::parse(read_file(path));
    CHECK(to_json(session_from_json(stored)) == stored);
}

} // namespace

TEST_CASE("create and read sessions")
{
    ServiceHarness h(Transcript{});
    auto src = h.place("ai.py");
    auto id = h.create(src);
    auto got = h.call("GET", "/sessions/" + id);
    CHECK(got.status == 200);
    CHECK(got.body["program"].is_null());
    CHECK(got.body["source"]["text"] == fixture("ai.py"));
    CHECK(got.body["history"].size() == 1);
    auto newer = h.create(src);
    CHECK(newer != id);
    auto found = h.call("GET", "/sessions?source_path=" + httplib::detail::encode_query_param(src.string()));
    CHECK(found.status == 200);
    CHECK(found.body["session_id"] == newer);
    CHECK(h.call("GET", "/sessions?source_path=%2Fnowhere").status == 404);
    CHECK(h.call("PUT", "/sessions/" + id + "/apply").status == 405);

    auto missing = h.call("POST", "/sessions", {{"source_path", (h.dir() / "nope.py").string()}});
    CHECK(missing.status == 404);
    CHECK(missing.body["error_kind"] == "not-found");
    CHECK(h.call("POST", "/sessions", {{"source_path", h.dir().string()}}).status == 422);
    CHECK(h.call("POST", "/sessions", {{"path", "x"}}).status == 422);
    CHECK(h.call("GET", "/sessions/0123456789abcdef").status == 404);
    CHECK(h.call("GET", "/sessions/..%2F..%2Fetc").status == 404);
    check_reload(h, id);
}

TEST_CASE("a transcript that does not match the request is a backend error")
{
    ServiceHarness h(Transcript{{"no such text in the prompt", interchange_text("ai_translated.pseudo")}});
    auto id = h.create(h.place("ai.py"));
    auto r = h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_pseudo"}});
    CHECK(r.status == 502);
    CHECK(r.body["error_kind"] == "transcript-mismatch");
}

TEST_CASE("translate to pseudocode: prompt-handling lines 8, 11 and 16")
{
    ServiceHarness h(Transcript{{"def load_history(name):", interchange_text("ai_translated.pseudo")}});
    auto id = h.create(h.place("ai.py"));
    auto r = h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_pseudo"}});
    REQUIRE(r.status == 200);
    std::string text = r.body["pseudocode"];
    CHECK(line(text, 8) == "Load historical messages from the local session file;");
    CHECK(line(text, 11) == "  Read the prompt from the command-line arguments;");
    CHECK(line(text, 16) == "    Read a prompt entered in the interactive shell;");
    CHECK(r.body["pending_edits"].empty());
    CHECK(r.body["line_map"].size() == 21);
    check_reload(h, id);
}

TEST_CASE("translate failures leave the session unchanged")
{
    ServiceHarness h(Transcript{{std::nullopt, "no"}, {std::nullopt, "still no"}}, 1);
    auto id = h.create(h.place("ai.py"));
    auto before = h.call("GET", "/sessions/" + id).body;
    auto r = h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_pseudo"}});
    CHECK(r.status == 502);
    CHECK(r.body["error_kind"] == "schema-after-retries");
    CHECK(r.body["attempts"] == 2);
    CHECK(h.call("GET", "/sessions/" + id).body == before);

    auto to_code = h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_code"}});
    CHECK(to_code.status == 409);
    CHECK(h.call("POST", "/sessions/" + id + "/translate", {{"direction", "sideways"}}).status == 422);
}

TEST_CASE("zoom over HTTP: expand line 7, cached collapse, header range")
{
    auto right = parse(fixture("game2048_detail.pseudo"));
    ServiceHarness h(Transcript{{std::nullopt, interchange_text("game2048_overview.pseudo")},
                                {"Operation: expand", steps_text(std::get<IfStmt>(right.steps[3].node).then)}});
    auto src = h.place("game2048.py");
    auto id = h.create(src);
    REQUIRE(h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_pseudo"}}).status == 200);

    auto ex = h.call("POST", "/sessions/" + id + "/zoom", {{"op", "expand"}, {"start", 7}, {"end", 7}});
    REQUIRE(ex.status == 200);
    CHECK(ex.body["changed_range"] == json{{"start", 7}, {"end", 17}});
    CHECK(ex.body["used_cache"] == false);
    CHECK(ex.body["pseudocode"] == fixture("game2048_detail.pseudo"));

    auto co = h.call("POST", "/sessions/" + id + "/zoom", {{"op", "collapse"}, {"start", 7}, {"end", 17}});
    REQUIRE(co.status == 200);
    CHECK(co.body["used_cache"] == true);
    CHECK(co.body["pseudocode"] == fixture("game2048_overview.pseudo"));
    CHECK(h.backend().consumed() == 2);

    CHECK(h.call("POST", "/sessions/" + id + "/zoom", {{"op", "expand"}, {"start", 1}, {"end", 2}}).status == 422);
    CHECK(h.call("POST", "/sessions/" + id + "/zoom", {{"op", "expand"}, {"start", 0}, {"end", 2}}).status == 422);
    CHECK(h.call("POST", "/sessions/" + id + "/zoom", {{"op", "shrink"}, {"start", 3}, {"end", 3}}).status == 422);
    CHECK(read_file(src) == fixture("game2048.py"));
    check_reload(h, id);
}

TEST_CASE("edits, apply, confirm and reject")
{
    ServiceHarness h(Transcript{{std::nullopt, interchange_text("game2048_detail.pseudo")},
                                {"is replaced with:", "```python\n" + fixture("game2048_revised.py") + "```\n"},
                                {"is replaced with:", fixture("game2048_revised.py")}});
    auto src = h.place("game2048.py");
    auto id = h.create(src);
    auto base = "/sessions/" + id;
    REQUIRE(h.call("POST", base + "/translate", {{"direction", "to_pseudo"}}).status == 200);

    CHECK(h.call("POST", base + "/apply").status == 409);
    auto same = h.call("PUT", base + "/pseudocode", {{"text", fixture("game2048_detail.pseudo")}});
    CHECK(same.status == 200);
    CHECK(same.body["edit_ops"].empty());

    auto bad = h.call("PUT", base + "/pseudocode", {{"text", "GOAL: x;\nSTEPS:\nDo it\n"}});
    CHECK(bad.status == 422);
    CHECK(bad.body["error_kind"] == "parse-error");
    CHECK(bad.body["location"]["line"] == 4);
    CHECK(bad.body["location"].contains("column"));

    auto put = h.call("PUT", base + "/pseudocode", {{"text", fixture("game2048_edited.pseudo")}});
    REQUIRE(put.status == 200);
    REQUIRE(put.body["edit_ops"].size() == 1);
    CHECK(put.body["edit_ops"][0]["kind"] == "replacement");
    CHECK(put.body["edit_ops"][0]["start"] == 8);
    CHECK(put.body["edit_ops"][0]["end"] == 10);
    CHECK(h.call("POST", base + "/zoom", {{"op", "expand"}, {"start", 3}, {"end", 3}}).status == 409);

    // Reject leaves the file alone and keeps the edits for another try.
    auto preview = h.call("POST", base + "/apply");
    REQUIRE(preview.status == 200);
    CHECK(preview.body["hunks"].size() == 3);
    CHECK(preview.body["status"] == "pending");
    CHECK(h.call("POST", base + "/apply").status == 409);
    CHECK(h.call("POST", base + "/preview/reject").status == 200);
    CHECK(read_file(src) == fixture("game2048.py"));
    CHECK(h.call("POST", base + "/preview/confirm").status == 409);

    REQUIRE(h.call("POST", base + "/apply").status == 200);
    auto done = h.call("POST", base + "/preview/confirm");
    REQUIRE(done.status == 200);
    CHECK(read_file(src) == fixture("game2048_revised.py"));
    CHECK(done.body["source"]["content_hash"] == sha256_hex(fixture("game2048_revised.py")));
    CHECK(done.body["pending_edits"].empty());
    CHECK(h.call("POST", base + "/preview/confirm").status == 409);
    check_reload(h, id);

    // Replaying the source-changing history digests ends at the current hash.
    std::string last;
    for (const auto& e : done.body["history"])
        if (e["kind"] == "create" || e["kind"] == "confirm")
            last = e["digest"];
    CHECK(last == done.body["source"]["content_hash"]);
    std::vector<std::string> kinds;
    for (const auto& e : done.body["history"])
        kinds.push_back(e["kind"]);
    CHECK(kinds == std::vector<std::string>{"create", "translate-to-pseudo", "edit", "edit", "apply", "reject", "apply",
                                            "confirm"});
}

TEST_CASE("to_code on an empty source asks for generation, not revision")
{
    ServiceHarness h(Transcript{{"Revise the source file minimally", "```python\n" + fixture("csvql.py") + "```"}});
    auto src = h.dir() / "csvql.py";
    write_file_atomic(src, "");
    auto id = h.create(src);
    REQUIRE(h.call("PUT", "/sessions/" + id + "/pseudocode", {{"text", fixture("csvql_initial.pseudo")}}).status == 200);
    auto r = h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_code"}});
    CHECK(r.status == 502);
    CHECK(r.body["error_kind"] == "transcript-mismatch");
    CHECK(h.backend().consumed() == 0);
}

TEST_CASE("to_code from scratch then confirm writes the file")
{
    ServiceHarness h(Transcript{{"Write a python program", "```python\n" + fixture("csvql.py") + "```"}});
    auto src = h.dir() / "csvql.py";
    write_file_atomic(src, "");
    auto id = h.create(src);
    REQUIRE(h.call("PUT", "/sessions/" + id + "/pseudocode", {{"text", fixture("csvql_initial.pseudo")}}).status == 200);
    auto r = h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_code"}});
    REQUIRE(r.status == 200);
    CHECK(r.body["pending_preview"]["status"] == "pending");
    CHECK(read_file(src).empty());
    CHECK(h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_pseudo"}}).status == 409);
    auto done = h.call("POST", "/sessions/" + id + "/preview/confirm");
    REQUIRE(done.status == 200);
    CHECK(read_file(src) == fixture("csvql.py"));
    CHECK(done.body["baseline"] == to_interchange(parse(fixture("csvql_initial.pseudo"))));
}

TEST_CASE("requests to one session are serialized, sessions run side by side")
{
    ServiceHarness h(Transcript{});
    auto a = h.create(h.place("ai.py"));
    auto b = h.create(h.place("game2048.py"));
    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([&, t] {
            auto r = h.call("PUT", "/sessions/" + (t % 2 ? a : b) + "/pseudocode",
                            {{"text", "GOAL: g;\nSTEPS:\nStep " + std::to_string(t) + ";\n"}});
            if (r.status == 200)
                ++ok;
        });
    for (auto& th : threads)
        th.join();
    CHECK(ok == 8);
    CHECK(h.call("GET", "/sessions/" + a).body["history"].size() == 5);
    CHECK(h.call("GET", "/sessions/" + b).body["history"].size() == 5);
    check_reload(h, a);
}

TEST_CASE("service writes only the state directory and confirmed sources")
{
    ServiceHarness h(Transcript{{std::nullopt, interchange_text("game2048_detail.pseudo")}});
    auto src = h.place("game2048.py");
    auto id = h.create(src);
    h.call("POST", "/sessions/" + id + "/translate", {{"direction", "to_pseudo"}});
    h.call("PUT", "/sessions/" + id + "/pseudocode", {{"text", fixture("game2048_edited.pseudo")}});
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(h.dir()))
        if (e.is_regular_file())
            files.push_back(std::filesystem::relative(e.path(), h.dir()).generic_string());
    std::sort(files.begin(), files.end());
    CHECK(files == std::vector<std::string>{"game2048.py", "state/sessions/" + id + ".json"});
}

TEST_CASE("config file and environment overrides")
{
    auto dir = codezoom::testing::scratch_dir("config");
    write_file_atomic(dir / "c.json", R"({"state_dir":"/tmp/s","port":9000,"llm":{"model_name":"m1","max_retries":4}})");
    std::map<std::string, std::string> env{{"CODEZOOM_PORT", "9100"}, {"CODEZOOM_MODEL", "m2"}};
    auto lookup = [&](const std::string& k) -> std::optional<std::string> {
        auto it = env.find(k);
        return it == env.end() ? std::nullopt : std::optional(it->second);
    };
    auto c = load_service_config(dir / "c.json", lookup);
    CHECK(c.state_dir == "/tmp/s");
    CHECK(c.port == 9100);
    CHECK(c.bind_address == "127.0.0.1");
    CHECK(c.llm.model_name == "m2");
    CHECK(c.llm.max_retries == 4);
    write_file_atomic(dir / "bad.json", R"({"colour":"red"})");
    CHECK_THROWS_AS(load_service_config(dir / "bad.json", lookup), SchemaError);
    auto defaults = load_service_config(std::nullopt, [](const std::string&) { return std::nullopt; });
    CHECK(defaults.port == 8765);
    std::filesystem::remove_all(dir);
}
