#include "cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include "codezoom/service.hpp"
#include "codezoom/util.hpp"

namespace codezoom::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string transcript;
    std::string state_dir;
    std::string config;
    std::string service_url;
    std::string output = "text";
};

/// Raised with an API error reply; carries the HTTP-style status.
struct ApiFailure {
    int status;
    json body;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual ApiReply call(const std::string& method, const std::string& path,
                          const std::map<std::string, std::string>& query = {}, const json& body = nullptr) = 0;

    json must(const std::string& method, const std::string& path, const std::map<std::string, std::string>& query = {},
              const json& body = nullptr)
    {
        auto r = call(method, path, query, body);
        if (r.status >= 300)
            throw ApiFailure{r.status, r.body};
        return r.body;
    }
};

class Embedded : public Transport {
public:
    Embedded(const fs::path& state_dir, std::shared_ptr<llm::Client> client) : store_(state_dir), api_(store_, client) {}

    ApiReply call(const std::string& method, const std::string& path, const std::map<std::string, std::string>& query,
                  const json& body) override
    {
        return api_.handle(method, path, query, body.is_null() ? "" : body.dump());
    }

private:
    SessionStore store_;
    Api api_;
};

class Remote : public Transport {
public:
    explicit Remote(const std::string& url) : http_(url)
    {
        if (!http_.is_valid())
            throw ApiFailure{422, {{"error_kind", "invalid-argument"}, {"message", "bad service URL " + url}}};
        http_.set_read_timeout(600, 0);
    }

    ApiReply call(const std::string& method, const std::string& path, const std::map<std::string, std::string>& query,
                  const json& body) override
    {
        std::string target = path;
        char sep = '?';
        for (const auto& [k, v] : query) {
            target += sep + k + "=" + httplib::detail::encode_query_param(v);
            sep = '&';
        }
        std::string text = body.is_null() ? "" : body.dump();
        httplib::Result r = method == "GET"   ? http_.Get(target)
                            : method == "PUT" ? http_.Put(target, text, "application/json")
                                              : http_.Post(target, text, "application/json");
        if (!r)
            return {502, {{"error_kind", "network"}, {"message", "service unreachable: " + httplib::to_string(r.error())}}};
        json parsed;
        try {
            parsed = r->body.empty() ? json::object() : json::parse(r->body);
        } catch (const json::exception&) {
            return {502, {{"error_kind", "network"}, {"message", "service sent a non-JSON reply"}}};
        }
        return {r->status, parsed};
    }

private:
    httplib::Client http_;
};

int exit_code_for(int status)
{
    switch (status) {
    case 404:
    case 405:
    case 422: return UserError;
    case 409: return InvalidStateExit;
    case 502: return BackendError;
    default: return Internal;
    }
}

void print_error(std::ostream& err, const json& body)
{
    err << "codezoom: " << body.value("error_kind", "error") << ": " << body.value("message", "");
    if (body.contains("location")) {
        const auto& loc = body["location"];
        if (loc.contains("line"))
            err << " (line " << loc["line"].get<int>() << ", column " << loc["column"].get<int>() << ")";
        else if (loc.contains("path"))
            err << " (at " << loc["path"].get<std::string>() << ")";
    }
    if (body.contains("attempts") && body["attempts"].get<int>() > 0)
        err << " after " << body["attempts"].get<int>() << " attempt(s)";
    err << "\n";
}

std::string numbered(const json& program)
{
    RenderOptions opts;
    opts.with_line_numbers = true;
    return render(from_interchange(program), opts).text;
}

LineRange parse_lines(const std::string& spec)
{
    auto bad = [&] { return RangeError("--lines expects N or N-M with 1 <= N <= M, got '" + spec + "'"); };
    auto number = [&](const std::string& s) {
        if (s.empty() || s.size() > 9 || s.find_first_not_of("0123456789") != std::string::npos)
            throw bad();
        return std::stoi(s);
    };
    auto dash = spec.find('-');
    int start = number(spec.substr(0, dash));
    int end = dash == std::string::npos ? start : number(spec.substr(dash + 1));
    return LineRange(start, end);
}

/// A session id, or the path of a source file (newest session for it,
/// created when there is none).
std::string resolve_session(Transport& t, const std::string& arg)
{
    if (fs::is_regular_file(arg)) {
        auto path = fs::absolute(arg).lexically_normal().string();
        auto found = t.call("GET", "/sessions", {{"source_path", path}});
        if (found.status == 200)
            return found.body["session_id"];
        return t.must("POST", "/sessions", {}, {{"source_path", path}})["session_id"];
    }
    auto r = t.call("GET", "/sessions/" + arg);
    if (r.status != 200 && r.status != 404)
        throw ApiFailure{r.status, r.body};
    if (r.status == 404)
        throw ApiFailure{404, {{"error_kind", "not-found"}, {"message", "no session or source file '" + arg + "'"}}};
    return arg;
}

std::shared_ptr<llm::Client> make_client(const Options& o, const ServiceConfig& config)
{
    std::shared_ptr<llm::Backend> backend;
    if (!o.transcript.empty())
        backend = std::make_shared<llm::ScriptedBackend>(llm::load_transcript(o.transcript));
    else
        backend = std::make_shared<llm::HttpBackend>();
    return std::make_shared<llm::Client>(backend, config.llm);
}

ServiceConfig make_config(const Options& o)
{
    std::optional<fs::path> file;
    if (!o.config.empty())
        file = o.config;
    auto config = load_service_config(file);
    if (!o.state_dir.empty())
        config.state_dir = o.state_dir;
    return config;
}

void emit(std::ostream& out, const Options& o, const json& body, const std::string& text)
{
    if (o.output == "interchange")
        out << body.dump(2) << "\n";
    else
        out << text;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"codezoom: pseudocode views of a source file that can be zoomed, edited and applied back"};
    app.name("codezoom");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("--transcript", o.transcript, "Answer model requests from a scripted transcript file");
    app.add_option("--state-dir", o.state_dir, "Directory holding session state");
    app.add_option("--config", o.config, "Service configuration file (JSON)");
    app.add_option("--service-url", o.service_url, "Talk to a running service instead of working in-process");
    app.add_option("--output", o.output, "Output format")->check(CLI::IsMember({"text", "interchange"}));

    std::string file, session, edited, lines;
    bool from_pseudo = false, do_expand = false, do_collapse = false;

    auto* translate = app.add_subcommand("translate", "Translate a source file to pseudocode, or back with --from-pseudo");
    translate->add_option("file", file, "Source file or session id")->required();
    translate->add_flag("--from-pseudo", from_pseudo, "Generate source from the session pseudocode (preview only)");

    auto* zoom = app.add_subcommand("zoom", "Expand or collapse a range of pseudocode lines");
    zoom->add_option("session", session, "Session id or source file")->required();
    auto* ex = zoom->add_flag("--expand", do_expand, "Show the range in more detail");
    auto* co = zoom->add_flag("--collapse", do_collapse, "Summarize the range");
    ex->excludes(co);
    zoom->add_option("--lines", lines, "N or N-M")->required();

    auto* edit = app.add_subcommand("edit", "Replace the session pseudocode with an edited file");
    edit->add_option("session", session, "Session id or source file")->required();
    edit->add_option("--file", edited, "Edited pseudocode")->required();

    auto* apply = app.add_subcommand("apply", "Ask the model to apply pending pseudocode edits (preview only)");
    apply->add_option("session", session, "Session id or source file")->required();
    auto* diff = app.add_subcommand("diff", "Show the pending preview");
    diff->add_option("session", session, "Session id or source file")->required();
    auto* confirm = app.add_subcommand("confirm", "Write the pending preview to the source file");
    confirm->add_option("session", session, "Session id or source file")->required();
    auto* reject = app.add_subcommand("reject", "Discard the pending preview");
    reject->add_option("session", session, "Session id or source file")->required();

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "codezoom: " << e.what() << "\n";
        return UserError;
    }

    try {
        if (zoom->parsed() && !do_expand && !do_collapse)
            throw ApiFailure{422, {{"error_kind", "invalid-argument"}, {"message", "zoom needs --expand or --collapse"}}};
        if (!o.service_url.empty() && !o.transcript.empty())
            throw ApiFailure{422,
                             {{"error_kind", "invalid-argument"},
                              {"message", "--transcript and --service-url are mutually exclusive"}}};
        auto config = make_config(o);

        if (serve->parsed()) {
            if (!o.service_url.empty())
                throw ApiFailure{422, {{"error_kind", "invalid-argument"}, {"message", "serve does not take --service-url"}}};
            Service service(config, make_client(o, config));
            int port = service.bind();
            out << "codezoom: serving " << config.state_dir.string() << " on http://" << config.bind_address << ":"
                << port << std::endl;
            service.listen();
            return Ok;
        }

        std::unique_ptr<Transport> transport;
        if (o.service_url.empty())
            transport = std::make_unique<Embedded>(config.state_dir, make_client(o, config));
        else
            transport = std::make_unique<Remote>(o.service_url);
        Transport& t = *transport;

        if (translate->parsed()) {
            auto id = resolve_session(t, file);
            err << "session " << id << "\n";
            auto view = t.must("POST", "/sessions/" + id + "/translate", {},
                               {{"direction", from_pseudo ? "to_code" : "to_pseudo"}});
            if (from_pseudo) {
                const auto& preview = view["pending_preview"];
                std::string text = preview["unified_diff"];
                emit(out, o, preview, text.empty() ? "no changes\n" : text);
                err << preview["hunks"].size() << " hunk(s) pending; run confirm or reject\n";
            } else {
                emit(out, o, view, numbered(view["program"]));
            }
            return Ok;
        }

        auto id = resolve_session(t, session);
        const std::string base = "/sessions/" + id;

        if (zoom->parsed()) {
            auto range = parse_lines(lines);
            auto r = t.must("POST", base + "/zoom", {},
                            {{"op", do_expand ? "expand" : "collapse"}, {"start", range.start}, {"end", range.end}});
            emit(out, o, r, numbered(r["program"]));
            err << (do_expand ? "expanded" : "collapsed") << " into lines " << r["changed_range"]["start"].get<int>()
                << "-" << r["changed_range"]["end"].get<int>() << (r["used_cache"].get<bool>() ? " (cached)" : "")
                << "\n";
        } else if (edit->parsed()) {
            std::string text;
            try {
                text = read_file(edited);
            } catch (const std::exception& e) {
                throw ApiFailure{404, {{"error_kind", "not-found"}, {"message", e.what()}}};
            }
            auto r = t.must("PUT", base + "/pseudocode", {}, {{"text", text}});
            std::string summary;
            for (const auto& op : r["edit_ops"]) {
                summary += op["kind"].get<std::string>() + " at line " + std::to_string(op["start"].get<int>());
                if (op["end"] != op["start"])
                    summary += "-" + std::to_string(op["end"].get<int>());
                summary += ": -" + std::to_string(op["old_block"].size()) + " +" +
                           std::to_string(op["new_block"].size()) + "\n";
            }
            emit(out, o, r, summary.empty() ? "no pending edits\n" : summary);
        } else if (apply->parsed()) {
            auto r = t.must("POST", base + "/apply");
            std::string text = r["unified_diff"];
            emit(out, o, r, text.empty() ? "no changes\n" : text);
            err << r["hunks"].size() << " hunk(s) pending; run confirm or reject\n";
        } else if (diff->parsed()) {
            auto view = t.must("GET", base);
            const auto& preview = view["pending_preview"];
            if (preview.is_null())
                emit(out, o, nullptr, "none\n");
            else {
                std::string text = preview["unified_diff"];
                emit(out, o, preview, text.empty() ? "no changes\n" : text);
            }
        } else if (confirm->parsed()) {
            auto view = t.must("POST", base + "/preview/confirm");
            emit(out, o, view, "confirmed " + view["source"]["path"].get<std::string>() + "\n");
        } else if (reject->parsed()) {
            auto view = t.must("POST", base + "/preview/reject");
            emit(out, o, view, "rejected\n");
        }
        return Ok;
    } catch (const ApiFailure& f) {
        print_error(err, f.body);
        return exit_code_for(f.status);
    } catch (...) {
        auto info = describe_current_exception();
        print_error(err, info.body);
        return exit_code_for(info.status);
    }
}

} // namespace codezoom::cli
