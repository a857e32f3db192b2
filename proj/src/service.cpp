#include "codezoom/service.hpp"

#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "codezoom/util.hpp"

namespace codezoom {

using nlohmann::json;

std::optional<std::string> process_env(const std::string& name)
{
    if (const char* v = std::getenv(name.c_str()); v && *v)
        return std::string(v);
    return std::nullopt;
}

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env)
{
    ServiceConfig c;
    if (file) {
        json j;
        try {
            j = json::parse(read_file(*file));
        } catch (const json::exception& e) {
            throw SchemaError(file->string(), e.what());
        }
        if (!j.is_object())
            throw SchemaError(file->string(), "config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "state_dir")
                c.state_dir = value.get<std::string>();
            else if (key == "bind_address")
                c.bind_address = value.get<std::string>();
            else if (key == "port")
                c.port = value.get<int>();
            else if (key == "static_dir")
                c.static_dir = value.get<std::string>();
            else if (key == "llm")
                c.llm = llm::config_from_json(value, c.llm);
            else
                throw SchemaError(file->string() + ": " + key, "unknown config key");
        }
    }
    if (auto v = env("CODEZOOM_STATE_DIR"))
        c.state_dir = *v;
    if (auto v = env("CODEZOOM_BIND"))
        c.bind_address = *v;
    if (auto v = env("CODEZOOM_PORT"))
        c.port = std::stoi(*v);
    if (auto v = env("CODEZOOM_STATIC_DIR"))
        c.static_dir = *v;
    if (auto v = env("CODEZOOM_ENDPOINT_URL"))
        c.llm.endpoint_url = *v;
    if (auto v = env("CODEZOOM_MODEL"))
        c.llm.model_name = *v;
    c.llm.validate();
    if (c.port < 0 || c.port > 65535)
        throw std::invalid_argument("port out of range");
    return c;
}

namespace {

json body_of(const std::string& body)
{
    if (body.empty())
        return json::object();
    auto j = json::parse(body);
    if (!j.is_object())
        throw SchemaError("$", "request body must be a JSON object");
    return j;
}

std::string string_field(const json& j, const char* key)
{
    if (!j.contains(key) || !j[key].is_string())
        throw SchemaError(key, "required string field");
    return j[key];
}

int int_field(const json& j, const char* key)
{
    if (!j.contains(key) || !j[key].is_number_integer())
        throw SchemaError(key, "required integer field");
    return j[key];
}

json zoom_json(const ZoomResult& r)
{
    return {{"program", to_interchange(r.program)},
            {"pseudocode", render_text(r.program)},
            {"changed_range", {{"start", r.changed_range.start}, {"end", r.changed_range.end}}},
            {"selection", {{"start", r.selection.lines.start}, {"end", r.selection.lines.end}, {"widened", r.selection.widened}}},
            {"used_cache", r.used_cache}};
}

} // namespace

Api::Api(SessionStore& store, std::shared_ptr<llm::Client> client) : store_(store), client_(std::move(client)) {}

ApiReply Api::handle(const std::string& method, const std::string& path, const std::map<std::string, std::string>& query,
                     const std::string& body)
{
    static const std::regex session_route(R"(/sessions/([^/]+)(/translate|/zoom|/pseudocode|/apply|/preview/confirm|/preview/reject)?)");
    try {
        if (path == "/sessions") {
            if (method == "POST") {
                auto id = store_.create(string_field(body_of(body), "source_path")).id;
                return {201, {{"session_id", id}}};
            }
            if (method == "GET") {
                auto it = query.find("source_path");
                if (it == query.end())
                    throw SchemaError("source_path", "required query parameter");
                auto id = store_.find_by_source(it->second);
                if (!id)
                    throw NotFoundError("no session for " + it->second);
                return {200, {{"session_id", *id}}};
            }
            return {405, {{"error_kind", "method-not-allowed"}, {"message", method + " " + path}}};
        }
        std::smatch m;
        if (!std::regex_match(path, m, session_route))
            return {404, {{"error_kind", "not-found"}, {"message", "no route for " + path}}};
        const std::string id = m[1];
        const std::string action = m[2];
        auto want = [&](const char* verb) {
            if (method != verb)
                throw std::out_of_range(verb);
        };
        try {
            if (action.empty()) {
                want("GET");
                return {200, session_view(store_.get(id))};
            }
            if (action == "/translate") {
                want("POST");
                auto direction = string_field(body_of(body), "direction");
                if (direction != "to_pseudo" && direction != "to_code")
                    throw SchemaError("direction", "expected to_pseudo or to_code");
                return {200, session_view(store_.translate(
                                 id, direction == "to_pseudo" ? Direction::ToPseudo : Direction::ToCode, *client_))};
            }
            if (action == "/zoom") {
                want("POST");
                auto j = body_of(body);
                auto op = string_field(j, "op");
                if (op != "expand" && op != "collapse")
                    throw SchemaError("op", "expected expand or collapse");
                LineRange range(int_field(j, "start"), int_field(j, "end"));
                return {200, zoom_json(store_.zoom(id, op == "expand" ? ZoomOp::Expand : ZoomOp::Collapse, range, *client_)
                                           .result)};
            }
            if (action == "/pseudocode") {
                want("PUT");
                json list = json::array();
                for (const auto& op : store_.put_pseudocode(id, string_field(body_of(body), "text")))
                    list.push_back(to_json(op));
                return {200, {{"edit_ops", list}}};
            }
            if (action == "/apply") {
                want("POST");
                return {200, to_json(store_.apply(id, *client_))};
            }
            want("POST");
            return {200, session_view(action == "/preview/confirm" ? store_.confirm(id) : store_.reject(id))};
        } catch (const std::out_of_range& e) {
            return {405, {{"error_kind", "method-not-allowed"}, {"message", method + " " + path}}};
        }
    } catch (...) {
        auto info = describe_current_exception();
        return {info.status, info.body};
    }
}

struct Service::Impl {
    ServiceConfig config;
    SessionStore store;
    Api api;
    httplib::Server server;

    Impl(ServiceConfig c, std::shared_ptr<llm::Client> client)
        : config(std::move(c)), store(config.state_dir), api(store, std::move(client))
    {
    }

    void routes()
    {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            std::map<std::string, std::string> query(req.params.begin(), req.params.end());
            auto reply = api.handle(req.method, req.path, query, req.body);
            res.status = reply.status;
            res.set_content(reply.body.dump(), "application/json");
        };
        const std::string pattern = "/sessions(/.*)?";
        server.Get(pattern, handler);
        server.Post(pattern, handler);
        server.Put(pattern, handler);
        if (config.static_dir && std::filesystem::is_directory(*config.static_dir))
            server.set_mount_point("/", config.static_dir->string());
    }
};

Service::Service(ServiceConfig config, std::shared_ptr<llm::Client> client)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(client)))
{
    impl_->routes();
}

Service::~Service() = default;

int Service::bind()
{
    auto& c = impl_->config;
    if (c.port == 0) {
        int port = impl_->server.bind_to_any_port(c.bind_address);
        if (port < 0)
            throw std::runtime_error("cannot bind " + c.bind_address);
        return port;
    }
    if (!impl_->server.bind_to_port(c.bind_address, c.port))
        throw std::runtime_error("cannot bind " + c.bind_address + ":" + std::to_string(c.port));
    return c.port;
}

void Service::listen()
{
    impl_->server.listen_after_bind();
}

void Service::wait_until_ready()
{
    impl_->server.wait_until_ready();
}

void Service::stop()
{
    impl_->server.stop();
}

SessionStore& Service::store()
{
    return impl_->store;
}

} // namespace codezoom
