#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "codezoom/llm_client.hpp"
#include "codezoom/session.hpp"

namespace codezoom {

struct ServiceConfig {
    std::filesystem::path state_dir = ".codezoom";
    std::string bind_address = "127.0.0.1";
    int port = 8765;
    std::optional<std::filesystem::path> static_dir;
    llm::LlmConfig llm;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

/// Reads the optional JSON config file, then applies CODEZOOM_STATE_DIR,
/// CODEZOOM_BIND, CODEZOOM_PORT, CODEZOOM_STATIC_DIR, CODEZOOM_ENDPOINT_URL
/// and CODEZOOM_MODEL from `env`.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

struct ApiReply {
    int status = 200;
    nlohmann::json body;
};

/// The service endpoints, independent of transport. `path` excludes the
/// query string; `query` carries its decoded parameters.
class Api {
public:
    Api(SessionStore& store, std::shared_ptr<llm::Client> client);

    ApiReply handle(const std::string& method, const std::string& path, const std::map<std::string, std::string>& query,
                    const std::string& body);

private:
    SessionStore& store_;
    std::shared_ptr<llm::Client> client_;
};

/// HTTP front end over a SessionStore.
class Service {
public:
    Service(ServiceConfig config, std::shared_ptr<llm::Client> client);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the configured address; port 0 picks a free one. Returns the port.
    int bind();
    /// Serves until stop(); call bind() first.
    void listen();
    void wait_until_ready();
    void stop();

    SessionStore& store();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace codezoom
