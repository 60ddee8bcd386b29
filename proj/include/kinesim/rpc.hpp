#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kinesim/model_config.hpp"
#include "kinesim/simcore.hpp"

namespace kinesim::rpc {

/// Wire limit: one request per UTF-8 line, at most 1 MiB.
constexpr std::size_t kMaxLineBytes = 1 << 20;

/// Server-side state shared by every connection: the instance registry plus
/// a by-path cache of loaded robot models.
class Context {
public:
    sim::Registry& registry() { return registry_; }

    std::shared_ptr<const RobotAsset> load_model(const std::string& path);

private:
    sim::Registry registry_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const RobotAsset>> models_;
};

/// Pure dispatch of one parsed request. Always returns a complete response:
/// the echoed id plus exactly one of "result" or "error".
nlohmann::json handle_request(const nlohmann::json& request, Context& ctx);

/// One raw wire line in, one response line (without trailing newline) out.
std::string handle_line(const std::string& line, Context& ctx);

/// Executes a scenario script: a JSON array of request objects (or an object
/// with a "commands" array). Requests without an id get sequential ones.
std::vector<nlohmann::json> run_script(const nlohmann::json& script, Context& ctx);

/// Newline-delimited JSON over TCP. Connections are served concurrently; the
/// requests of one connection are answered in order.
class Server {
public:
    Server(Context& ctx, const std::string& host, int port);  // port 0 picks one
    ~Server();

    int port() const { return port_; }
    void stop();

private:
    void accept_loop();
    void serve_connection(int fd);

    Context& ctx_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex threads_mutex_;
    std::vector<std::thread> connection_threads_;
    std::vector<int> connection_fds_;
};

}  // namespace kinesim::rpc
