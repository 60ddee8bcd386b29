#include "kinesim/rpc.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <functional>

#include "kinesim/error.hpp"
#include "kinesim/sensors.hpp"
#include "kinesim/workspace.hpp"

namespace kinesim::rpc {

using nlohmann::json;

std::shared_ptr<const RobotAsset> Context::load_model(const std::string& path) {
    std::lock_guard lock(mutex_);
    auto it = models_.find(path);
    if (it != models_.end()) return it->second;
    auto asset = load_robot_asset(path);
    models_[path] = asset;
    return asset;
}

namespace {

const json& require(const json& params, const char* key) {
    auto it = params.find(key);
    if (it == params.end())
        fail(ErrorCode::invalid_argument, std::string("missing parameter '") + key + "'");
    return *it;
}

int require_int(const json& params, const char* key) {
    const json& v = require(params, key);
    if (!v.is_number_integer())
        fail(ErrorCode::invalid_argument, std::string("parameter '") + key + "' must be an integer");
    return v.get<int>();
}

double require_double(const json& params, const char* key) {
    const json& v = require(params, key);
    if (!v.is_number())
        fail(ErrorCode::invalid_argument, std::string("parameter '") + key + "' must be a number");
    return v.get<double>();
}

std::string require_string(const json& params, const char* key) {
    const json& v = require(params, key);
    if (!v.is_string())
        fail(ErrorCode::invalid_argument, std::string("parameter '") + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<std::string> require_string_list(const json& params, const char* key) {
    const json& v = require(params, key);
    if (!v.is_array())
        fail(ErrorCode::invalid_argument, std::string("parameter '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string())
            fail(ErrorCode::invalid_argument,
                 std::string("parameter '") + key + "' must contain strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::vector<double> require_double_list(const json& params, const char* key) {
    const json& v = require(params, key);
    if (!v.is_array())
        fail(ErrorCode::invalid_argument, std::string("parameter '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            fail(ErrorCode::invalid_argument,
                 std::string("parameter '") + key + "' must contain numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

sim::Pose2D pose2d_from(const json& params, const char* key) {
    if (!params.contains(key)) return {};
    const json& v = params.at(key);
    if (!v.is_array() || v.size() != 3)
        fail(ErrorCode::invalid_argument, std::string("parameter '") + key + "' must be [x, y, theta]");
    return sim::Pose2D{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

kin::JacobianMode mode_from(const json& params) {
    std::string mode = params.value("mode", "full6");
    if (mode == "full6") return kin::JacobianMode::full_6;
    if (mode == "pos3") return kin::JacobianMode::position_3;
    fail(ErrorCode::invalid_argument, "mode must be 'full6' or 'pos3'");
}

json vec3_json(const Vec3d& v) { return json::array({v.x(), v.y(), v.z()}); }

using Handler = std::function<json(Context&, const json&)>;

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"create_instance",
         [](Context& ctx, const json& p) {
             sim::InstanceConfig config = sim::InstanceConfig::from_json(p);
             int id = ctx.registry().create(config);
             return json{{"instance", id}};
         }},
        {"reset_instance",
         [](Context& ctx, const json& p) {
             ctx.registry().reset(require_int(p, "instance"));
             return json::object();
         }},
        {"stop_instance",
         [](Context& ctx, const json& p) {
             ctx.registry().stop(require_int(p, "instance"));
             return json::object();
         }},
        {"spawn_robot",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             auto asset = ctx.load_model(require_string(p, "model"));
             int robot = instance->spawn_robot(asset, pose2d_from(p, "pose"));
             return json{{"robot", robot}};
         }},
        {"remove_robot",
         [](Context& ctx, const json& p) {
             ctx.registry().get(require_int(p, "instance"))->remove_robot(require_int(p, "robot"));
             return json::object();
         }},
        {"step",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             std::int64_t steps = p.value("steps", 1);
             if (steps <= 0) fail(ErrorCode::invalid_argument, "steps must be positive");
             instance->step(static_cast<std::uint64_t>(steps));
             return json{{"clock", instance->clock()}, {"steps", instance->step_count()}};
         }},
        {"set_angles",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             instance->set_angles(require_int(p, "robot"), require_string_list(p, "names"),
                                  require_double_list(p, "targets"),
                                  require_double(p, "fraction"));
             return json::object();
         }},
        {"get_angles",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             return json{{"values", instance->get_angles(require_int(p, "robot"),
                                                         require_string_list(p, "names"))}};
         }},
        {"go_to_posture",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             instance->go_to_posture(require_int(p, "robot"), require_string(p, "posture"),
                                     require_double(p, "fraction"));
             return json::object();
         }},
        {"move",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             instance->move(require_int(p, "robot"), require_double(p, "vx"),
                            require_double(p, "vy"), require_double(p, "wz"));
             return json::object();
         }},
        {"move_to",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             instance->move_to(require_int(p, "robot"), require_double(p, "x"),
                               require_double(p, "y"), require_double(p, "theta"));
             return json::object();
         }},
        {"get_odometry",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             sim::Pose2D pose = instance->get_odometry(require_int(p, "robot"));
             return json{{"x", pose.x}, {"y", pose.y}, {"theta", pose.theta}};
         }},
        {"base_command_active",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             return json{{"active", instance->base_command_active(require_int(p, "robot"))}};
         }},
        {"add_static_body",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             instance->add_static_body(sim::shape_from_json(require(p, "shape")),
                                       sim::pose_from_json(p));
             return json::object();
         }},
        {"get_laser_scan",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             return sensors::laser_to_json(sensors::get_laser_scan(
                 *instance, require_int(p, "robot"), require_string(p, "laser")));
         }},
        {"get_depth_image",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             sensors::DepthImage img = sensors::get_depth_image(
                 *instance, require_int(p, "robot"), require_string(p, "camera"),
                 require_int(p, "width"), require_int(p, "height"));
             json out = sensors::depth_header_json(img);
             out["depth"] = img.depth;
             return out;
         }},
        {"world_collision",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             auto contacts = instance->world_collision(require_int(p, "robot"),
                                                       require_string_list(p, "links"));
             json arr = json::array();
             for (const auto& c : contacts) {
                 arr.push_back({{"link", c.link},
                                {"other", c.other},
                                {"signed_distance", c.contact.signed_distance},
                                {"point_a", vec3_json(c.contact.point_a)},
                                {"point_b", vec3_json(c.contact.point_b)}});
             }
             return json{{"contacts", arr}};
         }},
        {"self_collision",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             auto pairs = instance->robot_self_collision(require_int(p, "robot"));
             json arr = json::array();
             for (const auto& pair : pairs) arr.push_back({pair.first, pair.second});
             return json{{"pairs", arr}};
         }},
        {"sample_workspace",
         [](Context& ctx, const json& p) {
             auto asset = ctx.load_model(require_string(p, "model"));
             urdf::KinematicChain chain = urdf::extract_chain(
                 asset->model, require_string(p, "base"), require_string(p, "tip"));
             workspace::SampleOptions options;
             options.mode = mode_from(p);
             options.rest_posture = p.value("rest_posture", std::string("Stand"));
             options.parallelism = p.value("parallel", 0);
             workspace::WorkspaceCloud cloud = workspace::sample_workspace(
                 *asset, chain, require_int(p, "per_instance"), require_int(p, "instances"),
                 p.value("seed", std::uint64_t{0}), options);
             workspace::normalize_workspace(cloud);
             if (p.contains("out_ply")) workspace::export_ply(cloud, p.at("out_ply"));
             if (p.contains("out_csv")) workspace::export_csv(cloud, p.at("out_csv"));
             json out{{"samples", cloud.samples.size()},
                      {"w_raw_max", workspace::max_raw_manipulability(cloud)}};
             if (p.value("include_samples", false)) {
                 json arr = json::array();
                 for (const auto& s : cloud.samples)
                     arr.push_back({{"position", vec3_json(s.position)},
                                    {"w_raw", s.w_raw},
                                    {"w_norm", s.w_norm}});
                 out["cloud"] = arr;
             }
             return out;
         }},
        {"instance_digest",
         [](Context& ctx, const json& p) {
             auto instance = ctx.registry().get(require_int(p, "instance"));
             return json{{"digest", instance->digest()}};
         }},
    };
    return table;
}

json error_response(const json& id, int code, const std::string& message) {
    return json{{"id", id}, {"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

json handle_request(const json& request, Context& ctx) {
    json id = request.contains("id") ? request.at("id") : json(nullptr);
    if (!request.contains("method") || !request.at("method").is_string())
        return error_response(id, 400, "request needs a string 'method'");
    const std::string method = request.at("method").get<std::string>();
    json params = request.value("params", json::object());
    if (!params.is_object()) return error_response(id, 400, "'params' must be an object");

    const auto& table = handlers();
    auto it = table.find(method);
    if (it == table.end()) return error_response(id, 405, "method not found: " + method);

    try {
        return json{{"id", id}, {"result", it->second(ctx, params)}};
    } catch (const Error& e) {
        return error_response(id, static_cast<int>(e.code()), e.what());
    } catch (const json::exception& e) {
        return error_response(id, 400, std::string("invalid params: ") + e.what());
    } catch (const std::exception& e) {
        return error_response(id, 500, std::string("internal error: ") + e.what());
    }
}

std::string handle_line(const std::string& line, Context& ctx) {
    if (line.size() > kMaxLineBytes)
        return error_response(nullptr, 400, "request too large").dump();
    json request = json::parse(line, nullptr, false);
    if (request.is_discarded())
        return error_response(nullptr, 400, "malformed JSON").dump();
    if (!request.is_object())
        return error_response(nullptr, 400, "request must be a JSON object").dump();
    return handle_request(request, ctx).dump();
}

std::vector<json> run_script(const json& script, Context& ctx) {
    const json* commands = &script;
    if (script.is_object()) {
        if (!script.contains("commands") || !script.at("commands").is_array())
            fail(ErrorCode::invalid_argument, "script object needs a 'commands' array");
        commands = &script.at("commands");
    } else if (!script.is_array()) {
        fail(ErrorCode::invalid_argument, "script must be an array of requests");
    }
    std::vector<json> responses;
    int next_id = 1;
    for (const auto& entry : *commands) {
        json request = entry;
        if (request.is_object() && !request.contains("id")) request["id"] = next_id;
        ++next_id;
        if (!request.is_object()) {
            responses.push_back(error_response(nullptr, 400, "request must be a JSON object"));
            continue;
        }
        responses.push_back(handle_request(request, ctx));
    }
    return responses;
}

// ---------------------------------------------------------------------------
// TCP server

Server::Server(Context& ctx, const std::string& host, int port) : ctx_(ctx) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) fail(ErrorCode::internal, "socket() failed");
    int opt = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &opt, sizeof opt);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        fail(ErrorCode::invalid_argument, "invalid bind address '" + host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 64) != 0) {
        ::close(listen_fd_);
        fail(ErrorCode::internal, "cannot bind " + host + ":" + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

Server::~Server() { stop(); }

void Server::stop() {
    bool was_running = running_.exchange(false);
    if (!was_running) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    {
        std::lock_guard lock(threads_mutex_);
        for (int fd : connection_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(threads_mutex_);
        threads.swap(connection_threads_);
    }
    for (auto& t : threads)
        if (t.joinable()) t.join();
}

void Server::accept_loop() {
    while (running_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (!running_) break;
            continue;
        }
        std::lock_guard lock(threads_mutex_);
        connection_fds_.push_back(fd);
        connection_threads_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void Server::serve_connection(int fd) {
    auto send_all = [fd](const std::string& data) {
        std::size_t sent = 0;
        while (sent < data.size()) {
            ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
            if (n <= 0) return false;
            sent += static_cast<std::size_t>(n);
        }
        return true;
    };

    std::string buffer;
    bool discarding = false;  // inside an oversized line
    char chunk[8192];
    while (running_) {
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));

        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (discarding) {
                discarding = false;  // the oversized line has ended
                continue;
            }
            if (line.empty()) continue;
            if (!send_all(handle_line(line, ctx_) + "\n")) return;
        }
        if (!discarding && buffer.size() > kMaxLineBytes) {
            if (!send_all(error_response(nullptr, 400, "request too large").dump() + "\n"))
                return;
            discarding = true;
            buffer.clear();
        }
    }
    ::close(fd);
}

}  // namespace kinesim::rpc
