#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "kinesim/error.hpp"
#include "kinesim/kinematics.hpp"
#include "kinesim/model_config.hpp"
#include "kinesim/rpc.hpp"
#include "kinesim/urdf.hpp"
#include "kinesim/version.hpp"
#include "kinesim/workspace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::atomic<bool> g_interrupted{false};

std::pair<std::string, std::string> split_chain(const std::string& spec) {
    auto comma = spec.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= spec.size())
        throw kinesim::Error(kinesim::ErrorCode::invalid_argument,
                             "--chain expects 'base_link,tip_link'");
    return {spec.substr(0, comma), spec.substr(comma + 1)};
}

std::vector<double> parse_q(const std::string& csv) {
    std::vector<double> out;
    if (csv.empty()) return out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        std::string token = csv.substr(start, comma == std::string::npos ? comma : comma - start);
        try {
            out.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw kinesim::Error(kinesim::ErrorCode::invalid_argument,
                                 "invalid joint value '" + token + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

int cmd_validate(const std::string& path) {
    using kinesim::urdf::Finding;
    kinesim::urdf::ValidationReport report;
    try {
        kinesim::urdf::RobotModel model = kinesim::urdf::parse_urdf_file(path);
        report = kinesim::urdf::validate_model(model);
    } catch (const kinesim::Error& e) {
        report.findings.push_back({Finding::Severity::error, path, e.what()});
    }
    std::cout << report.to_json() << "\n";
    return report.ok() ? kExitOk : kExitValidation;
}

int cmd_fk(const std::string& path, const std::string& chain_spec, const std::string& q_csv) {
    auto [base, tip] = split_chain(chain_spec);
    kinesim::urdf::RobotModel model = kinesim::urdf::parse_urdf_file(path);
    kinesim::urdf::KinematicChain chain = kinesim::urdf::extract_chain(model, base, tip);
    std::vector<double> q = parse_q(q_csv);
    Eigen::VectorXd qv = Eigen::Map<Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
    kinesim::Pose3d pose = kinesim::kin::chain_fk<double>(chain, qv);

    nlohmann::json out;
    out["chain"] = {base, tip};
    out["translation"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
    auto& rows = out["rotation"] = nlohmann::json::array();
    for (int r = 0; r < 3; ++r)
        rows.push_back({pose.rotation(r, 0), pose.rotation(r, 1), pose.rotation(r, 2)});
    std::cout << out.dump() << "\n";
    return kExitOk;
}

struct WorkspaceArgs {
    std::string urdf;
    std::vector<std::string> chains;
    std::vector<std::string> out_ply;
    std::vector<std::string> out_csv;
    int instances = 10;
    int per_instance = 4000;
    std::uint64_t seed = 0;
    std::string mode = "full6";
    std::string rest_posture = "Stand";
    int parallel = 0;
    bool joint_normalization = false;
    bool audit = false;
};

int cmd_workspace(const WorkspaceArgs& args) {
    namespace ws = kinesim::workspace;
    if (args.out_ply.size() != args.chains.size())
        throw kinesim::Error(kinesim::ErrorCode::invalid_argument,
                             "--out must be given once per --chain");
    if (!args.out_csv.empty() && args.out_csv.size() != args.chains.size())
        throw kinesim::Error(kinesim::ErrorCode::invalid_argument,
                             "--csv must be given once per --chain");

    auto asset = kinesim::load_robot_asset(args.urdf);
    ws::SampleOptions options;
    options.mode = args.mode == "pos3" ? kinesim::kin::JacobianMode::position_3
                                       : kinesim::kin::JacobianMode::full_6;
    options.rest_posture = args.rest_posture;
    options.parallelism = args.parallel;

    std::vector<kinesim::urdf::KinematicChain> chains;
    std::vector<ws::WorkspaceCloud> clouds;
    for (std::size_t c = 0; c < args.chains.size(); ++c) {
        auto [base, tip] = split_chain(args.chains[c]);
        chains.push_back(kinesim::urdf::extract_chain(asset->model, base, tip));
        // Chains draw from disjoint stream blocks so several chains in one
        // invocation stay reproducible independently of each other.
        std::uint64_t chain_seed = args.seed + static_cast<std::uint64_t>(c) * 0x10000;
        auto start = std::chrono::steady_clock::now();
        clouds.push_back(ws::sample_workspace(*asset, chains.back(), args.per_instance,
                                              args.instances, chain_seed, options));
        auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
        std::fprintf(stderr, "chain %s: %zu samples in %.2f s\n", args.chains[c].c_str(),
                     clouds.back().samples.size(), elapsed.count());
    }

    if (args.joint_normalization) {
        double w_max = 0;
        for (const auto& cloud : clouds) w_max = std::max(w_max, ws::max_raw_manipulability(cloud));
        for (auto& cloud : clouds) ws::normalize_workspace_with(cloud, w_max);
    } else {
        for (auto& cloud : clouds) ws::normalize_workspace(cloud);
    }

    for (std::size_t c = 0; c < clouds.size(); ++c) {
        ws::export_ply(clouds[c], args.out_ply[c]);
        if (!args.out_csv.empty()) ws::export_csv(clouds[c], args.out_csv[c]);
        std::printf("%s: %zu samples, w_raw_max=%.12g -> %s\n", args.chains[c].c_str(),
                    clouds[c].samples.size(), ws::max_raw_manipulability(clouds[c]),
                    args.out_ply[c].c_str());
    }

    if (args.audit) {
        for (std::size_t c = 0; c < clouds.size(); ++c) {
            ws::AuditResult result = ws::audit_cloud(*asset, chains[c], clouds[c]);
            std::printf("audit %s: %s (%zu samples)\n", args.chains[c].c_str(),
                        result.ok ? "ok" : result.message.c_str(), result.checked);
            if (!result.ok) return kExitRuntime;
        }
    }
    return kExitOk;
}

int cmd_serve(const std::string& bind) {
    auto colon = bind.rfind(':');
    if (colon == std::string::npos)
        throw kinesim::Error(kinesim::ErrorCode::invalid_argument, "--bind expects host:port");
    std::string host = bind.substr(0, colon);
    int port = std::stoi(bind.substr(colon + 1));

    kinesim::rpc::Context ctx;
    kinesim::rpc::Server server(ctx, host, port);
    std::printf("listening on %s:%d\n", host.c_str(), server.port());
    std::fflush(stdout);

    std::signal(SIGINT, [](int) { g_interrupted = true; });
    std::signal(SIGTERM, [](int) { g_interrupted = true; });
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    return kExitOk;
}

int cmd_scenario(const std::string& path, bool print_responses) {
    std::ifstream in(path);
    if (!in)
        throw kinesim::Error(kinesim::ErrorCode::not_found, "cannot open script '" + path + "'");
    nlohmann::json script;
    try {
        in >> script;
    } catch (const nlohmann::json::exception& e) {
        throw kinesim::Error(kinesim::ErrorCode::invalid_argument,
                             std::string("invalid script JSON: ") + e.what());
    }

    kinesim::rpc::Context ctx;
    auto responses = kinesim::rpc::run_script(script, ctx);
    if (print_responses)
        for (const auto& r : responses) std::cout << r.dump() << "\n";
    for (int id : ctx.registry().ids())
        std::cout << "instance " << id << " digest " << ctx.registry().get(id)->digest() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Headless kinematic robot simulator", "kinesim"};
    app.set_version_flag("--version", KINESIM_VERSION);
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Validate a URDF document");
    validate->add_option("urdf", validate_path, "URDF file")->required();

    std::string fk_path, fk_chain, fk_q;
    auto* fk = app.add_subcommand("fk", "Forward kinematics of a chain");
    fk->add_option("urdf", fk_path, "URDF file")->required();
    fk->add_option("--chain", fk_chain, "base_link,tip_link")->required();
    fk->add_option("--q", fk_q, "comma-separated joint values (radians/meters)");

    WorkspaceArgs ws_args;
    auto* ws = app.add_subcommand("workspace", "Sample a manipulability workspace");
    ws->add_option("urdf", ws_args.urdf, "URDF file")->required();
    ws->add_option("--chain", ws_args.chains, "base_link,tip_link (repeatable)")->required();
    ws->add_option("--instances", ws_args.instances, "parallel sampling instances");
    ws->add_option("--per-instance", ws_args.per_instance, "accepted samples per instance");
    ws->add_option("--seed", ws_args.seed, "RNG seed");
    ws->add_option("--out", ws_args.out_ply, "output PLY path (one per chain)")->required();
    ws->add_option("--csv", ws_args.out_csv, "output CSV path (one per chain)");
    ws->add_option("--mode", ws_args.mode, "Jacobian mode: full6 | pos3")
        ->check(CLI::IsMember({"full6", "pos3"}));
    ws->add_option("--rest-posture", ws_args.rest_posture,
                   "posture for joints outside the chain");
    ws->add_option("--parallel", ws_args.parallel, "worker threads (0 = auto)");
    ws->add_flag("--joint-normalization", ws_args.joint_normalization,
                 "normalize all chains against their common maximum");
    ws->add_flag("--audit", ws_args.audit, "replay every sample after the run");

    std::string serve_bind = "127.0.0.1:7010";
    auto* serve = app.add_subcommand("serve", "Run the TCP control server");
    serve->add_option("--bind", serve_bind, "host:port");

    std::string scenario_path;
    bool scenario_print = false;
    auto* scenario = app.add_subcommand("scenario", "Replay a recorded command script");
    scenario->add_option("script", scenario_path, "script JSON file")->required();
    scenario->add_flag("--print-responses", scenario_print, "print one response per command");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(validate_path);
        if (fk->parsed()) return cmd_fk(fk_path, fk_chain, fk_q);
        if (ws->parsed()) return cmd_workspace(ws_args);
        if (serve->parsed()) return cmd_serve(serve_bind);
        if (scenario->parsed()) return cmd_scenario(scenario_path, scenario_print);
    } catch (const kinesim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == kinesim::ErrorCode::invalid_argument ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
