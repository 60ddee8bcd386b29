#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinesim/collision.hpp"
#include "kinesim/geometry.hpp"
#include "kinesim/kinematics.hpp"
#include "kinesim/model_config.hpp"
#include "kinesim/rng.hpp"

namespace kinesim::sim {

/// Planar base pose; theta is kept normalized in (-pi, pi].
struct Pose2D {
    double x = 0;
    double y = 0;
    double theta = 0;

    Pose2D normalized() const;
    /// Lift to SE(3) at height z: Rz(theta) rotation, (x, y, z) translation.
    Pose3d lift(double z) const;
};

struct StaticBodySpec {
    collision::Shape shape;
    Pose3d pose;
};

collision::Shape shape_from_json(const nlohmann::json& j);
nlohmann::json shape_to_json(const collision::Shape& s);
/// Reads optional "xyz" and "rpy" arrays.
Pose3d pose_from_json(const nlohmann::json& j);

struct BaseCaps {
    double linear = 0.35;   // m/s
    double angular = 1.0;   // rad/s
};

struct InstanceConfig {
    double dt = 1.0 / 240.0;
    std::uint64_t seed = 0;
    bool ground_plane = true;
    BaseCaps base_caps;
    std::vector<StaticBodySpec> static_bodies;

    static InstanceConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct JointCommand {
    bool active = false;
    double target = 0;
    double speed = 0;  // effective speed, rad/s or m/s
};

struct BaseCommand {
    enum class Kind { none, velocity, go_to };
    Kind kind = Kind::none;
    double vx = 0, vy = 0, wz = 0;  // body-frame twist (velocity mode)
    Pose2D target;                  // go_to mode
};

struct WorldContact {
    std::string link;
    std::string other;  // "robot/<id>/<link>" or "static/<index>"
    collision::ContactResult contact;
};

struct RobotState {
    int id = 0;
    std::shared_ptr<const RobotAsset> asset;
    Pose2D base;
    Eigen::VectorXd q;                       // movable joints, model order
    std::vector<JointCommand> joint_commands;  // aligned with q
    BaseCommand base_command;
};

/// Read-only view of one instance at a fixed clock, used by sensors.
struct SensorSnapshot {
    double timestamp = 0;
    bool ground_plane = true;
    std::shared_ptr<const RobotAsset> asset;
    std::vector<Pose3d> link_poses;              // world poses of the robot's links
    std::vector<collision::WorldBody> bodies;    // everything except the robot itself
};

/// One independent simulated world: robots, a fixed-timestep clock, joint and
/// base controllers, static obstacles. All public methods serialize through
/// an internal mutex; distinct instances share no mutable state and may step
/// fully in parallel.
class Instance {
public:
    Instance(int id, InstanceConfig config);

    int id() const { return id_; }
    double dt() const { return config_.dt; }
    std::uint64_t step_count() const;
    double clock() const;
    const InstanceConfig& config() const { return config_; }

    /// Restores the post-create state (same seed, config-declared obstacles).
    void reset();

    int spawn_robot(std::shared_ptr<const RobotAsset> asset, const Pose2D& pose);
    void remove_robot(int robot);
    std::vector<int> robot_ids() const;
    void add_static_body(const collision::Shape& shape, const Pose3d& pose);

    void step(std::uint64_t n_steps);

    void set_angles(int robot, const std::vector<std::string>& names,
                    const std::vector<double>& targets, double fraction_max_speed);
    std::vector<double> get_angles(int robot, const std::vector<std::string>& names) const;
    void go_to_posture(int robot, const std::string& posture, double fraction_max_speed);
    void move(int robot, double vx, double vy, double wz);
    void move_to(int robot, double x, double y, double theta);
    bool base_command_active(int robot) const;
    Pose2D get_odometry(int robot) const;

    std::vector<WorldContact> world_collision(int robot,
                                              const std::vector<std::string>& links) const;
    std::vector<collision::LinkPair> robot_self_collision(int robot) const;

    SensorSnapshot sensor_snapshot(int robot) const;

    /// Canonical SHA-256 over the full instance state (exact double bits).
    std::string digest() const;

private:
    const RobotState& robot_ref(int robot) const;
    RobotState& robot_ref(int robot);
    std::vector<collision::WorldBody> world_bodies_unlocked(int exclude_robot) const;
    std::vector<Pose3d> robot_link_poses(const RobotState& r) const;
    void step_once();

    mutable std::recursive_mutex mutex_;
    int id_;
    InstanceConfig config_;
    std::uint64_t steps_ = 0;
    int next_robot_id_ = 1;
    std::map<int, RobotState> robots_;
    std::vector<StaticBodySpec> static_bodies_;
    CounterRng rng_;
};

/// Thread-safe instance registry with atomic id allocation.
class Registry {
public:
    int create(const InstanceConfig& config);
    std::shared_ptr<Instance> get(int id) const;
    void reset(int id);
    void stop(int id);
    std::vector<int> ids() const;

private:
    mutable std::mutex mutex_;
    int next_id_ = 1;
    std::map<int, std::shared_ptr<Instance>> instances_;
};

}  // namespace kinesim::sim
