#include "kinesim/simcore.hpp"

#include <algorithm>
#include <cmath>

#include "kinesim/error.hpp"
#include "kinesim/hash.hpp"

namespace kinesim::sim {

namespace {

// Arrival slack: covers accumulated rounding of the per-step ramp without
// ever letting a step exceed the speed contract's 1e-12 allowance.
constexpr double kSnapSlack = 1e-12;

}  // namespace

collision::Shape shape_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sphere") return collision::Sphere{j.at("radius").get<double>()};
    if (kind == "capsule")
        return collision::Capsule{j.at("radius").get<double>(), j.at("half_length").get<double>()};
    if (kind == "box") {
        const auto& he = j.at("half_extents");
        return collision::Box{Vec3d(he[0].get<double>(), he[1].get<double>(), he[2].get<double>())};
    }
    if (kind == "cylinder")
        return collision::Cylinder{j.at("radius").get<double>(), j.at("half_length").get<double>()};
    fail(ErrorCode::invalid_argument, "unknown shape kind '" + kind + "'");
}

nlohmann::json shape_to_json(const collision::Shape& s) {
    nlohmann::json j;
    j["kind"] = collision::shape_kind(s);
    if (const auto* sp = std::get_if<collision::Sphere>(&s)) {
        j["radius"] = sp->radius;
    } else if (const auto* cp = std::get_if<collision::Capsule>(&s)) {
        j["radius"] = cp->radius;
        j["half_length"] = cp->half_length;
    } else if (const auto* bp = std::get_if<collision::Box>(&s)) {
        j["half_extents"] = {bp->half_extents.x(), bp->half_extents.y(), bp->half_extents.z()};
    } else {
        const auto& cy = std::get<collision::Cylinder>(s);
        j["radius"] = cy.radius;
        j["half_length"] = cy.half_length;
    }
    return j;
}

Pose3d pose_from_json(const nlohmann::json& j) {
    Vec3d xyz = Vec3d::Zero(), rpy = Vec3d::Zero();
    if (j.contains("xyz")) {
        const auto& a = j.at("xyz");
        xyz = Vec3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    }
    if (j.contains("rpy")) {
        const auto& a = j.at("rpy");
        rpy = Vec3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    }
    return pose_from_xyz_rpy(xyz, rpy);
}

namespace {

void digest_shape(DigestWriter& w, const collision::Shape& s) {
    w.str(collision::shape_kind(s));
    if (const auto* sp = std::get_if<collision::Sphere>(&s)) {
        w.f64(sp->radius);
    } else if (const auto* cp = std::get_if<collision::Capsule>(&s)) {
        w.f64(cp->radius);
        w.f64(cp->half_length);
    } else if (const auto* bp = std::get_if<collision::Box>(&s)) {
        for (int i = 0; i < 3; ++i) w.f64(bp->half_extents[i]);
    } else {
        const auto& cy = std::get<collision::Cylinder>(s);
        w.f64(cy.radius);
        w.f64(cy.half_length);
    }
}

void digest_pose(DigestWriter& w, const Pose3d& p) {
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) w.f64(p.rotation(r, c));
    for (int i = 0; i < 3; ++i) w.f64(p.translation[i]);
}

}  // namespace

Pose2D Pose2D::normalized() const { return {x, y, wrap_angle(theta)}; }

Pose3d Pose2D::lift(double z) const {
    Pose3d p;
    p.rotation = rotation_rpy(0.0, 0.0, theta);
    p.translation = Vec3d(x, y, z);
    return p;
}

InstanceConfig InstanceConfig::from_json(const nlohmann::json& j) {
    InstanceConfig config;
    config.dt = j.value("dt", 1.0 / 240.0);
    config.seed = j.value("seed", std::uint64_t{0});
    config.ground_plane = j.value("ground_plane", true);
    if (j.contains("base_caps")) {
        config.base_caps.linear = j.at("base_caps").value("linear", 0.35);
        config.base_caps.angular = j.at("base_caps").value("angular", 1.0);
    }
    if (j.contains("static_bodies")) {
        for (const auto& body : j.at("static_bodies"))
            config.static_bodies.push_back({shape_from_json(body), pose_from_json(body)});
    }
    return config;
}

nlohmann::json InstanceConfig::to_json() const {
    nlohmann::json j;
    j["dt"] = dt;
    j["seed"] = seed;
    j["ground_plane"] = ground_plane;
    j["base_caps"] = {{"linear", base_caps.linear}, {"angular", base_caps.angular}};
    if (!static_bodies.empty()) {
        auto& arr = j["static_bodies"] = nlohmann::json::array();
        for (const auto& body : static_bodies) {
            nlohmann::json b = shape_to_json(body.shape);
            b["xyz"] = {body.pose.translation.x(), body.pose.translation.y(),
                        body.pose.translation.z()};
            Vec3d rpy = urdf::rpy_from_rotation(body.pose.rotation);
            b["rpy"] = {rpy.x(), rpy.y(), rpy.z()};
            arr.push_back(b);
        }
    }
    return j;
}

Instance::Instance(int id, InstanceConfig config)
    : id_(id), config_(std::move(config)), rng_(config_.seed) {
    if (!(config_.dt > 0)) fail(ErrorCode::invalid_argument, "dt must be positive");
    if (config_.base_caps.linear <= 0 || config_.base_caps.angular <= 0)
        fail(ErrorCode::invalid_argument, "base speed caps must be positive");
    for (const auto& body : config_.static_bodies)
        if (!collision::shape_valid(body.shape))
            fail(ErrorCode::invalid_argument, "static body has a non-positive dimension");
    static_bodies_ = config_.static_bodies;
}

std::uint64_t Instance::step_count() const {
    std::lock_guard lock(mutex_);
    return steps_;
}

double Instance::clock() const {
    std::lock_guard lock(mutex_);
    return static_cast<double>(steps_) * config_.dt;
}

void Instance::reset() {
    std::lock_guard lock(mutex_);
    steps_ = 0;
    next_robot_id_ = 1;
    robots_.clear();
    static_bodies_ = config_.static_bodies;
    rng_ = CounterRng(config_.seed);
}

const RobotState& Instance::robot_ref(int robot) const {
    auto it = robots_.find(robot);
    if (it == robots_.end())
        fail(ErrorCode::not_found, "unknown robot " + std::to_string(robot));
    return it->second;
}

RobotState& Instance::robot_ref(int robot) {
    return const_cast<RobotState&>(std::as_const(*this).robot_ref(robot));
}

std::vector<Pose3d> Instance::robot_link_poses(const RobotState& r) const {
    std::vector<Pose3d> poses;
    kin::link_poses(r.asset->model, r.q, poses);
    Pose3d base = r.base.lift(r.asset->config.base_height);
    for (Pose3d& p : poses) p = base * p;
    return poses;
}

std::vector<collision::WorldBody> Instance::world_bodies_unlocked(int exclude_robot) const {
    std::vector<collision::WorldBody> bodies;
    for (std::size_t i = 0; i < static_bodies_.size(); ++i)
        bodies.push_back({static_bodies_[i].shape, static_bodies_[i].pose,
                          "static/" + std::to_string(i)});
    for (const auto& [rid, robot] : robots_) {
        if (rid == exclude_robot) continue;
        std::vector<Pose3d> poses = robot_link_poses(robot);
        const auto& model = robot.asset->model;
        for (std::size_t li = 0; li < model.links.size(); ++li) {
            for (const auto& cs : model.links[li].collision_shapes)
                bodies.push_back({cs.shape, poses[li] * cs.origin,
                                  "robot/" + std::to_string(rid) + "/" + model.links[li].name});
        }
    }
    return bodies;
}

int Instance::spawn_robot(std::shared_ptr<const RobotAsset> asset, const Pose2D& pose) {
    std::lock_guard lock(mutex_);
    RobotState robot;
    robot.id = next_robot_id_;
    robot.asset = std::move(asset);
    robot.base = pose.normalized();
    robot.q = kin::Configuration::zeros(robot.asset->model).values();
    robot.joint_commands.assign(robot.q.size(), {});

    // A spawn that penetrates existing bodies is an error; nothing in this
    // kinematic world could resolve the overlap later.
    std::vector<collision::WorldBody> others = world_bodies_unlocked(-1);
    std::vector<Pose3d> poses = robot_link_poses(robot);
    const auto& model = robot.asset->model;
    std::vector<std::string> hits;
    for (std::size_t li = 0; li < model.links.size(); ++li) {
        for (const auto& cs : model.links[li].collision_shapes) {
            Pose3d world = poses[li] * cs.origin;
            for (const auto& body : others) {
                if (collision::pair_distance(cs.shape, world, body.shape, body.pose)
                        .signed_distance < 0)
                    hits.push_back(model.links[li].name + " vs " + body.id);
            }
            if (config_.ground_plane) {
                double lowest = collision::support_world(cs.shape, world, -Vec3d::UnitZ()).z();
                if (lowest < -1e-12) hits.push_back(model.links[li].name + " vs ground");
            }
        }
    }
    if (!hits.empty()) {
        std::string msg = "spawn pose collides:";
        for (const auto& h : hits) msg += " [" + h + "]";
        fail(ErrorCode::invalid_state, msg);
    }

    int id = next_robot_id_++;
    robots_.emplace(id, std::move(robot));
    return id;
}

void Instance::remove_robot(int robot) {
    std::lock_guard lock(mutex_);
    robot_ref(robot);  // 404 when absent
    robots_.erase(robot);
}

std::vector<int> Instance::robot_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<int> ids;
    for (const auto& [id, _] : robots_) ids.push_back(id);
    return ids;
}

void Instance::add_static_body(const collision::Shape& shape, const Pose3d& pose) {
    std::lock_guard lock(mutex_);
    if (!collision::shape_valid(shape))
        fail(ErrorCode::invalid_argument, "static body has a non-positive dimension");
    static_bodies_.push_back({shape, pose});
}

void Instance::step_once() {
    const double dt = config_.dt;
    for (auto& [rid, robot] : robots_) {
        // Joint ramps: move toward the target, at most speed*dt per step.
        for (Eigen::Index i = 0; i < robot.q.size(); ++i) {
            JointCommand& cmd = robot.joint_commands[i];
            if (!cmd.active) continue;
            double err = cmd.target - robot.q[i];
            double max_step = cmd.speed * dt;
            if (std::abs(err) <= max_step + kSnapSlack) {
                robot.q[i] = cmd.target;
                cmd.active = false;
            } else {
                robot.q[i] += err > 0 ? max_step : -max_step;
            }
        }

        BaseCommand& base_cmd = robot.base_command;
        if (base_cmd.kind == BaseCommand::Kind::velocity) {
            // Exact integration of the constant body-frame twist over dt.
            double th0 = robot.base.theta;
            double w = base_cmd.wz;
            if (std::abs(w) < 1e-12) {
                double c = std::cos(th0), s = std::sin(th0);
                robot.base.x += (base_cmd.vx * c - base_cmd.vy * s) * dt;
                robot.base.y += (base_cmd.vx * s + base_cmd.vy * c) * dt;
                robot.base.theta = wrap_angle(th0 + w * dt);
            } else {
                double th1 = th0 + w * dt;
                double ds = std::sin(th1) - std::sin(th0);
                double dc = std::cos(th1) - std::cos(th0);
                robot.base.x += (base_cmd.vx * ds + base_cmd.vy * dc) / w;
                robot.base.y += (-base_cmd.vx * dc + base_cmd.vy * ds) / w;
                robot.base.theta = wrap_angle(th1);
            }
        } else if (base_cmd.kind == BaseCommand::Kind::go_to) {
            // Straight-line translation and shortest-path rotation, each at
            // its capped speed.
            double ex = base_cmd.target.x - robot.base.x;
            double ey = base_cmd.target.y - robot.base.y;
            double dist = std::hypot(ex, ey);
            double max_lin = config_.base_caps.linear * dt;
            if (dist <= max_lin + kSnapSlack) {
                robot.base.x = base_cmd.target.x;
                robot.base.y = base_cmd.target.y;
            } else {
                robot.base.x += ex / dist * max_lin;
                robot.base.y += ey / dist * max_lin;
            }
            double err = wrap_angle(base_cmd.target.theta - robot.base.theta);
            double max_ang = config_.base_caps.angular * dt;
            if (std::abs(err) <= max_ang + kSnapSlack)
                robot.base.theta = wrap_angle(base_cmd.target.theta);
            else
                robot.base.theta = wrap_angle(robot.base.theta + (err > 0 ? max_ang : -max_ang));

            bool done = std::hypot(base_cmd.target.x - robot.base.x,
                                   base_cmd.target.y - robot.base.y) < 1e-6 &&
                        std::abs(wrap_angle(base_cmd.target.theta - robot.base.theta)) < 1e-6;
            if (done) base_cmd = BaseCommand{};
        }
    }
    ++steps_;
}

void Instance::step(std::uint64_t n_steps) {
    std::lock_guard lock(mutex_);
    if (n_steps == 0) fail(ErrorCode::invalid_argument, "n_steps must be positive");
    for (std::uint64_t i = 0; i < n_steps; ++i) step_once();
}

void Instance::set_angles(int robot, const std::vector<std::string>& names,
                          const std::vector<double>& targets, double fraction_max_speed) {
    std::lock_guard lock(mutex_);
    if (names.size() != targets.size())
        fail(ErrorCode::invalid_argument, "names and targets differ in length");
    if (!(fraction_max_speed > 0.0) || fraction_max_speed > 1.0)
        fail(ErrorCode::invalid_argument, "fraction_max_speed must be in (0, 1]");
    RobotState& r = robot_ref(robot);
    const auto& model = r.asset->model;

    // Validate the whole group before committing any command.
    std::vector<int> positions(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        int j = model.joint_index(names[i]);
        int pos = model.movable_position(j);
        if (pos < 0) fail(ErrorCode::not_found, "joint '" + names[i] + "' is not commandable");
        const urdf::JointLimits& limits = *model.joints[j].limits;
        if (limits.has_position_limits &&
            (targets[i] < limits.lower || targets[i] > limits.upper))
            fail(ErrorCode::invalid_argument,
                 "target for joint '" + names[i] + "' is outside its limits");
        positions[i] = pos;
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        const urdf::Joint& joint = model.joints[model.movable_joints()[positions[i]]];
        JointCommand& cmd = r.joint_commands[positions[i]];
        cmd.active = true;
        cmd.target = targets[i];
        cmd.speed = fraction_max_speed * joint.limits->velocity_max;
    }
}

std::vector<double> Instance::get_angles(int robot, const std::vector<std::string>& names) const {
    std::lock_guard lock(mutex_);
    const RobotState& r = robot_ref(robot);
    const auto& model = r.asset->model;
    std::vector<double> values;
    values.reserve(names.size());
    for (const auto& name : names) {
        int pos = model.movable_position(model.joint_index(name));
        if (pos < 0) fail(ErrorCode::not_found, "joint '" + name + "' is not commandable");
        values.push_back(r.q[pos]);
    }
    return values;
}

void Instance::go_to_posture(int robot, const std::string& posture, double fraction_max_speed) {
    std::lock_guard lock(mutex_);
    const RobotState& r = robot_ref(robot);
    auto it = r.asset->config.postures.find(posture);
    if (it == r.asset->config.postures.end())
        fail(ErrorCode::not_found, "unknown posture '" + posture + "'");
    std::vector<std::string> names;
    std::vector<double> targets;
    for (const auto& [joint, value] : it->second) {
        names.push_back(joint);
        targets.push_back(value);
    }
    set_angles(robot, names, targets, fraction_max_speed);
}

void Instance::move(int robot, double vx, double vy, double wz) {
    std::lock_guard lock(mutex_);
    RobotState& r = robot_ref(robot);
    if (std::hypot(vx, vy) > config_.base_caps.linear + 1e-12)
        fail(ErrorCode::invalid_argument, "linear speed exceeds the configured cap");
    if (std::abs(wz) > config_.base_caps.angular + 1e-12)
        fail(ErrorCode::invalid_argument, "angular speed exceeds the configured cap");
    r.base_command.kind = BaseCommand::Kind::velocity;
    r.base_command.vx = vx;
    r.base_command.vy = vy;
    r.base_command.wz = wz;
}

void Instance::move_to(int robot, double x, double y, double theta) {
    std::lock_guard lock(mutex_);
    RobotState& r = robot_ref(robot);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta))
        fail(ErrorCode::invalid_argument, "move_to target must be finite");
    r.base_command.kind = BaseCommand::Kind::go_to;
    r.base_command.target = Pose2D{x, y, theta}.normalized();
}

bool Instance::base_command_active(int robot) const {
    std::lock_guard lock(mutex_);
    return robot_ref(robot).base_command.kind != BaseCommand::Kind::none;
}

Pose2D Instance::get_odometry(int robot) const {
    std::lock_guard lock(mutex_);
    return robot_ref(robot).base;
}

std::vector<WorldContact> Instance::world_collision(int robot,
                                                    const std::vector<std::string>& links) const {
    std::lock_guard lock(mutex_);
    const RobotState& r = robot_ref(robot);
    const auto& model = r.asset->model;
    for (const auto& name : links) model.link_index(name);  // 404 for unknown links

    std::vector<WorldContact> contacts;
    if (links.empty()) return contacts;
    std::vector<collision::WorldBody> others = world_bodies_unlocked(robot);
    std::vector<Pose3d> poses = robot_link_poses(r);
    for (const auto& name : links) {
        int li = model.link_index(name);
        for (const auto& cs : model.links[li].collision_shapes) {
            Pose3d world = poses[li] * cs.origin;
            collision::Aabb box = collision::shape_aabb(cs.shape, world);
            for (const auto& body : others) {
                if (!box.overlaps(collision::shape_aabb(body.shape, body.pose))) continue;
                collision::ContactResult res =
                    collision::pair_distance(cs.shape, world, body.shape, body.pose);
                if (res.signed_distance < 0) contacts.push_back({name, body.id, res});
            }
        }
    }
    return contacts;
}

std::vector<collision::LinkPair> Instance::robot_self_collision(int robot) const {
    std::lock_guard lock(mutex_);
    const RobotState& r = robot_ref(robot);
    std::vector<Pose3d> poses;
    kin::link_poses(r.asset->model, r.q, poses);
    return collision::self_collision_posed(r.asset->model, poses,
                                           r.asset->config.self_collision_ignore);
}

SensorSnapshot Instance::sensor_snapshot(int robot) const {
    std::lock_guard lock(mutex_);
    const RobotState& r = robot_ref(robot);
    SensorSnapshot snap;
    snap.timestamp = static_cast<double>(steps_) * config_.dt;
    snap.ground_plane = config_.ground_plane;
    snap.asset = r.asset;
    snap.link_poses = robot_link_poses(r);
    snap.bodies = world_bodies_unlocked(robot);
    return snap;
}

std::string Instance::digest() const {
    std::lock_guard lock(mutex_);
    DigestWriter w;
    w.f64(config_.dt);
    w.u64(config_.seed);
    w.u64(config_.ground_plane ? 1 : 0);
    w.f64(config_.base_caps.linear);
    w.f64(config_.base_caps.angular);
    w.u64(steps_);
    w.u64(static_cast<std::uint64_t>(next_robot_id_));
    w.u64(rng_.counter());

    w.u64(static_bodies_.size());
    for (const auto& body : static_bodies_) {
        digest_shape(w, body.shape);
        digest_pose(w, body.pose);
    }

    w.u64(robots_.size());
    for (const auto& [rid, robot] : robots_) {
        w.u64(static_cast<std::uint64_t>(rid));
        w.str(robot.asset->model_hash());
        w.f64(robot.base.x);
        w.f64(robot.base.y);
        w.f64(robot.base.theta);
        w.u64(static_cast<std::uint64_t>(robot.q.size()));
        for (Eigen::Index i = 0; i < robot.q.size(); ++i) {
            w.f64(robot.q[i]);
            w.u64(robot.joint_commands[i].active ? 1 : 0);
            w.f64(robot.joint_commands[i].target);
            w.f64(robot.joint_commands[i].speed);
        }
        w.u64(static_cast<std::uint64_t>(robot.base_command.kind));
        w.f64(robot.base_command.vx);
        w.f64(robot.base_command.vy);
        w.f64(robot.base_command.wz);
        w.f64(robot.base_command.target.x);
        w.f64(robot.base_command.target.y);
        w.f64(robot.base_command.target.theta);
    }
    return w.hex();
}

int Registry::create(const InstanceConfig& config) {
    std::lock_guard lock(mutex_);
    int id = next_id_;
    auto instance = std::make_shared<Instance>(id, config);  // throws on bad config
    ++next_id_;
    instances_[id] = std::move(instance);
    return id;
}

std::shared_ptr<Instance> Registry::get(int id) const {
    std::lock_guard lock(mutex_);
    auto it = instances_.find(id);
    if (it == instances_.end())
        fail(ErrorCode::not_found, "unknown instance " + std::to_string(id));
    return it->second;
}

void Registry::reset(int id) { get(id)->reset(); }

void Registry::stop(int id) {
    std::lock_guard lock(mutex_);
    if (instances_.erase(id) == 0)
        fail(ErrorCode::not_found, "unknown instance " + std::to_string(id));
}

std::vector<int> Registry::ids() const {
    std::lock_guard lock(mutex_);
    std::vector<int> out;
    for (const auto& [id, _] : instances_) out.push_back(id);
    return out;
}

}  // namespace kinesim::sim
