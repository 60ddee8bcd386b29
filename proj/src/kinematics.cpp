#include "kinesim/kinematics.hpp"

#include <cmath>

namespace kinesim::kin {

Configuration::Configuration(const RobotModel& model, Eigen::VectorXd values,
                             bool enforce_limits)
    : model_(&model), q_(std::move(values)) {
    const auto& movable = model.movable_joints();
    if (q_.size() != static_cast<Eigen::Index>(movable.size()))
        fail(ErrorCode::invalid_argument,
             "configuration has " + std::to_string(q_.size()) + " values, model has " +
                 std::to_string(movable.size()) + " movable joints");
    if (enforce_limits) {
        for (std::size_t i = 0; i < movable.size(); ++i) {
            const urdf::Joint& joint = model.joints[movable[i]];
            if (!joint.limits || !joint.limits->has_position_limits) continue;
            if (q_[i] < joint.limits->lower || q_[i] > joint.limits->upper)
                fail(ErrorCode::invalid_argument,
                     "value " + std::to_string(q_[i]) + " outside limits of joint '" +
                         joint.name + "'");
        }
    }
}

Configuration Configuration::zeros(const RobotModel& model) {
    const auto& movable = model.movable_joints();
    Eigen::VectorXd q = Eigen::VectorXd::Zero(movable.size());
    for (std::size_t i = 0; i < movable.size(); ++i) {
        const urdf::Joint& joint = model.joints[movable[i]];
        if (joint.limits && joint.limits->has_position_limits)
            q[i] = std::clamp(0.0, joint.limits->lower, joint.limits->upper);
    }
    return Configuration(model, std::move(q));
}

Configuration Configuration::from_map(const RobotModel& model,
                                      const std::map<std::string, double>& values,
                                      bool enforce_limits) {
    Configuration q = zeros(model);
    for (const auto& [name, value] : values) q.set(name, value, enforce_limits);
    return q;
}

double Configuration::at(const std::string& joint_name) const {
    int j = model_->joint_index(joint_name);
    int pos = model_->movable_position(j);
    if (pos < 0) fail(ErrorCode::invalid_argument, "joint '" + joint_name + "' is fixed");
    return q_[pos];
}

void Configuration::set(const std::string& joint_name, double value, bool enforce_limits) {
    int j = model_->joint_index(joint_name);
    int pos = model_->movable_position(j);
    if (pos < 0) fail(ErrorCode::invalid_argument, "joint '" + joint_name + "' is fixed");
    if (enforce_limits) {
        const urdf::Joint& joint = model_->joints[j];
        if (joint.limits && joint.limits->has_position_limits &&
            (value < joint.limits->lower || value > joint.limits->upper))
            fail(ErrorCode::invalid_argument,
                 "value " + std::to_string(value) + " outside limits of joint '" + joint_name +
                     "'");
    }
    q_[pos] = value;
}

bool Configuration::within_limits(double tol) const {
    const auto& movable = model_->movable_joints();
    for (std::size_t i = 0; i < movable.size(); ++i) {
        const urdf::Joint& joint = model_->joints[movable[i]];
        if (!joint.limits || !joint.limits->has_position_limits) continue;
        if (q_[i] < joint.limits->lower - tol || q_[i] > joint.limits->upper + tol) return false;
    }
    return true;
}

void link_poses(const RobotModel& model, const Eigen::VectorXd& q, std::vector<Pose3d>& out) {
    if (q.size() != static_cast<Eigen::Index>(model.movable_joints().size()))
        fail(ErrorCode::invalid_argument, "configuration does not cover every movable joint");
    if (q.hasNaN()) fail(ErrorCode::invalid_argument, "NaN in configuration");

    out.assign(model.links.size(), Pose3d::Identity());
    for (int link : model.topo_links()) {
        int j = model.parent_joint_of(link);
        if (j < 0) continue;  // root
        const urdf::Joint& joint = model.joints[j];
        const Pose3d& parent = out[model.link_index(joint.parent_link)];
        Pose3d local = joint.origin;
        if (joint.movable()) {
            double value = q[model.movable_position(j)];
            local = local * joint_motion<double>(joint.kind, joint.axis, value);
        }
        out[link] = parent * local;
    }
}

std::map<std::string, Pose3d> forward_kinematics(const RobotModel& model,
                                                 const Configuration& q) {
    std::vector<Pose3d> poses;
    link_poses(model, q.values(), poses);
    std::map<std::string, Pose3d> out;
    for (std::size_t i = 0; i < model.links.size(); ++i) out[model.links[i].name] = poses[i];
    return out;
}

std::string to_string(JacobianMode mode) {
    return mode == JacobianMode::full_6 ? "full6" : "pos3";
}

}  // namespace kinesim::kin
