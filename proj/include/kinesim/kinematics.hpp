#pragma once

#include <Eigen/SVD>

#include <map>
#include <string>
#include <vector>

#include "kinesim/error.hpp"
#include "kinesim/geometry.hpp"
#include "kinesim/urdf.hpp"

namespace kinesim::kin {

using urdf::KinematicChain;
using urdf::RobotModel;

/// Joint-position vector over a model's movable joints, in document order.
class Configuration {
public:
    Configuration(const RobotModel& model, Eigen::VectorXd values, bool enforce_limits = false);

    /// All zeros, clamped into each joint's position limits.
    static Configuration zeros(const RobotModel& model);
    static Configuration from_map(const RobotModel& model,
                                  const std::map<std::string, double>& values,
                                  bool enforce_limits = true);

    const RobotModel& model() const { return *model_; }
    const Eigen::VectorXd& values() const { return q_; }
    Eigen::VectorXd& values() { return q_; }

    double at(const std::string& joint_name) const;
    void set(const std::string& joint_name, double value, bool enforce_limits = true);

    bool within_limits(double tol = 0.0) const;

private:
    const RobotModel* model_;
    Eigen::VectorXd q_;
};

/// Whole-model forward kinematics; poses of every link in the root frame.
std::map<std::string, Pose3d> forward_kinematics(const RobotModel& model,
                                                 const Configuration& q);

/// Indexed fast path: out[i] is the pose of link i (model link order) in the
/// root frame. `q` aligns with model.movable_joints().
void link_poses(const RobotModel& model, const Eigen::VectorXd& q, std::vector<Pose3d>& out);

enum class JacobianMode { full_6, position_3 };

std::string to_string(JacobianMode mode);

template <typename Scalar>
Pose3<Scalar> joint_motion(urdf::JointKind kind, const Vec3<Scalar>& axis, Scalar q) {
    if (kind == urdf::JointKind::prismatic)
        return Pose3<Scalar>::Translation(axis * q);
    return Pose3<Scalar>::Rotation(rotation_about(axis, q));
}

template <typename Scalar>
Pose3<Scalar> cast_pose(const Pose3d& p) {
    return Pose3<Scalar>{p.rotation.template cast<Scalar>(), p.translation.template cast<Scalar>()};
}

/// Tip pose in the chain base frame.
template <typename Scalar>
Pose3<Scalar> chain_fk(const KinematicChain& chain, const VecX<Scalar>& q) {
    if (q.size() != chain.dof())
        fail(ErrorCode::invalid_argument,
             "configuration has " + std::to_string(q.size()) + " values, chain has " +
                 std::to_string(chain.dof()) + " joints");
    Pose3<Scalar> t = Pose3<Scalar>::Identity();
    for (int i = 0; i < chain.dof(); ++i) {
        const urdf::ChainStep& step = chain.steps[i];
        t = t * cast_pose<Scalar>(step.pre) *
            joint_motion<Scalar>(step.kind, step.axis.cast<Scalar>(), q[i]);
    }
    return t * cast_pose<Scalar>(chain.tail);
}

/// Geometric Jacobian of the chain tip. Rows are (vx, vy, vz, wx, wy, wz) in
/// the chain base frame; the reference point is the tip-frame origin.
/// Column i is (z_i x (p_tip - p_i); z_i) for revolute joints and (z_i; 0)
/// for prismatic ones.
template <typename Scalar>
MatX<Scalar> geometric_jacobian(const KinematicChain& chain, const VecX<Scalar>& q,
                                JacobianMode mode = JacobianMode::full_6) {
    const int n = chain.dof();
    if (q.size() != n)
        fail(ErrorCode::invalid_argument,
             "configuration has " + std::to_string(q.size()) + " values, chain has " +
                 std::to_string(n) + " joints");

    std::vector<Vec3<Scalar>> axes(n), origins(n);
    Pose3<Scalar> t = Pose3<Scalar>::Identity();
    for (int i = 0; i < n; ++i) {
        const urdf::ChainStep& step = chain.steps[i];
        t = t * cast_pose<Scalar>(step.pre);
        axes[i] = t.rotation * step.axis.cast<Scalar>();
        origins[i] = t.translation;
        t = t * joint_motion<Scalar>(step.kind, step.axis.cast<Scalar>(), q[i]);
    }
    const Vec3<Scalar> tip = (t * cast_pose<Scalar>(chain.tail)).translation;

    MatX<Scalar> jac(6, n);
    for (int i = 0; i < n; ++i) {
        if (chain.steps[i].kind == urdf::JointKind::prismatic) {
            jac.template block<3, 1>(0, i) = axes[i];
            jac.template block<3, 1>(3, i).setZero();
        } else {
            jac.template block<3, 1>(0, i) = axes[i].cross(tip - origins[i]);
            jac.template block<3, 1>(3, i) = axes[i];
        }
    }
    if (mode == JacobianMode::position_3) return jac.topRows(3);
    return jac;
}

/// Yoshikawa manipulability: the product of the Jacobian's singular values
/// (equivalently sqrt(det(J J^T)) or sqrt(det(J^T J)), whichever is square).
/// Configurations whose smallest singular value falls below 1e-12 report
/// exactly zero.
template <typename Scalar>
Scalar manipulability(const KinematicChain& chain, const VecX<Scalar>& q,
                      JacobianMode mode = JacobianMode::full_6) {
    if (chain.dof() < 1)
        fail(ErrorCode::invalid_argument, "manipulability requires at least one joint");
    MatX<Scalar> jac = geometric_jacobian(chain, q, mode);
    Eigen::JacobiSVD<MatX<Scalar>> svd(jac);
    const auto& sv = svd.singularValues();
    Scalar w(1);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] < Scalar(1e-12)) return Scalar(0);
        w *= sv[i];
    }
    return w;
}

}  // namespace kinesim::kin
