#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kinesim/geometry.hpp"
#include "kinesim/shapes.hpp"

namespace kinesim::urdf {

enum class JointKind { revolute, continuous, prismatic, fixed };

std::string to_string(JointKind kind);
std::optional<JointKind> joint_kind_from(const std::string& name);

struct Inertial {
    double mass = 0;
    Pose3d origin;                     // center of mass frame
    Mat3d inertia = Mat3d::Zero();     // about the COM, kg m^2
};

struct CollisionShape {
    collision::Shape shape;
    Pose3d origin;  // link-local pose of the shape
};

struct Link {
    std::string name;
    std::optional<Inertial> inertial;
    std::vector<CollisionShape> collision_shapes;
    std::optional<std::string> visual_mesh_ref;  // recorded path, never loaded
};

struct JointLimits {
    double lower = 0;
    double upper = 0;
    bool has_position_limits = false;  // false for continuous joints
    double velocity_max = 0;
    double effort_max = 0;
};

struct Joint {
    std::string name;
    JointKind kind = JointKind::fixed;
    std::string parent_link;
    std::string child_link;
    Pose3d origin;
    Vec3d axis = Vec3d::UnitX();
    std::optional<JointLimits> limits;  // absent for fixed joints

    bool movable() const { return kind != JointKind::fixed; }
};

/// Kinematic tree parsed from a URDF document. After construction (or any
/// programmatic mutation) `finalize()` must be called; it verifies the tree
/// structure and builds the index tables the rest of the library relies on.
/// A finalized model is immutable by convention and safe to share across
/// threads by const reference.
struct RobotModel {
    std::string name;
    std::vector<Link> links;
    std::vector<Joint> joints;
    std::string root_link;
    std::string source_sha256;  // hash of the source document; empty for programmatic models

    void finalize();

    bool has_link(const std::string& name) const { return link_ids_.count(name) > 0; }
    int link_index(const std::string& name) const;
    int joint_index(const std::string& name) const;

    /// Movable joints in document order; Configuration vectors align to this.
    const std::vector<int>& movable_joints() const { return movable_; }
    /// Position of joint `joint_idx` inside movable_joints(), or -1 if fixed.
    int movable_position(int joint_idx) const { return movable_pos_[joint_idx]; }

    int parent_joint_of(int link_idx) const { return parent_joint_[link_idx]; }
    const std::vector<int>& child_joints_of(int link_idx) const { return child_joints_[link_idx]; }
    /// Links ordered root-first (every parent precedes its children).
    const std::vector<int>& topo_links() const { return topo_links_; }

    bool links_adjacent(int a, int b) const;

private:
    std::unordered_map<std::string, int> link_ids_;
    std::unordered_map<std::string, int> joint_ids_;
    std::vector<int> parent_joint_;               // per link, -1 for root
    std::vector<std::vector<int>> child_joints_;  // per link
    std::vector<int> topo_links_;
    std::vector<int> movable_;
    std::vector<int> movable_pos_;
};

/// A single movable joint on a chain. `pre` is the fixed transform from the
/// previous chain frame to this joint's frame; any interleaved fixed joints
/// are folded into it.
struct ChainStep {
    Pose3d pre;
    JointKind kind = JointKind::revolute;
    Vec3d axis = Vec3d::UnitZ();
    JointLimits limits;
    std::string joint_name;
    int joint_index = -1;  // into RobotModel::joints
};

struct KinematicChain {
    std::string base_link;
    std::string tip_link;
    std::vector<ChainStep> steps;
    Pose3d tail;  // fixed transform after the last movable joint to the tip frame

    int dof() const { return static_cast<int>(steps.size()); }
};

/// Chain re-rooted in a transformed base frame (prepends `base` to the chain).
KinematicChain with_base_transform(const KinematicChain& chain, const Pose3d& base);

struct Finding {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    std::string element;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool ok() const;
    std::size_t error_count() const;
    std::string to_json() const;
};

RobotModel parse_urdf(const std::string& text);
RobotModel parse_urdf_file(const std::string& path);

/// Checks every type invariant and reports findings; never throws.
ValidationReport validate_model(const RobotModel& model);

/// Emits a URDF document that parses back to a structurally equal model.
std::string serialize_urdf(const RobotModel& model);

KinematicChain extract_chain(const RobotModel& model, const std::string& base_link,
                             const std::string& tip_link);

/// Structural comparison: names, kinds, and numeric fields within `tol`.
bool models_equal(const RobotModel& a, const RobotModel& b, double tol);

/// Roll-pitch-yaw angles reproducing `r` under Rz(yaw)*Ry(pitch)*Rx(roll).
Vec3d rpy_from_rotation(const Mat3d& r);

}  // namespace kinesim::urdf
