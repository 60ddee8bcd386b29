#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kinesim/geometry.hpp"
#include "kinesim/kinematics.hpp"
#include "kinesim/shapes.hpp"
#include "kinesim/urdf.hpp"

namespace kinesim::collision {

/// Signed distance between two shapes. Negative values are penetration
/// depths; point_a / point_b are the closest (or deepest witness) points on
/// each shape, in the world frame. Touching shapes (distance 0) do not count
/// as colliding anywhere in this library.
struct ContactResult {
    double signed_distance = 0;
    Vec3d point_a = Vec3d::Zero();
    Vec3d point_b = Vec3d::Zero();
};

/// Sphere/capsule pairs (and sphere vs box/cylinder) use closed forms; the
/// remaining convex pairs go through GJK with an EPA fallback for depth.
ContactResult pair_distance(const Shape& a, const Pose3d& pose_a, const Shape& b,
                            const Pose3d& pose_b);

struct Ray {
    Vec3d origin = Vec3d::Zero();
    Vec3d direction = Vec3d::UnitX();  // must be unit length
};

/// Distance to the nearest surface crossing with t >= 0, or nullopt.
std::optional<double> ray_shape_distance(const Shape& shape, const Pose3d& pose, const Ray& ray);

struct WorldBody {
    Shape shape;
    Pose3d pose;
    std::string id;
};

struct RayHit {
    double distance = 0;
    Vec3d point = Vec3d::Zero();
    std::string body_id;  // "ground" for the ground plane
};

/// Nearest intersection across `bodies` plus (optionally) the ground plane
/// z=0, within max_range. The direction must be unit length.
std::optional<RayHit> ray_cast(std::span<const WorldBody> bodies, const Ray& ray,
                               double max_range, bool ground_plane);

using LinkPair = std::pair<std::string, std::string>;  // stored (min, max) by name

LinkPair make_link_pair(const std::string& a, const std::string& b);

struct QueryOptions {
    bool broad_phase = true;
};

/// Every unordered link pair whose shapes penetrate at configuration `q`,
/// excluding pairs directly connected by a joint and pairs in `ignore_pairs`.
/// An empty result means the configuration is self-collision-free.
std::vector<LinkPair> self_collision(const urdf::RobotModel& model, const kin::Configuration& q,
                                     const std::set<LinkPair>& ignore_pairs = {},
                                     const QueryOptions& options = {});

/// Same check on precomputed link poses (fast path for samplers).
std::vector<LinkPair> self_collision_posed(const urdf::RobotModel& model,
                                           const std::vector<Pose3d>& link_poses,
                                           const std::set<LinkPair>& ignore_pairs = {},
                                           const QueryOptions& options = {});

}  // namespace kinesim::collision
