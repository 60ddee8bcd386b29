#pragma once

#include <string>
#include <variant>

#include "kinesim/geometry.hpp"

namespace kinesim::collision {

// Capsules and cylinders are aligned with their local z axis; lengths are
// half-lengths of the straight segment, all dimensions in meters.
struct Sphere {
    double radius = 0;
};
struct Capsule {
    double radius = 0;
    double half_length = 0;
};
struct Box {
    Vec3d half_extents = Vec3d::Zero();
};
struct Cylinder {
    double radius = 0;
    double half_length = 0;
};

using Shape = std::variant<Sphere, Capsule, Box, Cylinder>;

std::string shape_kind(const Shape& s);
bool shape_valid(const Shape& s);  // all dimensions strictly positive
bool shape_equal(const Shape& a, const Shape& b, double tol);

/// Support point in the shape's local frame: the farthest point of the shape
/// along `dir` (dir need not be normalized).
Vec3d support_local(const Shape& s, const Vec3d& dir);

inline Vec3d support_world(const Shape& s, const Pose3d& pose, const Vec3d& dir) {
    return pose * support_local(s, pose.rotation.transpose() * dir);
}

struct Aabb {
    Vec3d lo = Vec3d::Zero();
    Vec3d hi = Vec3d::Zero();

    bool overlaps(const Aabb& other) const {
        return (lo.array() <= other.hi.array()).all() &&
               (other.lo.array() <= hi.array()).all();
    }
};

/// World-frame AABB, built from support points so it is exact for every
/// shape kind.
Aabb shape_aabb(const Shape& s, const Pose3d& pose);

}  // namespace kinesim::collision
