#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>

#include <json.hpp>

#include "kinesim/collision.hpp"
#include "kinesim/geometry.hpp"
#include "kinesim/urdf.hpp"

namespace kinesim {

struct LaserConfig {
    std::string link;
    Pose3d offset;  // laser frame in the link frame; rays fan in the frame's xy plane
    int ray_count = 15;
    double fov_rad = 60.0 * std::numbers::pi / 180.0;
    double max_range = 3.0;
};

struct CameraConfig {
    std::string link;
    Pose3d offset;  // optical frame in the link frame: x right, y down, z forward
    double hfov_rad = 58.0 * std::numbers::pi / 180.0;
    double near_clip = 0.3;
    double far_clip = 8.0;
};

/// Sidecar configuration shipped next to each URDF (same stem, .json): posture
/// tables, sensor frames, extra self-collision exclusions, and the height of
/// the root link above the ground when the robot sits on its mobile base.
struct ModelConfig {
    double base_height = 0.0;
    std::map<std::string, std::map<std::string, double>> postures;
    std::map<std::string, LaserConfig> lasers;
    std::map<std::string, CameraConfig> cameras;
    std::set<collision::LinkPair> self_collision_ignore;

    static ModelConfig from_json(const nlohmann::json& j);
};

struct RobotAsset {
    urdf::RobotModel model;
    ModelConfig config;

    /// SHA-256 of the source document, or of the canonical serialization for
    /// programmatic models.
    std::string model_hash() const;
};

/// Loads a URDF plus its sidecar (if present). Posture tables are validated
/// against the model's joints and limits.
std::shared_ptr<const RobotAsset> load_robot_asset(const std::string& urdf_path);

std::shared_ptr<const RobotAsset> make_robot_asset(urdf::RobotModel model,
                                                   ModelConfig config = {});

}  // namespace kinesim
