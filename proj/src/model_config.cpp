#include "kinesim/model_config.hpp"

#include <filesystem>
#include <fstream>

#include "kinesim/error.hpp"
#include "kinesim/hash.hpp"

namespace kinesim {

namespace {

Vec3d vec3_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return Vec3d::Zero();
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != 3)
        fail(ErrorCode::invalid_argument, std::string("expected [x,y,z] for '") + key + "'");
    return Vec3d(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>());
}

Pose3d offset_from(const nlohmann::json& j) {
    return pose_from_xyz_rpy(vec3_from(j, "xyz"), vec3_from(j, "rpy"));
}

}  // namespace

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig config;
    config.base_height = j.value("base_height", 0.0);
    if (j.contains("postures")) {
        for (const auto& [name, table] : j.at("postures").items()) {
            std::map<std::string, double> joints;
            for (const auto& [joint, value] : table.items()) joints[joint] = value.get<double>();
            config.postures[name] = std::move(joints);
        }
    }
    if (j.contains("lasers")) {
        for (const auto& [name, spec] : j.at("lasers").items()) {
            LaserConfig laser;
            laser.link = spec.at("link").get<std::string>();
            laser.offset = offset_from(spec);
            laser.ray_count = spec.value("ray_count", 15);
            laser.fov_rad = spec.value("fov_deg", 60.0) * std::numbers::pi / 180.0;
            laser.max_range = spec.value("max_range", 3.0);
            if (laser.ray_count < 1 || laser.max_range <= 0)
                fail(ErrorCode::invalid_argument, "invalid laser config '" + name + "'");
            config.lasers[name] = laser;
        }
    }
    if (j.contains("cameras")) {
        for (const auto& [name, spec] : j.at("cameras").items()) {
            CameraConfig cam;
            cam.link = spec.at("link").get<std::string>();
            cam.offset = offset_from(spec);
            cam.hfov_rad = spec.value("hfov_deg", 58.0) * std::numbers::pi / 180.0;
            cam.near_clip = spec.value("near", 0.3);
            cam.far_clip = spec.value("far", 8.0);
            if (cam.near_clip <= 0 || cam.far_clip <= cam.near_clip)
                fail(ErrorCode::invalid_argument, "invalid camera config '" + name + "'");
            config.cameras[name] = cam;
        }
    }
    if (j.contains("self_collision_ignore")) {
        for (const auto& pair : j.at("self_collision_ignore")) {
            if (!pair.is_array() || pair.size() != 2)
                fail(ErrorCode::invalid_argument, "self_collision_ignore entries must be pairs");
            config.self_collision_ignore.insert(
                collision::make_link_pair(pair[0].get<std::string>(), pair[1].get<std::string>()));
        }
    }
    return config;
}

std::string RobotAsset::model_hash() const {
    if (!model.source_sha256.empty()) return model.source_sha256;
    return sha256_hex(urdf::serialize_urdf(model));
}

namespace {

void validate_asset(const RobotAsset& asset) {
    for (const auto& [posture, table] : asset.config.postures) {
        for (const auto& [joint, value] : table) {
            int j = asset.model.joint_index(joint);  // throws for unknown joints
            const urdf::Joint& jt = asset.model.joints[j];
            if (!jt.movable())
                fail(ErrorCode::invalid_argument,
                     "posture '" + posture + "' targets fixed joint '" + joint + "'");
            if (jt.limits->has_position_limits &&
                (value < jt.limits->lower || value > jt.limits->upper))
                fail(ErrorCode::invalid_argument, "posture '" + posture + "' value for '" +
                                                      joint + "' is outside joint limits");
        }
    }
    for (const auto& [name, laser] : asset.config.lasers) asset.model.link_index(laser.link);
    for (const auto& [name, cam] : asset.config.cameras) asset.model.link_index(cam.link);
    for (const auto& pair : asset.config.self_collision_ignore) {
        asset.model.link_index(pair.first);
        asset.model.link_index(pair.second);
    }
}

}  // namespace

std::shared_ptr<const RobotAsset> make_robot_asset(urdf::RobotModel model, ModelConfig config) {
    auto asset = std::make_shared<RobotAsset>(RobotAsset{std::move(model), std::move(config)});
    validate_asset(*asset);
    return asset;
}

std::shared_ptr<const RobotAsset> load_robot_asset(const std::string& urdf_path) {
    urdf::RobotModel model = urdf::parse_urdf_file(urdf_path);
    ModelConfig config;

    std::filesystem::path sidecar(urdf_path);
    sidecar.replace_extension(".json");
    if (std::filesystem::exists(sidecar)) {
        std::ifstream in(sidecar);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::invalid_argument,
                 "invalid model sidecar '" + sidecar.string() + "': " + e.what());
        }
        config = ModelConfig::from_json(j);
    }
    return make_robot_asset(std::move(model), std::move(config));
}

}  // namespace kinesim
