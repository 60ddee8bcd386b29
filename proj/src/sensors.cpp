#include "kinesim/sensors.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "kinesim/error.hpp"

namespace kinesim::sensors {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

LaserScan get_laser_scan(const sim::Instance& instance, int robot, const std::string& laser_id) {
    sim::SensorSnapshot snap = instance.sensor_snapshot(robot);
    const auto& lasers = snap.asset->config.lasers;
    auto it = lasers.find(laser_id);
    if (it == lasers.end()) fail(ErrorCode::not_found, "unknown laser '" + laser_id + "'");
    const LaserConfig& cfg = it->second;

    Pose3d frame = snap.link_poses[snap.asset->model.link_index(cfg.link)] * cfg.offset;

    LaserScan scan;
    scan.frame_link = cfg.link;
    scan.max_range = cfg.max_range;
    scan.timestamp = snap.timestamp;
    for (int i = 0; i < cfg.ray_count; ++i) {
        double alpha = cfg.ray_count == 1
                           ? 0.0
                           : -cfg.fov_rad / 2 + cfg.fov_rad * i / (cfg.ray_count - 1);
        scan.angles.push_back(alpha);
        collision::Ray ray;
        ray.origin = frame.translation;
        ray.direction = frame.rotation * Vec3d(std::cos(alpha), std::sin(alpha), 0);
        auto hit = collision::ray_cast(snap.bodies, ray, cfg.max_range, snap.ground_plane);
        scan.ranges.push_back(hit ? hit->distance : kInf);
    }
    return scan;
}

nlohmann::json laser_to_json(const LaserScan& scan) {
    nlohmann::json j;
    j["frame"] = scan.frame_link;
    j["angles"] = scan.angles;
    auto& ranges = j["ranges"] = nlohmann::json::array();
    for (double r : scan.ranges) {
        if (std::isfinite(r))
            ranges.push_back(r);
        else
            ranges.push_back(nullptr);
    }
    j["max_range"] = scan.max_range;
    j["timestamp"] = scan.timestamp;
    return j;
}

DepthImage get_depth_image(const sim::Instance& instance, int robot,
                           const std::string& camera_id, int width, int height) {
    static constexpr std::pair<int, int> kResolutions[] = {{160, 120}, {320, 240}, {640, 480}};
    bool supported = false;
    for (auto [w, h] : kResolutions) supported |= (w == width && h == height);
    if (!supported)
        fail(ErrorCode::invalid_argument,
             "unsupported resolution " + std::to_string(width) + "x" + std::to_string(height));

    sim::SensorSnapshot snap = instance.sensor_snapshot(robot);
    const auto& cameras = snap.asset->config.cameras;
    auto it = cameras.find(camera_id);
    if (it == cameras.end()) fail(ErrorCode::not_found, "unknown camera '" + camera_id + "'");
    const CameraConfig& cfg = it->second;

    Pose3d frame = snap.link_poses[snap.asset->model.link_index(cfg.link)] * cfg.offset;

    DepthImage img;
    img.width = width;
    img.height = height;
    img.fx = (width / 2.0) / std::tan(cfg.hfov_rad / 2.0);
    img.fy = img.fx;  // square pixels
    img.cx = width / 2.0;
    img.cy = height / 2.0;
    img.near_clip = cfg.near_clip;
    img.far_clip = cfg.far_clip;
    img.timestamp = snap.timestamp;
    img.depth.resize(static_cast<std::size_t>(width) * height, cfg.far_clip);

    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            Vec3d dir_cam((u - img.cx) / img.fx, (v - img.cy) / img.fy, 1.0);
            double inv_norm = 1.0 / dir_cam.norm();
            double dz = inv_norm;  // z component of the unit ray in camera frame
            collision::Ray ray;
            ray.direction = frame.rotation * (dir_cam * inv_norm);
            // Start at the near plane; geometry in front of it is clipped.
            double t_near = cfg.near_clip / dz;
            ray.origin = frame.translation + ray.direction * t_near;
            double t_max = cfg.far_clip / dz - t_near;
            auto hit = collision::ray_cast(snap.bodies, ray, t_max, snap.ground_plane);
            if (hit) img.depth[static_cast<std::size_t>(v) * width + u] =
                (t_near + hit->distance) * dz;
        }
    }
    return img;
}

nlohmann::json depth_header_json(const DepthImage& image) {
    nlohmann::json j;
    j["width"] = image.width;
    j["height"] = image.height;
    j["fx"] = image.fx;
    j["fy"] = image.fy;
    j["cx"] = image.cx;
    j["cy"] = image.cy;
    j["near"] = image.near_clip;
    j["far"] = image.far_clip;
    j["timestamp"] = image.timestamp;
    j["encoding"] = "pgm16-mm";
    return j;
}

void write_depth_pgm(const DepthImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write '" + path + "'");
    out << "P5\n" << image.width << " " << image.height << "\n65535\n";
    for (double d : image.depth) {
        unsigned int mm = 0;
        if (std::isfinite(d)) mm = static_cast<unsigned int>(std::lround(d * 1000.0));
        if (mm > 65535) mm = 65535;
        // big-endian per the PGM spec
        out.put(static_cast<char>((mm >> 8) & 0xFF));
        out.put(static_cast<char>(mm & 0xFF));
    }
    if (!out) fail(ErrorCode::internal, "failed writing '" + path + "'");
}

}  // namespace kinesim::sensors
