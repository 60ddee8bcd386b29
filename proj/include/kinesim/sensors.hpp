#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kinesim/simcore.hpp"

namespace kinesim::sensors {

struct LaserScan {
    std::string frame_link;
    std::vector<double> angles;  // fan angles, evenly spaced, radians
    std::vector<double> ranges;  // meters; +infinity encodes a miss
    double max_range = 0;
    double timestamp = 0;
};

/// One ray cast per fan angle from the laser frame origin. Rays never hit the
/// emitting robot's own links.
LaserScan get_laser_scan(const sim::Instance& instance, int robot, const std::string& laser_id);

/// Misses encoded as null per the wire format.
nlohmann::json laser_to_json(const LaserScan& scan);

struct DepthImage {
    int width = 0;
    int height = 0;
    double fx = 0, fy = 0, cx = 0, cy = 0;  // pixels
    double near_clip = 0, far_clip = 0;     // meters
    double timestamp = 0;
    std::vector<double> depth;  // row-major z-depth, meters; misses carry far_clip
};

/// Pinhole depth image; supported resolutions are 160x120, 320x240, 640x480.
/// Intrinsics scale linearly with resolution, so the three images sample the
/// same ray grid at different densities.
DepthImage get_depth_image(const sim::Instance& instance, int robot,
                           const std::string& camera_id, int width, int height);

nlohmann::json depth_header_json(const DepthImage& image);

/// 16-bit binary PGM, millimeters; non-finite depths encode as 0.
void write_depth_pgm(const DepthImage& image, const std::string& path);

}  // namespace kinesim::sensors
