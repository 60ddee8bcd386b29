#pragma once

#include <string>

#include "kinesim/model_config.hpp"
#include "kinesim/urdf.hpp"

namespace kinesim::test {

inline std::string model_path(const std::string& name) {
    return std::string(KINESIM_MODELS_DIR) + "/" + name;
}

inline urdf::RobotModel load_model(const std::string& name) {
    return urdf::parse_urdf_file(model_path(name));
}

inline std::shared_ptr<const RobotAsset> load_asset(const std::string& name) {
    return load_robot_asset(model_path(name));
}

}  // namespace kinesim::test
