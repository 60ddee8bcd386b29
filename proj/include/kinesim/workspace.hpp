#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kinesim/kinematics.hpp"
#include "kinesim/model_config.hpp"
#include "kinesim/urdf.hpp"

namespace kinesim::workspace {

struct WorkspaceSample {
    Vec3d position = Vec3d::Zero();  // tip position in the chain base frame
    Eigen::VectorXd q;               // chain joint values
    double w_raw = 0;                // manipulability, >= 0
    double w_norm = 0;               // in (0, 1] once the cloud is normalized
};

struct ProvenancePart {
    std::uint64_t seed = 0;
    int n_instances = 0;
    int per_instance_target = 0;
};

struct WorkspaceCloud {
    std::string chain_base;
    std::string chain_tip;
    kin::JacobianMode mode = kin::JacobianMode::full_6;
    std::string model_sha256;
    std::string adjacency_rule;
    std::string rest_posture;
    std::vector<ProvenancePart> parts;
    std::vector<WorkspaceSample> samples;
    bool normalized = false;
};

struct SampleOptions {
    kin::JacobianMode mode = kin::JacobianMode::full_6;
    /// Posture applied to every joint outside the chain during the
    /// self-collision check; empty string means zeros (clamped into limits).
    std::string rest_posture = "Stand";
    std::uint64_t rejection_cap = 1'000'000;  // consecutive rejections per instance
    int parallelism = 0;                      // 0 = one thread per instance, capped by hardware
    bool check_self_collision = true;
    /// When set, receives every rejected draw: (instance index, chain q).
    std::vector<std::vector<Eigen::VectorXd>>* rejected_out = nullptr;
};

/// Rejection-samples chain configurations across `n_instances` independent
/// instances: per-joint uniform draws within limits, rejected while the posed
/// whole model self-collides, until each instance holds `per_instance_target`
/// accepted samples. Instance i draws from the counter-based stream (seed, i),
/// so results are identical for any parallelism degree; the returned cloud
/// concatenates instances in index order.
WorkspaceCloud sample_workspace(const RobotAsset& asset, const urdf::KinematicChain& chain,
                                int per_instance_target, int n_instances, std::uint64_t seed,
                                const SampleOptions& options = {});

/// w_norm = w_raw / max(w_raw) over the whole cloud; the maximum maps to 1.0
/// exactly. Errors on an empty cloud and on all-zero manipulability.
void normalize_workspace(WorkspaceCloud& cloud);

/// Normalization against an external maximum (for joint normalization of
/// several chains against their common peak).
void normalize_workspace_with(WorkspaceCloud& cloud, double w_max);

double max_raw_manipulability(const WorkspaceCloud& cloud);

/// Concatenation in argument order; parts keep their provenance. Inputs must
/// share chain, mode, and model hash. The result is unnormalized (merge
/// first, then normalize).
WorkspaceCloud merge_clouds(const std::vector<WorkspaceCloud>& clouds);

/// ASCII PLY with a red-to-green color ramp over w_norm (red at the minimum
/// observed value, green at 1.0).
void export_ply(const WorkspaceCloud& cloud, const std::string& path);

/// Columns x,y,z,q1..qn,w_raw,w_norm behind a '#' provenance comment block.
void export_csv(const WorkspaceCloud& cloud, const std::string& path);

struct AuditResult {
    bool ok = true;
    std::size_t checked = 0;
    std::string message;
};

/// Full replay: every sample must be within limits, reproduce its recorded
/// position and manipulability, and pose a self-collision-free model.
AuditResult audit_cloud(const RobotAsset& asset, const urdf::KinematicChain& chain,
                        const WorkspaceCloud& cloud);

}  // namespace kinesim::workspace
