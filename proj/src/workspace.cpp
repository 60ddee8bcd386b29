#include "kinesim/workspace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "kinesim/collision.hpp"
#include "kinesim/error.hpp"
#include "kinesim/rng.hpp"
#include "kinesim/version.hpp"

namespace kinesim::workspace {

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

Eigen::VectorXd rest_configuration(const RobotAsset& asset, const std::string& posture) {
    kin::Configuration q = kin::Configuration::zeros(asset.model);
    if (!posture.empty()) {
        auto it = asset.config.postures.find(posture);
        if (it == asset.config.postures.end())
            fail(ErrorCode::not_found, "unknown rest posture '" + posture + "'");
        for (const auto& [joint, value] : it->second) q.set(joint, value);
    }
    return q.values();
}

struct InstanceJob {
    std::vector<WorkspaceSample> samples;
    std::vector<Eigen::VectorXd> rejected;
    std::string error;
};

void run_instance(const RobotAsset& asset, const urdf::KinematicChain& chain,
                  const Eigen::VectorXd& rest, int target, std::uint64_t seed, int index,
                  const SampleOptions& options, InstanceJob& job) {
    const auto& model = asset.model;
    CounterRng rng(seed, static_cast<std::uint64_t>(index));

    std::vector<int> chain_positions(chain.dof());
    for (int k = 0; k < chain.dof(); ++k)
        chain_positions[k] = model.movable_position(chain.steps[k].joint_index);

    Eigen::VectorXd q_full = rest;
    Eigen::VectorXd q_chain(chain.dof());
    std::vector<Pose3d> poses;
    std::uint64_t consecutive_rejections = 0;
    job.samples.reserve(target);

    while (job.samples.size() < static_cast<std::size_t>(target)) {
        for (int k = 0; k < chain.dof(); ++k) {
            const urdf::JointLimits& limits = chain.steps[k].limits;
            double lo = limits.has_position_limits ? limits.lower : -std::numbers::pi;
            double hi = limits.has_position_limits ? limits.upper : std::numbers::pi;
            q_chain[k] = rng.uniform(lo, hi);
            q_full[chain_positions[k]] = q_chain[k];
        }

        if (options.check_self_collision) {
            kin::link_poses(model, q_full, poses);
            if (!collision::self_collision_posed(model, poses,
                                                 asset.config.self_collision_ignore)
                     .empty()) {
                if (options.rejected_out) job.rejected.push_back(q_chain);
                if (++consecutive_rejections > options.rejection_cap) {
                    job.error = "rejection cap exceeded (" +
                                std::to_string(options.rejection_cap) +
                                " consecutive self-colliding draws in instance " +
                                std::to_string(index) + ")";
                    return;
                }
                continue;
            }
        }
        consecutive_rejections = 0;

        WorkspaceSample sample;
        sample.q = q_chain;
        sample.position = kin::chain_fk<double>(chain, q_chain).translation;
        sample.w_raw = kin::manipulability<double>(chain, q_chain, options.mode);
        job.samples.push_back(std::move(sample));
    }
}

}  // namespace

WorkspaceCloud sample_workspace(const RobotAsset& asset, const urdf::KinematicChain& chain,
                                int per_instance_target, int n_instances, std::uint64_t seed,
                                const SampleOptions& options) {
    if (per_instance_target <= 0 || n_instances <= 0)
        fail(ErrorCode::invalid_argument, "sample counts must be positive");
    if (chain.dof() == 0)
        fail(ErrorCode::invalid_argument, "cannot sample a chain with zero degrees of freedom");

    const Eigen::VectorXd rest = rest_configuration(asset, options.rest_posture);

    std::vector<InstanceJob> jobs(n_instances);
    int threads = options.parallelism > 0
                      ? options.parallelism
                      : std::min<int>(n_instances,
                                      std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n_instances);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < n_instances; i = next.fetch_add(1))
            run_instance(asset, chain, rest, per_instance_target, seed, i, options, jobs[i]);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const InstanceJob& job : jobs)
        if (!job.error.empty()) fail(ErrorCode::invalid_state, job.error);

    WorkspaceCloud cloud;
    cloud.chain_base = chain.base_link;
    cloud.chain_tip = chain.tip_link;
    cloud.mode = options.mode;
    cloud.model_sha256 = asset.model_hash();
    cloud.adjacency_rule =
        "joint_adjacent+ignore[" + std::to_string(asset.config.self_collision_ignore.size()) + "]";
    cloud.rest_posture = options.rest_posture;
    cloud.parts.push_back({seed, n_instances, per_instance_target});
    for (InstanceJob& job : jobs) {
        cloud.samples.insert(cloud.samples.end(), job.samples.begin(), job.samples.end());
        if (options.rejected_out) options.rejected_out->push_back(std::move(job.rejected));
    }
    return cloud;
}

double max_raw_manipulability(const WorkspaceCloud& cloud) {
    double w_max = 0;
    for (const auto& s : cloud.samples) w_max = std::max(w_max, s.w_raw);
    return w_max;
}

void normalize_workspace_with(WorkspaceCloud& cloud, double w_max) {
    if (cloud.samples.empty()) fail(ErrorCode::invalid_argument, "cannot normalize an empty cloud");
    if (!(w_max > 0))
        fail(ErrorCode::invalid_state,
             "degenerate cloud: maximum manipulability is zero");
    for (auto& s : cloud.samples) s.w_norm = s.w_raw / w_max;
    cloud.normalized = true;
}

void normalize_workspace(WorkspaceCloud& cloud) {
    normalize_workspace_with(cloud, max_raw_manipulability(cloud));
}

WorkspaceCloud merge_clouds(const std::vector<WorkspaceCloud>& clouds) {
    if (clouds.empty()) fail(ErrorCode::invalid_argument, "nothing to merge");
    WorkspaceCloud out;
    out.chain_base = clouds.front().chain_base;
    out.chain_tip = clouds.front().chain_tip;
    out.mode = clouds.front().mode;
    out.model_sha256 = clouds.front().model_sha256;
    out.adjacency_rule = clouds.front().adjacency_rule;
    out.rest_posture = clouds.front().rest_posture;
    for (const WorkspaceCloud& c : clouds) {
        if (c.chain_base != out.chain_base || c.chain_tip != out.chain_tip)
            fail(ErrorCode::invalid_argument, "cannot merge clouds of different chains");
        if (c.mode != out.mode)
            fail(ErrorCode::invalid_argument, "cannot merge clouds of different Jacobian modes");
        if (c.model_sha256 != out.model_sha256)
            fail(ErrorCode::invalid_argument, "cannot merge clouds of different models");
        out.parts.insert(out.parts.end(), c.parts.begin(), c.parts.end());
        for (const auto& s : c.samples) {
            WorkspaceSample raw = s;
            raw.w_norm = 0;  // normalization happens after merging
            out.samples.push_back(std::move(raw));
        }
    }
    out.normalized = false;
    return out;
}

namespace {

void write_provenance(std::ostream& out, const WorkspaceCloud& cloud, const char* prefix) {
    auto line = [&](const std::string& key, const std::string& value) {
        out << prefix << key << "=" << value << "\n";
    };
    if (cloud.parts.size() == 1) {
        line("seed", std::to_string(cloud.parts[0].seed));
        line("n_instances", std::to_string(cloud.parts[0].n_instances));
        line("per_instance_target", std::to_string(cloud.parts[0].per_instance_target));
    } else {
        for (std::size_t i = 0; i < cloud.parts.size(); ++i) {
            line("part" + std::to_string(i) + "_seed", std::to_string(cloud.parts[i].seed));
            line("part" + std::to_string(i) + "_n_instances",
                 std::to_string(cloud.parts[i].n_instances));
            line("part" + std::to_string(i) + "_per_instance_target",
                 std::to_string(cloud.parts[i].per_instance_target));
        }
    }
    line("chain", cloud.chain_base + "," + cloud.chain_tip);
    line("mode", kin::to_string(cloud.mode));
    line("model_sha256", cloud.model_sha256);
    line("adjacency_rule", cloud.adjacency_rule);
    line("rest_posture", cloud.rest_posture.empty() ? "zeros" : cloud.rest_posture);
    line("version", KINESIM_VERSION);
}

double min_norm(const WorkspaceCloud& cloud) {
    double lo = 1.0;
    for (const auto& s : cloud.samples) lo = std::min(lo, s.w_norm);
    return lo;
}

}  // namespace

void export_ply(const WorkspaceCloud& cloud, const std::string& path) {
    if (!cloud.normalized)
        fail(ErrorCode::invalid_state, "cloud must be normalized before export");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write '" + path + "'");

    out << "ply\nformat ascii 1.0\n";
    write_provenance(out, cloud, "comment ");
    out << "element vertex " << cloud.samples.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";

    const double lo = min_norm(cloud);
    const double span = 1.0 - lo;
    for (const auto& s : cloud.samples) {
        double t = span > 0 ? (s.w_norm - lo) / span : 1.0;
        int red = static_cast<int>(std::lround(255.0 * (1.0 - t)));
        int green = static_cast<int>(std::lround(255.0 * t));
        out << fmt(s.position.x(), "%.9g") << " " << fmt(s.position.y(), "%.9g") << " "
            << fmt(s.position.z(), "%.9g") << " " << red << " " << green << " 0\n";
    }
    if (!out) fail(ErrorCode::internal, "failed writing '" + path + "'");
}

void export_csv(const WorkspaceCloud& cloud, const std::string& path) {
    if (!cloud.normalized)
        fail(ErrorCode::invalid_state, "cloud must be normalized before export");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write '" + path + "'");

    write_provenance(out, cloud, "# ");
    const int dof = cloud.samples.empty() ? 0 : static_cast<int>(cloud.samples.front().q.size());
    out << "x,y,z";
    for (int k = 1; k <= dof; ++k) out << ",q" << k;
    out << ",w_raw,w_norm\n";
    for (const auto& s : cloud.samples) {
        out << fmt(s.position.x()) << "," << fmt(s.position.y()) << "," << fmt(s.position.z());
        for (Eigen::Index k = 0; k < s.q.size(); ++k) out << "," << fmt(s.q[k]);
        out << "," << fmt(s.w_raw) << "," << fmt(s.w_norm) << "\n";
    }
    if (!out) fail(ErrorCode::internal, "failed writing '" + path + "'");
}

AuditResult audit_cloud(const RobotAsset& asset, const urdf::KinematicChain& chain,
                        const WorkspaceCloud& cloud) {
    AuditResult result;
    const auto& model = asset.model;
    Eigen::VectorXd q_full = rest_configuration(asset, cloud.rest_posture);
    std::vector<int> chain_positions(chain.dof());
    for (int k = 0; k < chain.dof(); ++k)
        chain_positions[k] = model.movable_position(chain.steps[k].joint_index);

    std::vector<Pose3d> poses;
    for (std::size_t idx = 0; idx < cloud.samples.size(); ++idx) {
        const WorkspaceSample& s = cloud.samples[idx];
        auto reject = [&](const std::string& why) {
            result.ok = false;
            result.message = "sample " + std::to_string(idx) + ": " + why;
        };
        if (s.q.size() != chain.dof()) {
            reject("wrong configuration size");
            return result;
        }
        for (int k = 0; k < chain.dof(); ++k) {
            const urdf::JointLimits& limits = chain.steps[k].limits;
            if (limits.has_position_limits &&
                (s.q[k] < limits.lower || s.q[k] > limits.upper)) {
                reject("joint value outside limits");
                return result;
            }
            q_full[chain_positions[k]] = s.q[k];
        }
        Vec3d position = kin::chain_fk<double>(chain, s.q).translation;
        if ((position - s.position).cwiseAbs().maxCoeff() > 1e-9) {
            reject("recorded position does not replay");
            return result;
        }
        double w = kin::manipulability<double>(chain, s.q, cloud.mode);
        if (std::abs(w - s.w_raw) > 1e-9 * std::max(1.0, std::abs(s.w_raw))) {
            reject("recorded manipulability does not replay");
            return result;
        }
        kin::link_poses(model, q_full, poses);
        if (!collision::self_collision_posed(model, poses, asset.config.self_collision_ignore)
                 .empty()) {
            reject("self-colliding sample");
            return result;
        }
        ++result.checked;
    }
    return result;
}

}  // namespace kinesim::workspace
