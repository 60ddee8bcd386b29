#include "kinesim/urdf.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "kinesim/error.hpp"
#include "kinesim/hash.hpp"

namespace kinesim::urdf {

namespace pt = boost::property_tree;

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& where) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(token, &pos);
        } catch (const std::exception&) {
            fail(ErrorCode::invalid_argument, "invalid number '" + token + "' in " + where);
        }
        if (pos != token.size())
            fail(ErrorCode::invalid_argument, "invalid number '" + token + "' in " + where);
        out.push_back(v);
    }
    return out;
}

Vec3d parse_vec3(const std::string& text, const std::string& where) {
    auto v = parse_doubles(text, where);
    if (v.size() != 3)
        fail(ErrorCode::invalid_argument, "expected 3 numbers in " + where + ", got " +
                                              std::to_string(v.size()));
    return Vec3d(v[0], v[1], v[2]);
}

double attr_double(const pt::ptree& node, const std::string& name, const std::string& where) {
    auto raw = node.get_optional<std::string>("<xmlattr>." + name);
    if (!raw) fail(ErrorCode::invalid_argument, "missing attribute '" + name + "' in " + where);
    auto v = parse_doubles(*raw, where + "." + name);
    if (v.size() != 1) fail(ErrorCode::invalid_argument, "expected one number in " + where + "." + name);
    return v[0];
}

std::optional<double> attr_double_opt(const pt::ptree& node, const std::string& name,
                                      const std::string& where) {
    auto raw = node.get_optional<std::string>("<xmlattr>." + name);
    if (!raw) return std::nullopt;
    auto v = parse_doubles(*raw, where + "." + name);
    if (v.size() != 1) fail(ErrorCode::invalid_argument, "expected one number in " + where + "." + name);
    return v[0];
}

Pose3d parse_origin(const pt::ptree& parent, const std::string& where) {
    Vec3d xyz = Vec3d::Zero();
    Vec3d rpy = Vec3d::Zero();
    if (auto origin = parent.get_child_optional("origin")) {
        if (auto s = origin->get_optional<std::string>("<xmlattr>.xyz"))
            xyz = parse_vec3(*s, where + ".origin.xyz");
        if (auto s = origin->get_optional<std::string>("<xmlattr>.rpy"))
            rpy = parse_vec3(*s, where + ".origin.rpy");
    }
    return pose_from_xyz_rpy(xyz, rpy);
}

collision::Shape parse_geometry(const pt::ptree& geom, const std::string& where) {
    if (auto box = geom.get_child_optional("box")) {
        auto size = parse_vec3(box->get<std::string>("<xmlattr>.size", ""), where + ".box.size");
        return collision::Box{size * 0.5};
    }
    if (auto sphere = geom.get_child_optional("sphere")) {
        return collision::Sphere{attr_double(*sphere, "radius", where + ".sphere")};
    }
    if (auto cyl = geom.get_child_optional("cylinder")) {
        return collision::Cylinder{attr_double(*cyl, "radius", where + ".cylinder"),
                                   attr_double(*cyl, "length", where + ".cylinder") * 0.5};
    }
    if (auto cap = geom.get_child_optional("capsule")) {
        return collision::Capsule{attr_double(*cap, "radius", where + ".capsule"),
                                  attr_double(*cap, "length", where + ".capsule") * 0.5};
    }
    if (auto mesh = geom.get_child_optional("mesh")) {
        // Meshes are never loaded; a declared bounding capsule stands in for
        // the hull ("capsule_approx" = "radius half_length").
        auto approx = mesh->get_optional<std::string>("<xmlattr>.capsule_approx");
        if (!approx)
            fail(ErrorCode::invalid_argument,
                 "mesh collision geometry requires a capsule_approx attribute in " + where);
        auto v = parse_doubles(*approx, where + ".mesh.capsule_approx");
        if (v.size() != 2)
            fail(ErrorCode::invalid_argument,
                 "capsule_approx expects 'radius half_length' in " + where);
        return collision::Capsule{v[0], v[1]};
    }
    fail(ErrorCode::invalid_argument, "unsupported geometry in " + where);
}

Link parse_link(const pt::ptree& node) {
    Link link;
    link.name = node.get<std::string>("<xmlattr>.name", "");
    if (link.name.empty()) fail(ErrorCode::invalid_argument, "link without a name");
    const std::string where = "link '" + link.name + "'";

    if (auto inertial = node.get_child_optional("inertial")) {
        Inertial in;
        in.origin = parse_origin(*inertial, where + ".inertial");
        if (auto mass = inertial->get_child_optional("mass"))
            in.mass = attr_double(*mass, "value", where + ".inertial.mass");
        if (auto inertia = inertial->get_child_optional("inertia")) {
            double ixx = attr_double_opt(*inertia, "ixx", where).value_or(0);
            double ixy = attr_double_opt(*inertia, "ixy", where).value_or(0);
            double ixz = attr_double_opt(*inertia, "ixz", where).value_or(0);
            double iyy = attr_double_opt(*inertia, "iyy", where).value_or(0);
            double iyz = attr_double_opt(*inertia, "iyz", where).value_or(0);
            double izz = attr_double_opt(*inertia, "izz", where).value_or(0);
            in.inertia << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
        }
        link.inertial = in;
    }

    for (const auto& [key, child] : node) {
        if (key == "collision") {
            CollisionShape cs;
            cs.origin = parse_origin(child, where + ".collision");
            auto geom = child.get_child_optional("geometry");
            if (!geom) fail(ErrorCode::invalid_argument, "collision without geometry in " + where);
            cs.shape = parse_geometry(*geom, where + ".collision");
            link.collision_shapes.push_back(cs);
        } else if (key == "visual" && !link.visual_mesh_ref) {
            if (auto mesh = child.get_child_optional("geometry.mesh")) {
                if (auto file = mesh->get_optional<std::string>("<xmlattr>.filename"))
                    link.visual_mesh_ref = *file;
            }
        }
    }
    return link;
}

Joint parse_joint(const pt::ptree& node) {
    Joint joint;
    joint.name = node.get<std::string>("<xmlattr>.name", "");
    if (joint.name.empty()) fail(ErrorCode::invalid_argument, "joint without a name");
    const std::string where = "joint '" + joint.name + "'";

    const std::string type = node.get<std::string>("<xmlattr>.type", "");
    auto kind = joint_kind_from(type);
    if (!kind)
        fail(ErrorCode::invalid_argument, "unknown joint kind '" + type + "' in " + where);
    joint.kind = *kind;

    joint.parent_link = node.get<std::string>("parent.<xmlattr>.link", "");
    joint.child_link = node.get<std::string>("child.<xmlattr>.link", "");
    if (joint.parent_link.empty() || joint.child_link.empty())
        fail(ErrorCode::invalid_argument, where + " is missing parent or child link");

    joint.origin = parse_origin(node, where);
    if (auto axis = node.get_child_optional("axis"))
        joint.axis = parse_vec3(axis->get<std::string>("<xmlattr>.xyz", "1 0 0"), where + ".axis");

    if (joint.kind == JointKind::fixed) return joint;

    auto limit = node.get_child_optional("limit");
    JointLimits limits;
    if (joint.kind == JointKind::continuous) {
        if (!limit)
            fail(ErrorCode::invalid_argument, where + " (continuous) requires a velocity limit");
        limits.velocity_max = attr_double(*limit, "velocity", where + ".limit");
        limits.effort_max = attr_double_opt(*limit, "effort", where).value_or(0);
    } else {
        if (!limit) fail(ErrorCode::invalid_argument, where + " requires position limits");
        auto lower = attr_double_opt(*limit, "lower", where);
        auto upper = attr_double_opt(*limit, "upper", where);
        if (!lower || !upper)
            fail(ErrorCode::invalid_argument, where + " requires lower and upper limits");
        limits.lower = *lower;
        limits.upper = *upper;
        limits.has_position_limits = true;
        limits.velocity_max = attr_double(*limit, "velocity", where + ".limit");
        limits.effort_max = attr_double_opt(*limit, "effort", where).value_or(0);
    }
    joint.limits = limits;
    return joint;
}

}  // namespace

std::string to_string(JointKind kind) {
    switch (kind) {
        case JointKind::revolute: return "revolute";
        case JointKind::continuous: return "continuous";
        case JointKind::prismatic: return "prismatic";
        case JointKind::fixed: return "fixed";
    }
    return "?";
}

std::optional<JointKind> joint_kind_from(const std::string& name) {
    if (name == "revolute") return JointKind::revolute;
    if (name == "continuous") return JointKind::continuous;
    if (name == "prismatic") return JointKind::prismatic;
    if (name == "fixed") return JointKind::fixed;
    return std::nullopt;
}

int RobotModel::link_index(const std::string& name) const {
    auto it = link_ids_.find(name);
    if (it == link_ids_.end()) fail(ErrorCode::not_found, "unknown link '" + name + "'");
    return it->second;
}

int RobotModel::joint_index(const std::string& name) const {
    auto it = joint_ids_.find(name);
    if (it == joint_ids_.end()) fail(ErrorCode::not_found, "unknown joint '" + name + "'");
    return it->second;
}

bool RobotModel::links_adjacent(int a, int b) const {
    int pa = parent_joint_[a];
    int pb = parent_joint_[b];
    return (pa >= 0 && link_ids_.at(joints[pa].parent_link) == b) ||
           (pb >= 0 && link_ids_.at(joints[pb].parent_link) == a);
}

void RobotModel::finalize() {
    link_ids_.clear();
    joint_ids_.clear();
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (!link_ids_.emplace(links[i].name, static_cast<int>(i)).second)
            fail(ErrorCode::invalid_argument, "duplicate link name '" + links[i].name + "'");
    }
    for (std::size_t i = 0; i < joints.size(); ++i) {
        if (!joint_ids_.emplace(joints[i].name, static_cast<int>(i)).second)
            fail(ErrorCode::invalid_argument, "duplicate joint name '" + joints[i].name + "'");
    }
    if (links.empty()) fail(ErrorCode::invalid_argument, "model has no links");

    parent_joint_.assign(links.size(), -1);
    child_joints_.assign(links.size(), {});
    for (std::size_t j = 0; j < joints.size(); ++j) {
        const Joint& joint = joints[j];
        auto parent = link_ids_.find(joint.parent_link);
        if (parent == link_ids_.end())
            fail(ErrorCode::invalid_argument, "joint '" + joint.name +
                                                  "' references unknown parent link '" +
                                                  joint.parent_link + "'");
        auto child = link_ids_.find(joint.child_link);
        if (child == link_ids_.end())
            fail(ErrorCode::invalid_argument, "joint '" + joint.name +
                                                  "' references unknown child link '" +
                                                  joint.child_link + "'");
        if (parent_joint_[child->second] >= 0)
            fail(ErrorCode::invalid_argument,
                 "link '" + joint.child_link + "' is the child of multiple joints");
        parent_joint_[child->second] = static_cast<int>(j);
        child_joints_[parent->second].push_back(static_cast<int>(j));
    }

    std::vector<int> roots;
    for (std::size_t i = 0; i < links.size(); ++i)
        if (parent_joint_[i] < 0) roots.push_back(static_cast<int>(i));
    if (roots.empty())
        fail(ErrorCode::invalid_argument, "model has no root link (joint cycle)");
    if (roots.size() > 1) {
        std::string names;
        for (int r : roots) names += (names.empty() ? "" : ", ") + links[r].name;
        fail(ErrorCode::invalid_argument, "model has multiple roots: " + names);
    }
    root_link = links[roots[0]].name;

    topo_links_.clear();
    std::deque<int> queue{roots[0]};
    std::vector<bool> seen(links.size(), false);
    seen[roots[0]] = true;
    while (!queue.empty()) {
        int link = queue.front();
        queue.pop_front();
        topo_links_.push_back(link);
        for (int j : child_joints_[link]) {
            int child = link_ids_.at(joints[j].child_link);
            if (!seen[child]) {
                seen[child] = true;
                queue.push_back(child);
            }
        }
    }
    if (topo_links_.size() != links.size()) {
        std::string names;
        for (std::size_t i = 0; i < links.size(); ++i)
            if (!seen[i]) names += (names.empty() ? "" : ", ") + links[i].name;
        fail(ErrorCode::invalid_argument, "links unreachable from root: " + names);
    }

    movable_.clear();
    movable_pos_.assign(joints.size(), -1);
    for (std::size_t j = 0; j < joints.size(); ++j) {
        if (joints[j].movable()) {
            movable_pos_[j] = static_cast<int>(movable_.size());
            movable_.push_back(static_cast<int>(j));
        }
    }
}

RobotModel parse_urdf(const std::string& text) {
    pt::ptree doc;
    std::istringstream in(text);
    try {
        pt::read_xml(in, doc, pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        fail(ErrorCode::invalid_argument, std::string("malformed XML: ") + e.message());
    }

    auto robot = doc.get_child_optional("robot");
    if (!robot) fail(ErrorCode::invalid_argument, "missing <robot> root element");

    RobotModel model;
    model.name = robot->get<std::string>("<xmlattr>.name", "robot");
    for (const auto& [key, node] : *robot) {
        if (key == "link")
            model.links.push_back(parse_link(node));
        else if (key == "joint")
            model.joints.push_back(parse_joint(node));
    }
    model.source_sha256 = sha256_hex(text);
    model.finalize();

    ValidationReport report = validate_model(model);
    for (const auto& finding : report.findings)
        if (finding.severity == Finding::Severity::error)
            fail(ErrorCode::invalid_argument, finding.element + ": " + finding.message);
    return model;
}

RobotModel parse_urdf_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::not_found, "cannot open URDF file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_urdf(buf.str());
}

ValidationReport validate_model(const RobotModel& model) {
    ValidationReport report;
    auto error = [&](const std::string& element, const std::string& message) {
        report.findings.push_back({Finding::Severity::error, element, message});
    };
    auto warning = [&](const std::string& element, const std::string& message) {
        report.findings.push_back({Finding::Severity::warning, element, message});
    };

    std::set<std::string> link_names;
    for (const Link& link : model.links) {
        if (!link_names.insert(link.name).second)
            error(link.name, "duplicate link name");
        if (link.inertial) {
            if (link.inertial->mass < 0) error(link.name, "negative mass");
            const Mat3d& m = link.inertial->inertia;
            if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
                error(link.name, "inertia matrix is not symmetric");
            if (link.inertial->mass == 0 && m.cwiseAbs().maxCoeff() > 0)
                warning(link.name, "zero mass with nonzero inertia");
        }
        for (std::size_t i = 0; i < link.collision_shapes.size(); ++i)
            if (!collision::shape_valid(link.collision_shapes[i].shape))
                error(link.name, "collision shape " + std::to_string(i) +
                                      " has a non-positive dimension");
    }

    std::set<std::string> joint_names;
    for (const Joint& joint : model.joints) {
        if (!joint_names.insert(joint.name).second)
            error(joint.name, "duplicate joint name");
        if (!link_names.count(joint.parent_link))
            error(joint.name, "unknown parent link '" + joint.parent_link + "'");
        if (!link_names.count(joint.child_link))
            error(joint.name, "unknown child link '" + joint.child_link + "'");
        if (joint.kind == JointKind::fixed) continue;

        if (std::abs(joint.axis.norm() - 1.0) > 1e-9)
            error(joint.name, "axis is not a unit vector");
        if (!joint.limits) {
            error(joint.name, "missing limits on a non-fixed joint");
            continue;
        }
        if (joint.limits->velocity_max <= 0)
            error(joint.name, "velocity limit must be positive");
        if (joint.kind != JointKind::continuous) {
            if (!joint.limits->has_position_limits)
                error(joint.name, "missing position limits");
            else if (joint.limits->lower > joint.limits->upper)
                error(joint.name, "lower limit exceeds upper limit");
        }
    }
    return report;
}

bool ValidationReport::ok() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
    std::size_t n = 0;
    for (const auto& f : findings)
        if (f.severity == Finding::Severity::error) ++n;
    return n;
}

std::string ValidationReport::to_json() const {
    std::string out = "{\"findings\":[";
    for (std::size_t i = 0; i < findings.size(); ++i) {
        const Finding& f = findings[i];
        if (i) out += ",";
        auto escape = [](const std::string& s) {
            std::string r;
            for (char c : s) {
                if (c == '"' || c == '\\') r += '\\';
                r += c;
            }
            return r;
        };
        out += std::string("{\"severity\":\"") +
               (f.severity == Finding::Severity::error ? "error" : "warning") +
               "\",\"element\":\"" + escape(f.element) + "\",\"message\":\"" +
               escape(f.message) + "\"}";
    }
    out += "]}";
    return out;
}

Vec3d rpy_from_rotation(const Mat3d& r) {
    double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    double roll, yaw;
    if (std::abs(std::cos(pitch)) > 1e-12) {
        roll = std::atan2(r(2, 1), r(2, 2));
        yaw = std::atan2(r(1, 0), r(0, 0));
    } else {
        roll = 0.0;
        yaw = std::atan2(-r(0, 1), r(1, 1));
    }
    return Vec3d(roll, pitch, yaw);
}

namespace {

void emit_origin(std::ostream& out, const Pose3d& pose, const char* indent) {
    Vec3d rpy = rpy_from_rotation(pose.rotation);
    out << indent << "<origin xyz=\"" << fmt_double(pose.translation.x()) << " "
        << fmt_double(pose.translation.y()) << " " << fmt_double(pose.translation.z())
        << "\" rpy=\"" << fmt_double(rpy.x()) << " " << fmt_double(rpy.y()) << " "
        << fmt_double(rpy.z()) << "\"/>\n";
}

void emit_geometry(std::ostream& out, const collision::Shape& shape, const char* indent) {
    out << indent << "<geometry>";
    if (const auto* s = std::get_if<collision::Sphere>(&shape)) {
        out << "<sphere radius=\"" << fmt_double(s->radius) << "\"/>";
    } else if (const auto* c = std::get_if<collision::Capsule>(&shape)) {
        out << "<capsule radius=\"" << fmt_double(c->radius) << "\" length=\""
            << fmt_double(2 * c->half_length) << "\"/>";
    } else if (const auto* b = std::get_if<collision::Box>(&shape)) {
        out << "<box size=\"" << fmt_double(2 * b->half_extents.x()) << " "
            << fmt_double(2 * b->half_extents.y()) << " " << fmt_double(2 * b->half_extents.z())
            << "\"/>";
    } else {
        const auto& c = std::get<collision::Cylinder>(shape);
        out << "<cylinder radius=\"" << fmt_double(c.radius) << "\" length=\""
            << fmt_double(2 * c.half_length) << "\"/>";
    }
    out << "</geometry>\n";
}

}  // namespace

std::string serialize_urdf(const RobotModel& model) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\"?>\n<robot name=\"" << model.name << "\">\n";
    for (const Link& link : model.links) {
        out << "  <link name=\"" << link.name << "\">\n";
        if (link.inertial) {
            out << "    <inertial>\n";
            emit_origin(out, link.inertial->origin, "      ");
            out << "      <mass value=\"" << fmt_double(link.inertial->mass) << "\"/>\n";
            const Mat3d& m = link.inertial->inertia;
            out << "      <inertia ixx=\"" << fmt_double(m(0, 0)) << "\" ixy=\""
                << fmt_double(m(0, 1)) << "\" ixz=\"" << fmt_double(m(0, 2)) << "\" iyy=\""
                << fmt_double(m(1, 1)) << "\" iyz=\"" << fmt_double(m(1, 2)) << "\" izz=\""
                << fmt_double(m(2, 2)) << "\"/>\n";
            out << "    </inertial>\n";
        }
        for (const CollisionShape& cs : link.collision_shapes) {
            out << "    <collision>\n";
            emit_origin(out, cs.origin, "      ");
            emit_geometry(out, cs.shape, "      ");
            out << "    </collision>\n";
        }
        if (link.visual_mesh_ref) {
            out << "    <visual><geometry><mesh filename=\"" << *link.visual_mesh_ref
                << "\"/></geometry></visual>\n";
        }
        out << "  </link>\n";
    }
    for (const Joint& joint : model.joints) {
        out << "  <joint name=\"" << joint.name << "\" type=\"" << to_string(joint.kind)
            << "\">\n";
        emit_origin(out, joint.origin, "    ");
        out << "    <parent link=\"" << joint.parent_link << "\"/>\n";
        out << "    <child link=\"" << joint.child_link << "\"/>\n";
        if (joint.movable()) {
            out << "    <axis xyz=\"" << fmt_double(joint.axis.x()) << " "
                << fmt_double(joint.axis.y()) << " " << fmt_double(joint.axis.z()) << "\"/>\n";
            const JointLimits& l = *joint.limits;
            out << "    <limit";
            if (l.has_position_limits)
                out << " lower=\"" << fmt_double(l.lower) << "\" upper=\"" << fmt_double(l.upper)
                    << "\"";
            out << " effort=\"" << fmt_double(l.effort_max) << "\" velocity=\""
                << fmt_double(l.velocity_max) << "\"/>\n";
        }
        out << "  </joint>\n";
    }
    out << "</robot>\n";
    return out.str();
}

KinematicChain extract_chain(const RobotModel& model, const std::string& base_link,
                             const std::string& tip_link) {
    int base = model.link_index(base_link);
    int tip = model.link_index(tip_link);

    std::vector<int> path;  // joint indices, tip -> base
    int cursor = tip;
    while (cursor != base) {
        int j = model.parent_joint_of(cursor);
        if (j < 0)
            fail(ErrorCode::invalid_argument, "link '" + tip_link +
                                                  "' is not a descendant of '" + base_link + "'");
        path.push_back(j);
        cursor = model.link_index(model.joints[j].parent_link);
    }
    std::reverse(path.begin(), path.end());

    KinematicChain chain;
    chain.base_link = base_link;
    chain.tip_link = tip_link;
    Pose3d pending = Pose3d::Identity();
    for (int j : path) {
        const Joint& joint = model.joints[j];
        pending = pending * joint.origin;
        if (!joint.movable()) continue;
        ChainStep step;
        step.pre = pending;
        step.kind = joint.kind;
        step.axis = joint.axis;
        step.limits = *joint.limits;
        step.joint_name = joint.name;
        step.joint_index = j;
        chain.steps.push_back(step);
        pending = Pose3d::Identity();
    }
    chain.tail = pending;
    return chain;
}

KinematicChain with_base_transform(const KinematicChain& chain, const Pose3d& base) {
    KinematicChain out = chain;
    if (out.steps.empty())
        out.tail = base * out.tail;
    else
        out.steps.front().pre = base * out.steps.front().pre;
    return out;
}

bool models_equal(const RobotModel& a, const RobotModel& b, double tol) {
    if (a.name != b.name || a.root_link != b.root_link) return false;
    if (a.links.size() != b.links.size() || a.joints.size() != b.joints.size()) return false;
    for (std::size_t i = 0; i < a.links.size(); ++i) {
        const Link& la = a.links[i];
        const Link& lb = b.links[i];
        if (la.name != lb.name) return false;
        if (la.inertial.has_value() != lb.inertial.has_value()) return false;
        if (la.inertial) {
            if (std::abs(la.inertial->mass - lb.inertial->mass) > tol) return false;
            if (!la.inertial->origin.isApprox(lb.inertial->origin, tol)) return false;
            if ((la.inertial->inertia - lb.inertial->inertia).cwiseAbs().maxCoeff() > tol)
                return false;
        }
        if (la.visual_mesh_ref != lb.visual_mesh_ref) return false;
        if (la.collision_shapes.size() != lb.collision_shapes.size()) return false;
        for (std::size_t k = 0; k < la.collision_shapes.size(); ++k) {
            if (!collision::shape_equal(la.collision_shapes[k].shape,
                                        lb.collision_shapes[k].shape, tol))
                return false;
            if (!la.collision_shapes[k].origin.isApprox(lb.collision_shapes[k].origin, tol))
                return false;
        }
    }
    for (std::size_t i = 0; i < a.joints.size(); ++i) {
        const Joint& ja = a.joints[i];
        const Joint& jb = b.joints[i];
        if (ja.name != jb.name || ja.kind != jb.kind) return false;
        if (ja.parent_link != jb.parent_link || ja.child_link != jb.child_link) return false;
        if (!ja.origin.isApprox(jb.origin, tol)) return false;
        if (ja.movable()) {
            if ((ja.axis - jb.axis).cwiseAbs().maxCoeff() > tol) return false;
            const JointLimits& la = *ja.limits;
            const JointLimits& lb = *jb.limits;
            if (la.has_position_limits != lb.has_position_limits) return false;
            if (la.has_position_limits &&
                (std::abs(la.lower - lb.lower) > tol || std::abs(la.upper - lb.upper) > tol))
                return false;
            if (std::abs(la.velocity_max - lb.velocity_max) > tol ||
                std::abs(la.effort_max - lb.effort_max) > tol)
                return false;
        }
    }
    return true;
}

}  // namespace kinesim::urdf
