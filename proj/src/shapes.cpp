#include "kinesim/shapes.hpp"

#include <cmath>

namespace kinesim::collision {

namespace {

struct KindVisitor {
    std::string operator()(const Sphere&) const { return "sphere"; }
    std::string operator()(const Capsule&) const { return "capsule"; }
    std::string operator()(const Box&) const { return "box"; }
    std::string operator()(const Cylinder&) const { return "cylinder"; }
};

double sgn(double v) { return v < 0 ? -1.0 : 1.0; }

}  // namespace

std::string shape_kind(const Shape& s) { return std::visit(KindVisitor{}, s); }

bool shape_valid(const Shape& s) {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>) return v.radius > 0;
            if constexpr (std::is_same_v<T, Capsule>) return v.radius > 0 && v.half_length > 0;
            if constexpr (std::is_same_v<T, Box>) return (v.half_extents.array() > 0).all();
            if constexpr (std::is_same_v<T, Cylinder>) return v.radius > 0 && v.half_length > 0;
        },
        s);
}

bool shape_equal(const Shape& a, const Shape& b, double tol) {
    if (a.index() != b.index()) return false;
    if (const auto* sa = std::get_if<Sphere>(&a))
        return std::abs(sa->radius - std::get<Sphere>(b).radius) <= tol;
    if (const auto* ca = std::get_if<Capsule>(&a)) {
        const auto& cb = std::get<Capsule>(b);
        return std::abs(ca->radius - cb.radius) <= tol &&
               std::abs(ca->half_length - cb.half_length) <= tol;
    }
    if (const auto* ba = std::get_if<Box>(&a))
        return ((ba->half_extents - std::get<Box>(b).half_extents).cwiseAbs().array() <= tol).all();
    const auto& ya = std::get<Cylinder>(a);
    const auto& yb = std::get<Cylinder>(b);
    return std::abs(ya.radius - yb.radius) <= tol && std::abs(ya.half_length - yb.half_length) <= tol;
}

Vec3d support_local(const Shape& s, const Vec3d& dir) {
    if (const auto* sp = std::get_if<Sphere>(&s)) {
        double n = dir.norm();
        if (n < 1e-300) return Vec3d(sp->radius, 0, 0);
        return dir * (sp->radius / n);
    }
    if (const auto* cp = std::get_if<Capsule>(&s)) {
        double n = dir.norm();
        Vec3d tip(0, 0, sgn(dir.z()) * cp->half_length);
        if (n < 1e-300) return tip + Vec3d(cp->radius, 0, 0);
        return tip + dir * (cp->radius / n);
    }
    if (const auto* bp = std::get_if<Box>(&s)) {
        return Vec3d(sgn(dir.x()) * bp->half_extents.x(),
                     sgn(dir.y()) * bp->half_extents.y(),
                     sgn(dir.z()) * bp->half_extents.z());
    }
    const auto& cy = std::get<Cylinder>(s);
    double nxy = std::hypot(dir.x(), dir.y());
    Vec3d p(0, 0, sgn(dir.z()) * cy.half_length);
    if (nxy > 1e-300) {
        p.x() = dir.x() * (cy.radius / nxy);
        p.y() = dir.y() * (cy.radius / nxy);
    }
    return p;
}

Aabb shape_aabb(const Shape& s, const Pose3d& pose) {
    Aabb box;
    for (int i = 0; i < 3; ++i) {
        Vec3d axis = Vec3d::Zero();
        axis[i] = 1.0;
        box.hi[i] = support_world(s, pose, axis)[i];
        box.lo[i] = support_world(s, pose, -axis)[i];
    }
    return box;
}

}  // namespace kinesim::collision
