#include "kinesim/collision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "kinesim/error.hpp"

namespace kinesim::collision {

namespace {

constexpr double kEps = 1e-12;

// ---------------------------------------------------------------------------
// Closed-form primitives

Vec3d segment_endpoint(const Pose3d& pose, double half_length, double sign) {
    return pose * Vec3d(0, 0, sign * half_length);
}

Vec3d closest_on_segment(const Vec3d& p, const Vec3d& a, const Vec3d& b) {
    Vec3d ab = b - a;
    double len2 = ab.squaredNorm();
    if (len2 < kEps) return a;
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

// Closest points between segments [p1,q1] and [p2,q2] (Ericson 5.1.9).
void closest_segment_segment(const Vec3d& p1, const Vec3d& q1, const Vec3d& p2, const Vec3d& q2,
                             Vec3d& c1, Vec3d& c2) {
    Vec3d d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
    double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    double s = 0, t = 0;
    if (a < kEps && e < kEps) {
        c1 = p1;
        c2 = p2;
        return;
    }
    if (a < kEps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        double c = d1.dot(r);
        if (e < kEps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            double b = d1.dot(d2);
            double denom = a * e - b * b;
            if (denom > kEps)
                s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
            t = (b * s + f) / e;
            if (t < 0) {
                t = 0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1) {
                t = 1;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    c1 = p1 + d1 * s;
    c2 = p2 + d2 * t;
}

ContactResult point_radius_pair(const Vec3d& ca, double ra, const Vec3d& cb, double rb) {
    Vec3d d = cb - ca;
    double dist = d.norm();
    Vec3d n = dist > kEps ? Vec3d(d / dist) : Vec3d::UnitX();
    ContactResult out;
    out.signed_distance = dist - ra - rb;
    out.point_a = ca + n * ra;
    out.point_b = cb - n * rb;
    return out;
}

ContactResult sphere_sphere(const Sphere& a, const Pose3d& ta, const Sphere& b, const Pose3d& tb) {
    return point_radius_pair(ta.translation, a.radius, tb.translation, b.radius);
}

ContactResult sphere_capsule(const Sphere& a, const Pose3d& ta, const Capsule& b,
                             const Pose3d& tb) {
    Vec3d p0 = segment_endpoint(tb, b.half_length, -1);
    Vec3d p1 = segment_endpoint(tb, b.half_length, 1);
    Vec3d q = closest_on_segment(ta.translation, p0, p1);
    return point_radius_pair(ta.translation, a.radius, q, b.radius);
}

ContactResult capsule_capsule(const Capsule& a, const Pose3d& ta, const Capsule& b,
                              const Pose3d& tb) {
    Vec3d c1, c2;
    closest_segment_segment(segment_endpoint(ta, a.half_length, -1),
                            segment_endpoint(ta, a.half_length, 1),
                            segment_endpoint(tb, b.half_length, -1),
                            segment_endpoint(tb, b.half_length, 1), c1, c2);
    return point_radius_pair(c1, a.radius, c2, b.radius);
}

ContactResult sphere_box(const Sphere& a, const Pose3d& ta, const Box& b, const Pose3d& tb) {
    const Vec3d h = b.half_extents;
    Vec3d p = tb.inverse() * ta.translation;  // sphere center in box frame
    Vec3d q = p.cwiseMax(-h).cwiseMin(h);
    ContactResult out;
    if ((p - q).squaredNorm() > kEps * kEps) {
        Vec3d delta = p - q;
        double dist = delta.norm();
        Vec3d n_world = tb.rotation * (delta / dist);
        out.signed_distance = dist - a.radius;
        out.point_a = ta.translation - n_world * a.radius;
        out.point_b = tb * q;
    } else {
        // center inside: push out through the nearest face
        int axis = 0;
        double best = std::numeric_limits<double>::max();
        for (int i = 0; i < 3; ++i) {
            double excess = h[i] - std::abs(p[i]);
            if (excess < best) {
                best = excess;
                axis = i;
            }
        }
        Vec3d n_local = Vec3d::Zero();
        n_local[axis] = p[axis] >= 0 ? 1.0 : -1.0;
        Vec3d face = p;
        face[axis] = n_local[axis] * h[axis];
        Vec3d n_world = tb.rotation * n_local;
        out.signed_distance = -(best + a.radius);
        out.point_a = ta.translation - n_world * a.radius;
        out.point_b = tb * face;
    }
    return out;
}

ContactResult sphere_cylinder(const Sphere& a, const Pose3d& ta, const Cylinder& b,
                              const Pose3d& tb) {
    Vec3d p = tb.inverse() * ta.translation;
    double dxy = std::hypot(p.x(), p.y());
    ContactResult out;
    if (dxy <= b.radius && std::abs(p.z()) <= b.half_length) {
        // center inside the cylinder
        double lateral = b.radius - dxy;
        double cap = b.half_length - std::abs(p.z());
        Vec3d n_local;
        Vec3d q = p;
        double depth;
        if (lateral <= cap) {
            Vec3d radial = dxy > kEps ? Vec3d(p.x() / dxy, p.y() / dxy, 0) : Vec3d::UnitX();
            n_local = radial;
            q.head<2>() = radial.head<2>() * b.radius;
            depth = lateral;
        } else {
            double sign = p.z() >= 0 ? 1.0 : -1.0;
            n_local = Vec3d(0, 0, sign);
            q.z() = sign * b.half_length;
            depth = cap;
        }
        Vec3d n_world = tb.rotation * n_local;
        out.signed_distance = -(depth + a.radius);
        out.point_a = ta.translation - n_world * a.radius;
        out.point_b = tb * q;
    } else {
        Vec3d q;
        if (dxy > kEps) {
            double scale = std::min(dxy, b.radius) / dxy;
            q = Vec3d(p.x() * scale, p.y() * scale,
                      std::clamp(p.z(), -b.half_length, b.half_length));
        } else {
            q = Vec3d(0, 0, std::clamp(p.z(), -b.half_length, b.half_length));
        }
        Vec3d delta = p - q;
        double dist = delta.norm();
        Vec3d n_world = tb.rotation * (delta / dist);
        out.signed_distance = dist - a.radius;
        out.point_a = ta.translation - n_world * a.radius;
        out.point_b = tb * q;
    }
    return out;
}

// ---------------------------------------------------------------------------
// GJK / EPA for the remaining convex pairs

struct SupportPoint {
    Vec3d w = Vec3d::Zero();  // a - b in the Minkowski difference
    Vec3d a = Vec3d::Zero();
    Vec3d b = Vec3d::Zero();
};

struct SupportFn {
    const Shape* shape_a;
    const Pose3d* pose_a;
    const Shape* shape_b;
    const Pose3d* pose_b;

    SupportPoint operator()(const Vec3d& dir) const {
        SupportPoint p;
        p.a = support_world(*shape_a, *pose_a, dir);
        p.b = support_world(*shape_b, *pose_b, -dir);
        p.w = p.a - p.b;
        return p;
    }
};

struct Simplex {
    std::array<SupportPoint, 4> v;
    std::array<double, 4> bary{};
    int n = 0;
};

Vec3d closest_on_simplex_segment(Simplex& s) {
    const Vec3d a = s.v[0].w, b = s.v[1].w;
    Vec3d ab = b - a;
    double len2 = ab.squaredNorm();
    double t = len2 > kEps * kEps ? std::clamp(-a.dot(ab) / len2, 0.0, 1.0) : 0.0;
    if (t <= 0) {
        s.n = 1;
        s.bary[0] = 1;
        return a;
    }
    if (t >= 1) {
        s.v[0] = s.v[1];
        s.n = 1;
        s.bary[0] = 1;
        return b;
    }
    s.n = 2;
    s.bary[0] = 1 - t;
    s.bary[1] = t;
    return a + t * ab;
}

// Ericson's closest-point-on-triangle for a query at the origin. Reduces the
// simplex to the supporting feature and fills in barycentrics.
Vec3d closest_on_simplex_triangle(Simplex& s) {
    const Vec3d a = s.v[0].w, b = s.v[1].w, c = s.v[2].w;
    Vec3d ab = b - a, ac = c - a, ap = -a;
    double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) {
        s.n = 1;
        s.bary[0] = 1;
        return a;
    }
    Vec3d bp = -b;
    double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) {
        s.v[0] = s.v[1];
        s.n = 1;
        s.bary[0] = 1;
        return b;
    }
    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        double t = d1 / (d1 - d3);
        s.n = 2;
        s.bary[0] = 1 - t;
        s.bary[1] = t;
        return a + t * ab;
    }
    Vec3d cp = -c;
    double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) {
        s.v[0] = s.v[2];
        s.n = 1;
        s.bary[0] = 1;
        return c;
    }
    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        double t = d2 / (d2 - d6);
        s.v[1] = s.v[2];
        s.n = 2;
        s.bary[0] = 1 - t;
        s.bary[1] = t;
        return a + t * ac;
    }
    double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        s.v[0] = s.v[1];
        s.v[1] = s.v[2];
        s.n = 2;
        s.bary[0] = 1 - t;
        s.bary[1] = t;
        return b + t * (c - b);
    }
    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom, w = vc * denom;
    s.n = 3;
    s.bary[0] = 1 - v - w;
    s.bary[1] = v;
    s.bary[2] = w;
    return a + ab * v + ac * w;
}

// Returns true when the origin lies inside the tetrahedron; otherwise reduces
// the simplex to the closest face feature.
bool closest_on_simplex_tetra(Simplex& s, Vec3d& closest) {
    static constexpr int faces[4][3] = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
    static constexpr int opposite[4] = {3, 1, 2, 0};

    double best = std::numeric_limits<double>::max();
    Simplex best_simplex;
    bool any_outside = false;
    for (int f = 0; f < 4; ++f) {
        const Vec3d a = s.v[faces[f][0]].w;
        const Vec3d n = (s.v[faces[f][1]].w - a).cross(s.v[faces[f][2]].w - a);
        const double d_origin = n.dot(-a);
        const double d_ref = n.dot(s.v[opposite[f]].w - a);
        // origin on the outer side of this face?
        if (!(d_origin * d_ref < 0)) continue;
        any_outside = true;
        Simplex tri;
        tri.n = 3;
        tri.v[0] = s.v[faces[f][0]];
        tri.v[1] = s.v[faces[f][1]];
        tri.v[2] = s.v[faces[f][2]];
        Vec3d c = closest_on_simplex_triangle(tri);
        double d2 = c.squaredNorm();
        if (d2 < best) {
            best = d2;
            best_simplex = tri;
            closest = c;
        }
    }
    if (!any_outside) return true;
    s = best_simplex;
    return false;
}

struct GjkResult {
    bool intersecting = false;
    double distance = 0;
    Vec3d point_a = Vec3d::Zero();
    Vec3d point_b = Vec3d::Zero();
    Simplex simplex;
};

GjkResult run_gjk(const SupportFn& support, Vec3d dir) {
    if (dir.squaredNorm() < kEps) dir = Vec3d::UnitX();
    GjkResult res;
    Simplex& s = res.simplex;
    s.v[0] = support(dir);
    s.n = 1;
    s.bary[0] = 1;
    Vec3d v = s.v[0].w;

    for (int iter = 0; iter < 64; ++iter) {
        double vv = v.squaredNorm();
        if (vv < 1e-18) {
            res.intersecting = true;
            return res;
        }
        SupportPoint p = support(-v);
        // No support progress toward the origin: converged, separated.
        if (vv - v.dot(p.w) <= 1e-9 * vv) break;
        bool duplicate = false;
        for (int i = 0; i < s.n; ++i)
            if ((s.v[i].w - p.w).squaredNorm() < 1e-24) duplicate = true;
        if (duplicate) break;

        // A new vertex that is affinely dependent on the current simplex
        // cannot improve the feature; stop with the current estimate.
        if (s.n == 2) {
            Vec3d ab = s.v[1].w - s.v[0].w, ap = p.w - s.v[0].w;
            if (ab.cross(ap).squaredNorm() <= 1e-20 * ab.squaredNorm() * ap.squaredNorm()) break;
        } else if (s.n == 3) {
            Vec3d n = (s.v[1].w - s.v[0].w).cross(s.v[2].w - s.v[0].w);
            double n2 = n.squaredNorm();
            Vec3d ap = p.w - s.v[0].w;
            if (n2 < kEps || (n.dot(ap) * n.dot(ap)) <= 1e-20 * n2 * ap.squaredNorm()) break;
        }

        s.v[s.n++] = p;
        switch (s.n) {
            case 2:
                v = closest_on_simplex_segment(s);
                break;
            case 3:
                v = closest_on_simplex_triangle(s);
                break;
            default: {
                Vec3d c;
                if (closest_on_simplex_tetra(s, c)) {
                    res.intersecting = true;
                    return res;
                }
                v = c;
                break;
            }
        }
    }

    res.distance = v.norm();
    res.point_a.setZero();
    res.point_b.setZero();
    for (int i = 0; i < s.n; ++i) {
        res.point_a += s.bary[i] * s.v[i].a;
        res.point_b += s.bary[i] * s.v[i].b;
    }
    return res;
}

Vec3d triangle_barycentric(const Vec3d& p, const Vec3d& a, const Vec3d& b, const Vec3d& c) {
    Vec3d v0 = b - a, v1 = c - a, v2 = p - a;
    double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    double d20 = v2.dot(v0), d21 = v2.dot(v1);
    double denom = d00 * d11 - d01 * d01;
    if (std::abs(denom) < 1e-30) return Vec3d(1, 0, 0);
    double v = (d11 * d20 - d01 * d21) / denom;
    double w = (d00 * d21 - d01 * d20) / denom;
    return Vec3d(1 - v - w, v, w);
}

struct EpaFace {
    int a, b, c;
    Vec3d normal;  // unit, outward
    double dist;   // plane distance from the origin
    bool alive = true;
};

// Expanding polytope algorithm; refines the penetration depth to 1e-3
// relative error. `seed` comes from the intersecting GJK simplex.
ContactResult run_epa(const SupportFn& support, Simplex seed) {
    std::vector<SupportPoint> verts(seed.v.begin(), seed.v.begin() + seed.n);

    auto try_add_vertex = [&](const Vec3d& dir) {
        SupportPoint p = support(dir);
        for (const auto& v : verts)
            if ((v.w - p.w).squaredNorm() < 1e-20) return false;
        verts.push_back(p);
        return true;
    };

    // Blow the seed up to a full tetrahedron.
    if (verts.size() == 1) {
        for (int axis = 0; axis < 3 && verts.size() < 2; ++axis) {
            Vec3d d = Vec3d::Zero();
            d[axis] = 1;
            if (!try_add_vertex(d)) try_add_vertex(-d);
        }
    }
    if (verts.size() == 2) {
        Vec3d d = verts[1].w - verts[0].w;
        int least = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(d[i]) < std::abs(d[least])) least = i;
        Vec3d ortho = Vec3d::Zero();
        ortho[least] = 1;
        Vec3d u = d.cross(ortho).normalized();
        Vec3d w = d.cross(u).normalized();
        for (const Vec3d& dir : {u, Vec3d(-u), w, Vec3d(-w)}) {
            if (verts.size() >= 3) break;
            SupportPoint p = support(dir);
            Vec3d ab = verts[1].w - verts[0].w, ap = p.w - verts[0].w;
            if (ab.cross(ap).squaredNorm() > 1e-20 * ab.squaredNorm() * ap.squaredNorm())
                verts.push_back(p);
        }
    }
    if (verts.size() == 3) {
        Vec3d n = (verts[1].w - verts[0].w).cross(verts[2].w - verts[0].w);
        if (n.squaredNorm() > 1e-24) {
            n.normalize();
            for (const Vec3d& dir : {n, Vec3d(-n)}) {
                SupportPoint p = support(dir);
                double h = std::abs(n.dot(p.w - verts[0].w));
                if (h > 1e-10) {
                    verts.push_back(p);
                    break;
                }
            }
        }
    }
    if (verts.size() < 4) {
        // Flat Minkowski difference: grazing contact, zero depth.
        ContactResult out;
        out.signed_distance = 0;
        out.point_a = verts[0].a;
        out.point_b = verts[0].b;
        return out;
    }

    Vec3d centroid = (verts[0].w + verts[1].w + verts[2].w + verts[3].w) / 4.0;
    std::vector<EpaFace> faces;

    auto push_face = [&](int a, int b, int c) {
        Vec3d n = (verts[b].w - verts[a].w).cross(verts[c].w - verts[a].w);
        double n2 = n.norm();
        if (n2 < 1e-15) return;
        n /= n2;
        if (n.dot(verts[a].w - centroid) < 0) {
            std::swap(b, c);
            n = -n;
        }
        faces.push_back({a, b, c, n, n.dot(verts[a].w), true});
    };

    push_face(0, 1, 2);
    push_face(0, 2, 3);
    push_face(0, 3, 1);
    push_face(1, 3, 2);
    if (faces.empty()) {
        ContactResult out;
        out.signed_distance = 0;
        out.point_a = verts[0].a;
        out.point_b = verts[0].b;
        return out;
    }

    int best = -1;
    for (int iter = 0; iter < 128; ++iter) {
        best = -1;
        double best_dist = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < faces.size(); ++i) {
            if (!faces[i].alive) continue;
            if (faces[i].dist < best_dist) {
                best_dist = faces[i].dist;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;

        SupportPoint p = support(faces[best].normal);
        double grow = faces[best].normal.dot(p.w) - best_dist;
        if (grow <= 1e-3 * std::abs(faces[best].normal.dot(p.w)) + 1e-12) break;

        // Remove faces visible from p and collect the horizon.
        std::vector<std::pair<int, int>> horizon;
        std::vector<std::pair<int, int>> removed_edges;
        bool any_removed = false;
        for (auto& f : faces) {
            if (!f.alive) continue;
            if (f.normal.dot(p.w - verts[f.a].w) > 1e-12) {
                f.alive = false;
                any_removed = true;
                removed_edges.push_back({f.a, f.b});
                removed_edges.push_back({f.b, f.c});
                removed_edges.push_back({f.c, f.a});
            }
        }
        if (!any_removed) break;
        for (const auto& e : removed_edges) {
            // An edge is on the horizon if its reverse was not also removed.
            bool interior = false;
            for (const auto& r : removed_edges)
                if (r.first == e.second && r.second == e.first) interior = true;
            if (!interior) horizon.push_back(e);
        }

        int new_index = static_cast<int>(verts.size());
        verts.push_back(p);
        for (const auto& e : horizon) push_face(e.first, e.second, new_index);
    }

    if (best < 0) {
        ContactResult out;
        out.signed_distance = 0;
        out.point_a = verts[0].a;
        out.point_b = verts[0].b;
        return out;
    }

    const EpaFace& f = faces[best];
    double depth = std::max(f.dist, 0.0);
    Vec3d closest = f.normal * f.dist;
    Vec3d bary = triangle_barycentric(closest, verts[f.a].w, verts[f.b].w, verts[f.c].w);
    bary = bary.cwiseMax(0.0);
    double sum = bary.sum();
    if (sum > kEps) bary /= sum;

    ContactResult out;
    out.signed_distance = -depth;
    out.point_a = bary[0] * verts[f.a].a + bary[1] * verts[f.b].a + bary[2] * verts[f.c].a;
    out.point_b = bary[0] * verts[f.a].b + bary[1] * verts[f.b].b + bary[2] * verts[f.c].b;
    return out;
}

ContactResult gjk_pair(const Shape& a, const Pose3d& ta, const Shape& b, const Pose3d& tb) {
    SupportFn support{&a, &ta, &b, &tb};
    GjkResult res = run_gjk(support, tb.translation - ta.translation);
    if (!res.intersecting) {
        ContactResult out;
        out.signed_distance = res.distance;
        out.point_a = res.point_a;
        out.point_b = res.point_b;
        return out;
    }
    return run_epa(support, res.simplex);
}

ContactResult swapped(ContactResult r) {
    std::swap(r.point_a, r.point_b);
    return r;
}

}  // namespace

ContactResult pair_distance(const Shape& a, const Pose3d& pose_a, const Shape& b,
                            const Pose3d& pose_b) {
    // Closed forms first; everything else goes through GJK/EPA.
    if (const auto* sa = std::get_if<Sphere>(&a)) {
        if (const auto* sb = std::get_if<Sphere>(&b)) return sphere_sphere(*sa, pose_a, *sb, pose_b);
        if (const auto* cb = std::get_if<Capsule>(&b)) return sphere_capsule(*sa, pose_a, *cb, pose_b);
        if (const auto* bb = std::get_if<Box>(&b)) return sphere_box(*sa, pose_a, *bb, pose_b);
        if (const auto* yb = std::get_if<Cylinder>(&b)) return sphere_cylinder(*sa, pose_a, *yb, pose_b);
    }
    if (std::holds_alternative<Sphere>(b)) {
        return swapped(pair_distance(b, pose_b, a, pose_a));
    }
    if (const auto* ca = std::get_if<Capsule>(&a)) {
        if (const auto* cb = std::get_if<Capsule>(&b))
            return capsule_capsule(*ca, pose_a, *cb, pose_b);
    }
    return gjk_pair(a, pose_a, b, pose_b);
}

// ---------------------------------------------------------------------------
// Ray casting

namespace {

std::optional<double> min_nonnegative(std::initializer_list<std::optional<double>> candidates) {
    std::optional<double> best;
    for (const auto& c : candidates)
        if (c && *c >= 0 && (!best || *c < *best)) best = c;
    return best;
}

std::optional<double> ray_sphere_local(const Vec3d& o, const Vec3d& d, double r) {
    double b = o.dot(d);
    double c = o.squaredNorm() - r * r;
    double disc = b * b - c;
    if (disc < 0) return std::nullopt;
    double s = std::sqrt(disc);
    if (-b - s >= 0) return -b - s;
    if (-b + s >= 0) return -b + s;
    return std::nullopt;
}

std::optional<double> ray_box_local(const Vec3d& o, const Vec3d& d, const Vec3d& h) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(d[i]) < 1e-300) {
            if (std::abs(o[i]) > h[i]) return std::nullopt;
            continue;
        }
        double t1 = (-h[i] - o[i]) / d[i];
        double t2 = (h[i] - o[i]) / d[i];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
    }
    if (tmin > tmax || tmax < 0) return std::nullopt;
    return tmin >= 0 ? tmin : tmax;
}

std::optional<double> ray_cylinder_local(const Vec3d& o, const Vec3d& d, double r, double hl) {
    std::optional<double> lateral_near, lateral_far, cap_lo, cap_hi;
    double a = d.x() * d.x() + d.y() * d.y();
    if (a > 1e-300) {
        double b = o.x() * d.x() + o.y() * d.y();
        double c = o.x() * o.x() + o.y() * o.y() - r * r;
        double disc = b * b - a * c;
        if (disc >= 0) {
            double s = std::sqrt(disc);
            for (double t : {(-b - s) / a, (-b + s) / a}) {
                if (t < 0 || std::abs(o.z() + t * d.z()) > hl + 1e-12) continue;
                if (!lateral_near)
                    lateral_near = t;
                else
                    lateral_far = t;
            }
        }
    }
    if (std::abs(d.z()) > 1e-300) {
        for (double zcap : {-hl, hl}) {
            double t = (zcap - o.z()) / d.z();
            if (t < 0) continue;
            double x = o.x() + t * d.x(), y = o.y() + t * d.y();
            if (x * x + y * y <= r * r + 1e-12) {
                if (!cap_lo)
                    cap_lo = t;
                else
                    cap_hi = t;
            }
        }
    }
    return min_nonnegative({lateral_near, lateral_far, cap_lo, cap_hi});
}

std::optional<double> ray_capsule_local(const Vec3d& o, const Vec3d& d, double r, double hl) {
    std::optional<double> best;
    auto consider = [&](std::optional<double> t) {
        if (t && *t >= 0 && (!best || *t < *best)) best = t;
    };
    double a = d.x() * d.x() + d.y() * d.y();
    if (a > 1e-300) {
        double b = o.x() * d.x() + o.y() * d.y();
        double c = o.x() * o.x() + o.y() * o.y() - r * r;
        double disc = b * b - a * c;
        if (disc >= 0) {
            double s = std::sqrt(disc);
            for (double t : {(-b - s) / a, (-b + s) / a})
                if (t >= 0 && std::abs(o.z() + t * d.z()) <= hl) consider(t);
        }
    }
    for (double zcap : {hl, -hl}) {
        Vec3d oc = o - Vec3d(0, 0, zcap);
        if (auto t = ray_sphere_local(oc, d, r)) {
            double z = o.z() + *t * d.z();
            bool on_cap_side = zcap > 0 ? z >= hl - 1e-12 : z <= -hl + 1e-12;
            if (on_cap_side) consider(t);
        }
    }
    return best;
}

}  // namespace

std::optional<double> ray_shape_distance(const Shape& shape, const Pose3d& pose, const Ray& ray) {
    Mat3d rt = pose.rotation.transpose();
    Vec3d o = rt * (ray.origin - pose.translation);
    Vec3d d = rt * ray.direction;
    if (const auto* s = std::get_if<Sphere>(&shape)) return ray_sphere_local(o, d, s->radius);
    if (const auto* b = std::get_if<Box>(&shape)) return ray_box_local(o, d, b->half_extents);
    if (const auto* c = std::get_if<Cylinder>(&shape))
        return ray_cylinder_local(o, d, c->radius, c->half_length);
    const auto& cap = std::get<Capsule>(shape);
    return ray_capsule_local(o, d, cap.radius, cap.half_length);
}

std::optional<RayHit> ray_cast(std::span<const WorldBody> bodies, const Ray& ray,
                               double max_range, bool ground_plane) {
    double norm = ray.direction.norm();
    if (norm < kEps) fail(ErrorCode::invalid_argument, "zero-length ray direction");
    if (std::abs(norm - 1.0) > 1e-9)
        fail(ErrorCode::invalid_argument, "ray direction must be unit length");
    if (max_range <= 0) fail(ErrorCode::invalid_argument, "max_range must be positive");

    std::optional<RayHit> best;
    auto consider = [&](double t, const std::string& id) {
        if (t < 0 || t > max_range) return;
        if (!best || t < best->distance)
            best = RayHit{t, ray.origin + t * ray.direction, id};
    };
    for (const WorldBody& body : bodies) {
        if (auto t = ray_shape_distance(body.shape, body.pose, ray)) consider(*t, body.id);
    }
    if (ground_plane && std::abs(ray.direction.z()) > 1e-300) {
        double t = -ray.origin.z() / ray.direction.z();
        if (t >= 0) consider(t, "ground");
    }
    return best;
}

// ---------------------------------------------------------------------------
// Self collision

LinkPair make_link_pair(const std::string& a, const std::string& b) {
    return a <= b ? LinkPair{a, b} : LinkPair{b, a};
}

std::vector<LinkPair> self_collision_posed(const urdf::RobotModel& model,
                                           const std::vector<Pose3d>& link_poses,
                                           const std::set<LinkPair>& ignore_pairs,
                                           const QueryOptions& options) {
    struct LinkGeometry {
        int link;
        Aabb box;
        std::vector<std::pair<const Shape*, Pose3d>> shapes;
    };
    std::vector<LinkGeometry> geo;
    for (std::size_t i = 0; i < model.links.size(); ++i) {
        const urdf::Link& link = model.links[i];
        if (link.collision_shapes.empty()) continue;
        LinkGeometry g;
        g.link = static_cast<int>(i);
        for (const auto& cs : link.collision_shapes) {
            Pose3d world = link_poses[i] * cs.origin;
            Aabb box = shape_aabb(cs.shape, world);
            if (g.shapes.empty()) {
                g.box = box;
            } else {
                g.box.lo = g.box.lo.cwiseMin(box.lo);
                g.box.hi = g.box.hi.cwiseMax(box.hi);
            }
            g.shapes.push_back({&cs.shape, world});
        }
        geo.push_back(std::move(g));
    }

    std::vector<LinkPair> out;
    for (std::size_t i = 0; i < geo.size(); ++i) {
        for (std::size_t j = i + 1; j < geo.size(); ++j) {
            const std::string& name_i = model.links[geo[i].link].name;
            const std::string& name_j = model.links[geo[j].link].name;
            if (model.links_adjacent(geo[i].link, geo[j].link)) continue;
            if (ignore_pairs.count(make_link_pair(name_i, name_j))) continue;
            if (options.broad_phase && !geo[i].box.overlaps(geo[j].box)) continue;
            bool colliding = false;
            for (const auto& [sa, ta] : geo[i].shapes) {
                for (const auto& [sb, tb] : geo[j].shapes) {
                    if (pair_distance(*sa, ta, *sb, tb).signed_distance < 0) {
                        colliding = true;
                        break;
                    }
                }
                if (colliding) break;
            }
            if (colliding) out.push_back({name_i, name_j});
        }
    }
    return out;
}

std::vector<LinkPair> self_collision(const urdf::RobotModel& model, const kin::Configuration& q,
                                     const std::set<LinkPair>& ignore_pairs,
                                     const QueryOptions& options) {
    std::vector<Pose3d> poses;
    kin::link_poses(model, q.values(), poses);
    return self_collision_posed(model, poses, ignore_pairs, options);
}

}  // namespace kinesim::collision
