#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace kinesim {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

/// Wrap an angle into (-pi, pi]. The boundary maps to +pi, so rotation
/// targets exactly half a turn away resolve toward the positive direction.
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    a = std::fmod(a + pi, Scalar(2) * pi);
    if (a <= Scalar(0)) a += Scalar(2) * pi;
    return a - pi;
}

template <typename Derived>
Mat3<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
    using S = typename Derived::Scalar;
    Mat3<S> m;
    m << S(0), -v.z(), v.y(),
         v.z(), S(0), -v.x(),
        -v.y(), v.x(), S(0);
    return m;
}

template <typename Derived>
Vec3<typename Derived::Scalar> vee(const Eigen::MatrixBase<Derived>& m) {
    return Vec3<typename Derived::Scalar>(m(2, 1), m(0, 2), m(1, 0));
}

/// Fixed-axis roll-pitch-yaw rotation, composed as Rz(yaw) * Ry(pitch) * Rx(roll).
template <typename Scalar>
Mat3<Scalar> rotation_rpy(Scalar roll, Scalar pitch, Scalar yaw) {
    using AA = Eigen::AngleAxis<Scalar>;
    Mat3<Scalar> r = (AA(yaw, Vec3<Scalar>::UnitZ()) *
                      AA(pitch, Vec3<Scalar>::UnitY()) *
                      AA(roll, Vec3<Scalar>::UnitX()))
                         .toRotationMatrix();
    return r;
}

template <typename Derived>
Mat3<typename Derived::Scalar> rotation_about(const Eigen::MatrixBase<Derived>& axis,
                                              typename Derived::Scalar angle) {
    using S = typename Derived::Scalar;
    return Eigen::AngleAxis<S>(angle, axis.derived().normalized()).toRotationMatrix();
}

template <typename Derived>
typename Derived::Scalar orthonormality_error(const Eigen::MatrixBase<Derived>& r) {
    using S = typename Derived::Scalar;
    return ((r.transpose() * r) - Mat3<S>::Identity()).cwiseAbs().maxCoeff();
}

/// Gram-Schmidt re-orthonormalization. The third column is rebuilt from the
/// cross product, so the result is always right-handed.
template <typename Derived>
Mat3<typename Derived::Scalar> orthonormalized(const Eigen::MatrixBase<Derived>& m) {
    using S = typename Derived::Scalar;
    Mat3<S> r;
    r.col(0) = m.col(0).normalized();
    r.col(1) = (m.col(1) - r.col(0) * r.col(0).dot(m.col(1))).normalized();
    r.col(2) = r.col(0).cross(r.col(1));
    return r;
}

/// Rigid transform in SE(3): rotation plus translation, meters and radians.
template <typename Scalar>
struct Pose3 {
    Mat3<Scalar> rotation = Mat3<Scalar>::Identity();
    Vec3<Scalar> translation = Vec3<Scalar>::Zero();

    static Pose3 Identity() { return Pose3{}; }

    static Pose3 Translation(Scalar x, Scalar y, Scalar z) {
        return Pose3{Mat3<Scalar>::Identity(), Vec3<Scalar>(x, y, z)};
    }

    template <typename Derived>
    static Pose3 Translation(const Eigen::MatrixBase<Derived>& t) {
        return Pose3{Mat3<Scalar>::Identity(), t};
    }

    template <typename Derived>
    static Pose3 Rotation(const Eigen::MatrixBase<Derived>& r) {
        return Pose3{r, Vec3<Scalar>::Zero()};
    }

    /// Composition, with drift control: the rotation is re-orthonormalized
    /// whenever ||R^T R - I||_inf exceeds 1e-9.
    Pose3 operator*(const Pose3& rhs) const {
        Pose3 out;
        out.rotation = rotation * rhs.rotation;
        out.translation = rotation * rhs.translation + translation;
        if (orthonormality_error(out.rotation) > Scalar(1e-9))
            out.rotation = orthonormalized(out.rotation);
        return out;
    }

    template <typename Derived>
    Vec3<Scalar> operator*(const Eigen::MatrixBase<Derived>& point) const {
        return rotation * point + translation;
    }

    Pose3 inverse() const {
        Pose3 out;
        out.rotation = rotation.transpose();
        out.translation = -(out.rotation * translation);
        return out;
    }

    bool isApprox(const Pose3& other, Scalar tol) const {
        return (rotation - other.rotation).cwiseAbs().maxCoeff() <= tol &&
               (translation - other.translation).cwiseAbs().maxCoeff() <= tol;
    }
};

using Pose3d = Pose3<double>;

template <typename Scalar>
Pose3<Scalar> pose_from_xyz_rpy(const Vec3<Scalar>& xyz, const Vec3<Scalar>& rpy) {
    return Pose3<Scalar>{rotation_rpy(rpy.x(), rpy.y(), rpy.z()), xyz};
}

}  // namespace kinesim
