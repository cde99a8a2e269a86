#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

// Fixed-size 3-vector / 3x3 rotation algebra used by every other module.
//
// Frame conventions (fixed, never configurable):
//   +Y is the gravity (down) axis, +Z is forward. Right-handed throughout.

namespace headtraj {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline Vec3 unit_x() { return Vec3::UnitX(); }
inline Vec3 unit_y() { return Vec3::UnitY(); }
inline Vec3 unit_z() { return Vec3::UnitZ(); }

// Orthonormality tolerance for externally supplied matrices.
inline constexpr double kInputRotationTol = 1e-6;
// Tolerance for values produced internally.
inline constexpr double kInternalRotationTol = 1e-12;

inline bool is_rotation(const Mat3& R, double tol = kInputRotationTol) {
  if (!R.allFinite()) return false;
  const double ortho = (R.transpose() * R - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

inline void require_rotation(const Mat3& R, double tol = kInputRotationTol,
                             const char* what = "matrix is not a rotation") {
  if (!is_rotation(R, tol)) throw std::invalid_argument(what);
}

// Rodrigues construction. |axis| must be 1 within 1e-9.
inline Mat3 from_axis_angle(const Vec3& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("from_axis_angle: axis must be unit length");
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline Mat3 yaw_rotation(double angle) { return from_axis_angle(unit_y(), angle); }

// Nearest special-orthogonal matrix in the polar-decomposition sense,
// computed by the Newton iteration X <- (X + X^-T) / 2. Idempotent on
// valid rotations. Requires det(M) > 0.
inline Mat3 orthonormalize(const Mat3& M) {
  if (!M.allFinite() || M.determinant() <= 0.0)
    throw std::invalid_argument("orthonormalize: det(M) must be positive");
  Mat3 X = M;
  for (int i = 0; i < 50; ++i) {
    Eigen::FullPivLU<Mat3> lu(X);
    if (!lu.isInvertible())
      throw std::invalid_argument("orthonormalize: rank-deficient input");
    Mat3 next = 0.5 * (X + lu.inverse().transpose());
    const double step = (next - X).norm();
    X = next;
    if (step < 1e-15) break;
  }
  return X;
}

// Angle of R1^T R2 in [0, pi].
inline double geodesic_distance(const Mat3& R1, const Mat3& R2) {
  const Mat3 D = R1.transpose() * R2;
  const double c = std::clamp((D.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

// dR^b = R_t^T R_next, the frame-to-frame rotation in the moving body's axes.
inline Mat3 body_angular_velocity(const Mat3& R_t, const Mat3& R_next) {
  return R_t.transpose() * R_next;
}

// dR^w = R_t dR^b R_t^T, the same motion in world axes.
inline Mat3 body_to_world_velocity(const Mat3& dRb, const Mat3& R_t) {
  return R_t * dRb * R_t.transpose();
}

}  // namespace headtraj
