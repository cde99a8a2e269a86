#pragma once

#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "headtraj/so3.hpp"

// Yaw / roll-pitch factorization of camera orientations, heading angular
// velocity extraction, recursive heading integration, and world-orientation
// composition.
//
// A "yaw" here is a rotation about the world +Y (down) axis only. The
// roll-pitch remainder rp = yaw^T R is kept as an opaque matrix; nothing
// downstream needs it split into ordered roll/pitch angles.

namespace headtraj {

struct HeadingConfig {
  // Threshold on the horizontal projection of the forward vector below
  // which the decomposition is considered degenerate (camera looking
  // straight up or down) and falls back to f_safe = e_x.
  double epsilon = 1e-6;
};

// Testing hook: HEADTRAJ_EPSILON overrides the default threshold.
inline HeadingConfig default_heading_config() {
  HeadingConfig cfg;
  if (const char* env = std::getenv("HEADTRAJ_EPSILON")) {
    cfg.epsilon = std::atof(env);
  }
  return cfg;
}

struct HeadingDecomp {
  Mat3 yaw;  // rotation about world +Y only
  Mat3 rp;   // remainder, yaw^T * R
};

// R = yaw * rp with yaw built from the forward vector f = R e_z projected
// onto the horizontal (XZ) plane. At the degeneracy (|f_xz| <= epsilon)
// the forward fallback is e_x, which makes yaw discontinuous there; the
// discontinuity is accepted rather than smoothed.
inline HeadingDecomp decompose_heading(const Mat3& R,
                                       const HeadingConfig& cfg = {}) {
  require_rotation(R);
  if (!(cfg.epsilon > 0.0))
    throw std::invalid_argument("decompose_heading: epsilon must be positive");

  const Vec3 f = R * unit_z();
  Vec3 f_xz(f.x(), 0.0, f.z());
  Vec3 f_safe;
  if (f_xz.norm() > cfg.epsilon) {
    f_safe = f_xz.normalized();
  } else {
    f_safe = unit_x();
  }
  const Vec3 r = unit_y().cross(f_safe).normalized();

  HeadingDecomp out;
  out.yaw.col(0) = r;
  out.yaw.col(1) = unit_y();
  out.yaw.col(2) = f_safe;
  out.rp = out.yaw.transpose() * R;
  return out;
}

// dR_yaw = rp_t * dR_cam * rp_next^T. When the inputs are consistent
// factors of real camera rotations this equals yaw_t^T yaw_next exactly.
inline Mat3 heading_angular_velocity(const Mat3& dR_cam, const Mat3& rp_t,
                                     const Mat3& rp_next) {
  return rp_t * dR_cam * rp_next.transpose();
}

// yaw(theta) * rp * R_hc: human orientation in world space.
inline Mat3 compose_world_orientation(const Mat3& yaw, const Mat3& rp,
                                      const Mat3& R_hc) {
  return yaw * rp * R_hc;
}

namespace detail {
// Distance from a rotation to its own yaw factor.
inline double off_yaw_angle(const Mat3& R, const HeadingConfig& cfg) {
  return geodesic_distance(R, decompose_heading(R, cfg).yaw);
}
}  // namespace detail

// Recursive heading integration: out[0] = yaw0, out[t] = out[t-1] * delta[t-1].
// Deltas must be pure yaw within 1e-5 geodesic (numeric noise from the
// conjugation in heading_angular_velocity must not hard-fail valid data).
// Every 64 steps the running product is re-orthonormalized and re-projected
// to its yaw factor to bound off-axis drift.
inline std::vector<Mat3> integrate_heading(const Mat3& yaw0,
                                           const std::vector<Mat3>& deltas,
                                           const HeadingConfig& cfg = {}) {
  constexpr double kPureYawTol = 1e-5;
  constexpr int kRenormPeriod = 64;

  require_rotation(yaw0);
  if (detail::off_yaw_angle(yaw0, cfg) > kPureYawTol)
    throw std::invalid_argument("integrate_heading: yaw0 is not pure yaw");

  std::vector<Mat3> out;
  out.reserve(deltas.size() + 1);
  out.push_back(yaw0);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (detail::off_yaw_angle(deltas[i], cfg) > kPureYawTol)
      throw std::invalid_argument("integrate_heading: delta is not pure yaw");
    Mat3 next = out.back() * deltas[i];
    if ((i + 1) % kRenormPeriod == 0) {
      next = decompose_heading(orthonormalize(next), cfg).yaw;
    }
    out.push_back(next);
  }
  return out;
}

struct SequenceDecomp {
  std::vector<Mat3> rp;    // length T
  std::vector<Mat3> yaw;   // length T
  std::vector<Mat3> dyaw;  // length T-1
};

// Full pipeline over a camera rotation sequence: per-frame roll-pitch
// factors, heading angular velocities, and the integrated heading track
// anchored at the first frame's yaw.
inline SequenceDecomp decompose_sequence(const std::vector<Mat3>& cam_rots,
                                         const HeadingConfig& cfg = {}) {
  if (cam_rots.size() < 2)
    throw std::invalid_argument("decompose_sequence: need at least 2 frames");

  SequenceDecomp out;
  out.rp.reserve(cam_rots.size());
  for (const Mat3& R : cam_rots) out.rp.push_back(decompose_heading(R, cfg).rp);

  out.dyaw.reserve(cam_rots.size() - 1);
  for (std::size_t t = 0; t + 1 < cam_rots.size(); ++t) {
    const Mat3 dRb = body_angular_velocity(cam_rots[t], cam_rots[t + 1]);
    out.dyaw.push_back(heading_angular_velocity(dRb, out.rp[t], out.rp[t + 1]));
  }

  out.yaw = integrate_heading(decompose_heading(cam_rots[0], cfg).yaw, out.dyaw,
                              cfg);
  return out;
}

}  // namespace headtraj
