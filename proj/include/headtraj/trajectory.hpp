#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "headtraj/heading.hpp"
#include "headtraj/so3.hpp"

// World-frame position reconstruction from orientations and local
// velocities, its exact inverse, and the combined human+camera world
// motion reconstruction.
//
// Velocity convention: v[t] is the displacement from frame t to t+1
// expressed in frame t's local basis, so out[t+1] = out[t] + R[t] v[t].
// Units are meters per frame; fps is carried separately for metrics.

namespace headtraj {

// Timestamped per-frame state for one body (human or camera).
struct MotionSequence {
  double fps = 30.0;
  std::vector<Mat3> rotations;              // world orientation, length T
  std::vector<Vec3> positions;              // world root position (m), length T
  std::vector<Vec3> local_velocities;       // m/frame, length T-1 (may be empty)
  std::vector<std::vector<Vec3>> joints;    // world joint positions, T x J (optional)
  std::vector<std::vector<bool>> contacts;  // per frame, per foot (optional)

  std::size_t frames() const { return rotations.size(); }

  void validate() const {
    if (!(fps > 0.0) || !std::isfinite(fps))
      throw std::invalid_argument("MotionSequence: fps must be positive");
    const std::size_t T = rotations.size();
    if (T < 1) throw std::invalid_argument("MotionSequence: empty sequence");
    if (positions.size() != T)
      throw std::invalid_argument("MotionSequence: positions length mismatch");
    if (!local_velocities.empty() && local_velocities.size() != T - 1)
      throw std::invalid_argument(
          "MotionSequence: local_velocities must have length T-1");
    if (!joints.empty() && joints.size() != T)
      throw std::invalid_argument("MotionSequence: joints length mismatch");
    if (!contacts.empty() && contacts.size() != T)
      throw std::invalid_argument("MotionSequence: contacts length mismatch");
  }
};

// out[0] = t0; out[t] = out[t-1] + rotations[t-1] * v[t-1].
inline std::vector<Vec3> integrate_trajectory(
    const Vec3& t0, const std::vector<Mat3>& rotations,
    const std::vector<Vec3>& local_velocities) {
  if (rotations.size() != local_velocities.size() + 1)
    throw std::invalid_argument(
        "integrate_trajectory: need len(rotations) == len(velocities) + 1");
  std::vector<Vec3> out;
  out.reserve(rotations.size());
  out.push_back(t0);
  for (std::size_t t = 0; t < local_velocities.size(); ++t) {
    out.push_back(out.back() + rotations[t] * local_velocities[t]);
  }
  return out;
}

// Exact inverse of integrate_trajectory:
// v[t] = rotations[t]^T (positions[t+1] - positions[t]).
inline std::vector<Vec3> differentiate_trajectory(
    const std::vector<Vec3>& positions, const std::vector<Mat3>& rotations) {
  if (positions.size() != rotations.size() || positions.size() < 2)
    throw std::invalid_argument(
        "differentiate_trajectory: need matching lengths >= 2");
  std::vector<Vec3> out;
  out.reserve(positions.size() - 1);
  for (std::size_t t = 0; t + 1 < positions.size(); ++t) {
    out.push_back(rotations[t].transpose() * (positions[t + 1] - positions[t]));
  }
  return out;
}

struct WorldMotion {
  MotionSequence human;
  MotionSequence camera;
};

// Core reconstruction from decomposed observations: camera body-frame
// angular velocities + per-frame roll-pitch factors drive the heading
// pipeline; human orientation follows by composition; both position
// tracks by dead-reckoning integration. The initial heading is a free
// gauge; identity is the inference-time default.
inline WorldMotion reconstruct_world_motion_from_factors(
    const std::vector<Mat3>& body_ang_vel,  // length T-1
    const std::vector<Vec3>& cam_local_v,   // length T-1
    const std::vector<Mat3>& rp_seq,        // length T
    const std::vector<Mat3>& r_hc_seq,      // length T
    const std::vector<Vec3>& human_local_v, // length T-1
    const Vec3& t0_h, const Vec3& t0_cam,
    const Mat3& initial_yaw = Mat3::Identity(), double fps = 30.0,
    const HeadingConfig& cfg = {}) {
  const std::size_t T = rp_seq.size();
  if (T < 2 || body_ang_vel.size() != T - 1 || cam_local_v.size() != T - 1 ||
      r_hc_seq.size() != T || human_local_v.size() != T - 1)
    throw std::invalid_argument(
        "reconstruct_world_motion: inconsistent sequence lengths");

  // With noisy roll-pitch factors the conjugated deltas carry a small
  // off-yaw component; integration uses their yaw factor.
  std::vector<Mat3> dyaw;
  dyaw.reserve(T - 1);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const Mat3 d =
        heading_angular_velocity(body_ang_vel[t], rp_seq[t], rp_seq[t + 1]);
    dyaw.push_back(decompose_heading(orthonormalize(d), cfg).yaw);
  }
  const std::vector<Mat3> yaw = integrate_heading(initial_yaw, dyaw, cfg);

  WorldMotion out;
  out.camera.fps = fps;
  out.human.fps = fps;
  out.camera.rotations.reserve(T);
  out.human.rotations.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    out.camera.rotations.push_back(yaw[t] * rp_seq[t]);
    out.human.rotations.push_back(
        compose_world_orientation(yaw[t], rp_seq[t], r_hc_seq[t]));
  }
  out.camera.positions =
      integrate_trajectory(t0_cam, out.camera.rotations, cam_local_v);
  out.human.positions =
      integrate_trajectory(t0_h, out.human.rotations, human_local_v);
  out.camera.local_velocities = cam_local_v;
  out.human.local_velocities = human_local_v;
  return out;
}

// Convenience overload taking raw camera rotations instead of precomputed
// body-frame angular velocities.
inline WorldMotion reconstruct_world_motion(
    const std::vector<Mat3>& cam_rots, const std::vector<Vec3>& cam_local_v,
    const std::vector<Mat3>& rp_seq, const std::vector<Mat3>& r_hc_seq,
    const std::vector<Vec3>& human_local_v, const Vec3& t0_h,
    const Vec3& t0_cam, const Mat3& initial_yaw = Mat3::Identity(),
    double fps = 30.0, const HeadingConfig& cfg = {}) {
  if (cam_rots.size() < 2)
    throw std::invalid_argument("reconstruct_world_motion: need >= 2 frames");
  std::vector<Mat3> dRb;
  dRb.reserve(cam_rots.size() - 1);
  for (std::size_t t = 0; t + 1 < cam_rots.size(); ++t)
    dRb.push_back(body_angular_velocity(cam_rots[t], cam_rots[t + 1]));
  return reconstruct_world_motion_from_factors(dRb, cam_local_v, rp_seq,
                                               r_hc_seq, human_local_v, t0_h,
                                               t0_cam, initial_yaw, fps, cfg);
}

}  // namespace headtraj
