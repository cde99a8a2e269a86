#pragma once

#include <stdexcept>
#include <vector>

#include "headtraj/trajectory.hpp"

// Training-objective components computable without a body model: direct
// prediction loss, bidirectional teacher-forcing trajectory losses,
// contact labeling, static-contact loss, and the weighted total.

namespace headtraj {

struct LossWeights {
  double lambda_h = 1.0;
  double lambda_cam = 1.0;
  double lambda_static = 1.0;
  // Camera-space weights, recorded for completeness; the losses they
  // scale are not computed here (no keypoints or mesh).
  static constexpr double kCrJ3d = 500.0;
  static constexpr double kCrVerts = 500.0;
  static constexpr double kJ2d = 1000.0;
  static constexpr double kVerts2d = 1000.0;
  static constexpr double kTranslC = 1.0;

  void validate() const {
    if (lambda_h < 0.0 || lambda_cam < 0.0 || lambda_static < 0.0)
      throw std::invalid_argument("LossWeights: weights must be >= 0");
  }
};

struct PredictionVector {
  std::vector<double> values;
  std::vector<bool> mask;  // parallel; false entries excluded from the loss
};

// Mean squared error over masked-in entries of the raw output space.
// All-masked-out is defined as 0.
inline double simple_loss(const PredictionVector& pred,
                          const PredictionVector& gt) {
  if (pred.values.size() != gt.values.size() ||
      pred.mask.size() != pred.values.size() ||
      gt.mask.size() != gt.values.size())
    throw std::invalid_argument("simple_loss: length mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    if (pred.mask[i] != gt.mask[i])
      throw std::invalid_argument("simple_loss: masks differ");
    if (!pred.mask[i]) continue;
    const double d = pred.values[i] - gt.values[i];
    sum += d * d;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

namespace detail {
// L1 over frames of the per-frame Euclidean error. Coordinate-wise L1
// would not be invariant under a global rotation of the scene.
inline double l1_trajectory_error(const std::vector<Vec3>& traj,
                                  const std::vector<Vec3>& gt) {
  double sum = 0.0;
  for (std::size_t t = 0; t < traj.size(); ++t)
    sum += (traj[t] - gt[t]).norm();
  return sum;
}
}  // namespace detail

// Bidirectional teacher forcing: integrate once with ground-truth
// orientation and predicted velocity, once with predicted orientation and
// ground-truth velocity; both from the ground-truth origin. Each branch's
// L1 trajectory error is divided by frame count so losses are comparable
// across sequence lengths.
inline double teacher_forcing_traj_loss(const std::vector<Vec3>& v_pred,
                                        const std::vector<Mat3>& R_pred,
                                        const std::vector<Vec3>& v_gt,
                                        const std::vector<Mat3>& R_gt,
                                        const std::vector<Vec3>& t_gt) {
  const std::size_t T = t_gt.size();
  if (T < 2 || R_gt.size() != T || R_pred.size() != T ||
      v_gt.size() != T - 1 || v_pred.size() != T - 1)
    throw std::invalid_argument("teacher_forcing_traj_loss: length mismatch");

  const std::vector<Vec3> check = integrate_trajectory(t_gt[0], R_gt, v_gt);
  for (std::size_t t = 0; t < T; ++t) {
    if ((check[t] - t_gt[t]).norm() > 1e-9)
      throw std::invalid_argument(
          "teacher_forcing_traj_loss: ground truth is not self-consistent");
  }

  const std::vector<Vec3> t_orient = integrate_trajectory(t_gt[0], R_gt, v_pred);
  const std::vector<Vec3> t_vel = integrate_trajectory(t_gt[0], R_pred, v_gt);
  const double n = static_cast<double>(T);
  return detail::l1_trajectory_error(t_orient, t_gt) / n +
         detail::l1_trajectory_error(t_vel, t_gt) / n;
}

inline constexpr double kContactThresholdMps = 0.15;

// label[t][f] = (speed of foot f over [t, t+1] in m/s) < threshold, with
// the boundary resolving to non-contact (strict less-than). The last
// frame copies the previous label.
inline std::vector<std::vector<bool>> generate_contact_labels(
    const std::vector<std::vector<Vec3>>& foot_positions, double fps,
    double threshold_mps = kContactThresholdMps) {
  const std::size_t T = foot_positions.size();
  if (T < 2)
    throw std::invalid_argument("generate_contact_labels: need >= 2 frames");
  if (!(fps > 0.0))
    throw std::invalid_argument("generate_contact_labels: fps must be positive");
  const std::size_t F = foot_positions[0].size();
  std::vector<std::vector<bool>> labels(T, std::vector<bool>(F));
  for (std::size_t t = 0; t + 1 < T; ++t) {
    if (foot_positions[t].size() != F || foot_positions[t + 1].size() != F)
      throw std::invalid_argument("generate_contact_labels: ragged input");
    for (std::size_t f = 0; f < F; ++f) {
      const double speed =
          (foot_positions[t + 1][f] - foot_positions[t][f]).norm() * fps;
      labels[t][f] = speed < threshold_mps;
    }
  }
  labels[T - 1] = labels[T - 2];
  return labels;
}

// Mean speed (m/s) over contact-labeled (frame, foot) pairs; 0 when no
// pair is labeled.
inline double static_contact_loss(
    const std::vector<std::vector<Vec3>>& foot_velocities,  // m/frame
    const std::vector<std::vector<bool>>& contacts, double fps) {
  if (foot_velocities.size() != contacts.size())
    throw std::invalid_argument("static_contact_loss: shape mismatch");
  if (!(fps > 0.0))
    throw std::invalid_argument("static_contact_loss: fps must be positive");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < contacts.size(); ++t) {
    if (foot_velocities[t].size() != contacts[t].size())
      throw std::invalid_argument("static_contact_loss: shape mismatch");
    for (std::size_t f = 0; f < contacts[t].size(); ++f) {
      if (!contacts[t][f]) continue;
      sum += foot_velocities[t][f].norm() * fps;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

// simple + lambda_h * traj_h + lambda_cam * traj_cam + lambda_static * static.
inline double total_loss(double simple, double traj_h, double traj_cam,
                         double static_contact, const LossWeights& w) {
  w.validate();
  if (simple < 0.0 || traj_h < 0.0 || traj_cam < 0.0 || static_contact < 0.0)
    throw std::invalid_argument("total_loss: components must be >= 0");
  return simple + w.lambda_h * traj_h + w.lambda_cam * traj_cam +
         w.lambda_static * static_contact;
}

}  // namespace headtraj
