#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "headtraj/trajectory.hpp"

// World-space and camera-space evaluation metrics over MotionSequences.

namespace headtraj {

// World-space values in mm except where noted; fields are absent when the
// inputs lack the required channels.
struct MetricsReport {
  std::optional<double> wa_mpjpe_100_mm;
  std::optional<double> w_mpjpe_100_mm;
  std::optional<double> rte_percent;
  std::optional<double> jitter_10mps3;
  std::optional<double> foot_sliding_mm;
  std::optional<double> pa_mpjpe_mm;
  std::optional<double> mpjpe_mm;
  std::optional<double> accel_mm_s2;
};

struct RigidAlignment {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

// Umeyama fit: argmin over (R, t, s) of sum ||s R P_i + t - Q_i||^2, with
// reflections excluded. with_scale=false fixes s = 1.
inline RigidAlignment procrustes_align(const std::vector<Vec3>& P,
                                       const std::vector<Vec3>& Q,
                                       bool with_scale) {
  const std::size_t N = P.size();
  if (N != Q.size() || N < 3)
    throw std::invalid_argument("procrustes_align: need >= 3 paired points");

  Vec3 mp = Vec3::Zero(), mq = Vec3::Zero();
  for (std::size_t i = 0; i < N; ++i) {
    mp += P[i];
    mq += Q[i];
  }
  mp /= static_cast<double>(N);
  mq /= static_cast<double>(N);

  Mat3 H = Mat3::Zero();
  double var_p = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const Vec3 dp = P[i] - mp;
    const Vec3 dq = Q[i] - mq;
    H += dq * dp.transpose();
    var_p += dp.squaredNorm();
  }
  H /= static_cast<double>(N);
  var_p /= static_cast<double>(N);

  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // A unique rotation needs rank >= 2.
  if (sv(1) <= 1e-12 * std::max(1.0, sv(0)) || var_p <= 1e-24)
    throw std::invalid_argument("procrustes_align: degenerate point set");

  Vec3 d = Vec3::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
    d(2) = -1.0;
  RigidAlignment a;
  a.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  a.scale = with_scale ? (sv.dot(d)) / var_p : 1.0;
  a.translation = mq - a.scale * (a.rotation * mp);
  return a;
}

namespace detail {

inline void require_same_shape(const std::vector<std::vector<Vec3>>& a,
                               const std::vector<std::vector<Vec3>>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("joint sequences: frame count mismatch");
  for (std::size_t t = 0; t < a.size(); ++t)
    if (a[t].size() != b[t].size())
      throw std::invalid_argument("joint sequences: joint count mismatch");
}

inline std::vector<Vec3> flatten(const std::vector<std::vector<Vec3>>& joints,
                                 std::size_t begin, std::size_t end) {
  std::vector<Vec3> out;
  for (std::size_t t = begin; t < end; ++t)
    out.insert(out.end(), joints[t].begin(), joints[t].end());
  return out;
}

inline double mean_joint_error_mm(const std::vector<Vec3>& a,
                                  const std::vector<Vec3>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).norm();
  return 1000.0 * sum / static_cast<double>(a.size());
}

}  // namespace detail

// Root-aligned mean per-joint error in mm (joint 0 is the root).
inline double mpjpe(const std::vector<std::vector<Vec3>>& pred,
                    const std::vector<std::vector<Vec3>>& gt) {
  detail::require_same_shape(pred, gt);
  if (pred.empty() || pred[0].empty())
    throw std::invalid_argument("mpjpe: empty input");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    for (std::size_t j = 0; j < pred[t].size(); ++j) {
      const Vec3 dp = pred[t][j] - pred[t][0];
      const Vec3 dg = gt[t][j] - gt[t][0];
      sum += (dp - dg).norm();
      ++n;
    }
  }
  return 1000.0 * sum / static_cast<double>(n);
}

// Per-frame Procrustes (with scale) before measuring, in mm.
inline double pa_mpjpe(const std::vector<std::vector<Vec3>>& pred,
                       const std::vector<std::vector<Vec3>>& gt) {
  detail::require_same_shape(pred, gt);
  if (pred.empty()) throw std::invalid_argument("pa_mpjpe: empty input");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const RigidAlignment a = procrustes_align(pred[t], gt[t], true);
    for (std::size_t j = 0; j < pred[t].size(); ++j) {
      sum += (a.apply(pred[t][j]) - gt[t][j]).norm();
      ++n;
    }
  }
  return 1000.0 * sum / static_cast<double>(n);
}

struct SegmentError {
  std::size_t begin = 0;
  std::size_t end = 0;
  double wa_mm = 0.0;
  double w_mm = 0.0;
};

// Per-joint world-space error over non-overlapping 100-frame segments
// (trailing segment kept when >= 2 frames). WA aligns each predicted
// segment to ground truth with a rigid no-scale Procrustes over all
// segment joints; W aligns on the first two frames' joints only.
inline std::vector<SegmentError> wa_w_mpjpe_segments(
    const std::vector<std::vector<Vec3>>& pred,
    const std::vector<std::vector<Vec3>>& gt,
    std::size_t segment_len = 100) {
  detail::require_same_shape(pred, gt);
  const std::size_t T = pred.size();
  if (T < 2) throw std::invalid_argument("wa_w_mpjpe: need >= 2 frames");

  std::vector<SegmentError> out;
  for (std::size_t begin = 0; begin < T; begin += segment_len) {
    const std::size_t end = std::min(begin + segment_len, T);
    if (end - begin < 2) break;  // trailing sliver dropped

    const std::vector<Vec3> p_all = detail::flatten(pred, begin, end);
    const std::vector<Vec3> g_all = detail::flatten(gt, begin, end);
    const RigidAlignment wa = procrustes_align(p_all, g_all, false);
    const RigidAlignment w =
        procrustes_align(detail::flatten(pred, begin, begin + 2),
                         detail::flatten(gt, begin, begin + 2), false);

    SegmentError seg;
    seg.begin = begin;
    seg.end = end;
    double wa_sum = 0.0, w_sum = 0.0;
    for (std::size_t i = 0; i < p_all.size(); ++i) {
      wa_sum += (wa.apply(p_all[i]) - g_all[i]).norm();
      w_sum += (w.apply(p_all[i]) - g_all[i]).norm();
    }
    seg.wa_mm = 1000.0 * wa_sum / static_cast<double>(p_all.size());
    seg.w_mm = 1000.0 * w_sum / static_cast<double>(p_all.size());
    out.push_back(seg);
  }
  if (out.empty()) throw std::invalid_argument("wa_w_mpjpe: no usable segment");
  return out;
}

struct WaWResult {
  double wa_mm = 0.0;
  double w_mm = 0.0;
};

inline WaWResult wa_w_mpjpe_100(const std::vector<std::vector<Vec3>>& pred,
                                const std::vector<std::vector<Vec3>>& gt) {
  const auto segs = wa_w_mpjpe_segments(pred, gt);
  WaWResult r;
  for (const auto& s : segs) {
    r.wa_mm += s.wa_mm;
    r.w_mm += s.w_mm;
  }
  r.wa_mm /= static_cast<double>(segs.size());
  r.w_mm /= static_cast<double>(segs.size());
  return r;
}

// Root translation error at the final frame as a percentage of the
// ground-truth path length. Alignment: translate pred[0] onto gt[0] and
// rotate by the yaw that brings the horizontal direction of the first
// displacement into agreement (first-two-frame convention).
inline double rte(const std::vector<Vec3>& pred_root,
                  const std::vector<Vec3>& gt_root) {
  const std::size_t T = pred_root.size();
  if (T != gt_root.size() || T < 2)
    throw std::invalid_argument("rte: need matching lengths >= 2");

  double path = 0.0;
  for (std::size_t t = 0; t + 1 < T; ++t)
    path += (gt_root[t + 1] - gt_root[t]).norm();
  if (path <= 1e-6) throw std::invalid_argument("rte: near-zero ground-truth path");

  Mat3 G = Mat3::Identity();
  const Vec3 dp = pred_root[1] - pred_root[0];
  const Vec3 dg = gt_root[1] - gt_root[0];
  const Vec3 dp_xz(dp.x(), 0.0, dp.z());
  const Vec3 dg_xz(dg.x(), 0.0, dg.z());
  if (dp_xz.norm() > 1e-9 && dg_xz.norm() > 1e-9) {
    const double a_pred = std::atan2(dp_xz.x(), dp_xz.z());
    const double a_gt = std::atan2(dg_xz.x(), dg_xz.z());
    G = yaw_rotation(a_gt - a_pred);
  }
  const Vec3 aligned_last =
      G * (pred_root[T - 1] - pred_root[0]) + gt_root[0];
  return (aligned_last - gt_root[T - 1]).norm() / path * 100.0;
}

// Mean jerk magnitude over joints and frames via the third difference
// jerk[t] = (p[t+2] - 3 p[t+1] + 3 p[t] - p[t-1]) * fps^3, reported in
// units of 10 m/s^3.
inline double jitter(const std::vector<std::vector<Vec3>>& joints, double fps) {
  const std::size_t T = joints.size();
  if (T < 4) throw std::invalid_argument("jitter: need >= 4 frames");
  const double fps3 = fps * fps * fps;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 1; t + 2 < T; ++t) {
    for (std::size_t j = 0; j < joints[t].size(); ++j) {
      const Vec3 jerk = (joints[t + 2][j] - 3.0 * joints[t + 1][j] +
                         3.0 * joints[t][j] - joints[t - 1][j]) *
                        fps3;
      sum += jerk.norm();
      ++n;
    }
  }
  return sum / static_cast<double>(n) / 10.0;
}

// Mean horizontal (XZ-plane) displacement to the next frame over
// contact-labeled (frame, foot) pairs, in mm; 0 when nothing is labeled.
inline double foot_sliding(const std::vector<std::vector<Vec3>>& foot_positions,
                           const std::vector<std::vector<bool>>& contacts,
                           double /*fps*/ = 0.0) {
  if (foot_positions.size() != contacts.size())
    throw std::invalid_argument("foot_sliding: shape mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t + 1 < foot_positions.size(); ++t) {
    if (foot_positions[t].size() != contacts[t].size())
      throw std::invalid_argument("foot_sliding: shape mismatch");
    for (std::size_t f = 0; f < contacts[t].size(); ++f) {
      if (!contacts[t][f]) continue;
      const Vec3 d = foot_positions[t + 1][f] - foot_positions[t][f];
      sum += std::hypot(d.x(), d.z());
      ++n;
    }
  }
  return n == 0 ? 0.0 : 1000.0 * sum / static_cast<double>(n);
}

// Mean ||a_pred - a_gt|| over joints and valid frames, with
// a[t] = (p[t+1] - 2 p[t] + p[t-1]) * fps^2, in mm/s^2.
inline double accel_error(const std::vector<std::vector<Vec3>>& pred,
                          const std::vector<std::vector<Vec3>>& gt,
                          double fps) {
  detail::require_same_shape(pred, gt);
  const std::size_t T = pred.size();
  if (T < 3) throw std::invalid_argument("accel_error: need >= 3 frames");
  const double fps2 = fps * fps;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 1; t + 1 < T; ++t) {
    for (std::size_t j = 0; j < pred[t].size(); ++j) {
      const Vec3 ap = (pred[t + 1][j] - 2.0 * pred[t][j] + pred[t - 1][j]) * fps2;
      const Vec3 ag = (gt[t + 1][j] - 2.0 * gt[t][j] + gt[t - 1][j]) * fps2;
      sum += (ap - ag).norm();
      ++n;
    }
  }
  return 1000.0 * sum / static_cast<double>(n);
}

namespace detail {
// Foot columns are all joints after the root.
inline std::vector<std::vector<Vec3>> foot_tracks(
    const std::vector<std::vector<Vec3>>& joints) {
  std::vector<std::vector<Vec3>> out(joints.size());
  for (std::size_t t = 0; t < joints.size(); ++t)
    out[t].assign(joints[t].begin() + 1, joints[t].end());
  return out;
}
}  // namespace detail

// Every metric whose channels are present; the rest left unset.
inline MetricsReport evaluate_sequences(const MotionSequence& pred,
                                        const MotionSequence& gt) {
  pred.validate();
  gt.validate();
  if (pred.frames() != gt.frames())
    throw std::invalid_argument("evaluate_sequences: frame count mismatch");

  MetricsReport rep;
  const bool have_joints = !pred.joints.empty() && !gt.joints.empty();
  if (have_joints && pred.frames() >= 2) {
    const WaWResult ww = wa_w_mpjpe_100(pred.joints, gt.joints);
    rep.wa_mpjpe_100_mm = ww.wa_mm;
    rep.w_mpjpe_100_mm = ww.w_mm;
    rep.mpjpe_mm = mpjpe(pred.joints, gt.joints);
    rep.pa_mpjpe_mm = pa_mpjpe(pred.joints, gt.joints);
    if (pred.frames() >= 4) rep.jitter_10mps3 = jitter(pred.joints, pred.fps);
    if (pred.frames() >= 3)
      rep.accel_mm_s2 = accel_error(pred.joints, gt.joints, pred.fps);
  }
  if (pred.frames() >= 2) {
    double path = 0.0;
    for (std::size_t t = 0; t + 1 < gt.frames(); ++t)
      path += (gt.positions[t + 1] - gt.positions[t]).norm();
    if (path > 1e-6) rep.rte_percent = rte(pred.positions, gt.positions);
  }
  if (have_joints && !pred.contacts.empty() && pred.joints[0].size() >= 2) {
    rep.foot_sliding_mm = foot_sliding(detail::foot_tracks(pred.joints),
                                       pred.contacts, pred.fps);
  }
  return rep;
}

}  // namespace headtraj
