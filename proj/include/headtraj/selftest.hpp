#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "headtraj/heading.hpp"
#include "headtraj/losses.hpp"
#include "headtraj/metrics.hpp"
#include "headtraj/simulator.hpp"
#include "headtraj/solver.hpp"
#include "headtraj/trajectory.hpp"

// Release-gate invariant suite, run by `headtraj selftest`. All checks use
// fixed seeds and reduced sample counts so a full run stays fast and the
// printed output is identical across runs.

namespace headtraj::selftest {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline Mat3 random_rotation_bounded_pitch(std::mt19937_64& rng,
                                          double pitch_margin = 0.05) {
  std::uniform_real_distribution<double> full(-M_PI, M_PI);
  std::uniform_real_distribution<double> pitch(-M_PI / 2 + pitch_margin,
                                               M_PI / 2 - pitch_margin);
  return yaw_rotation(full(rng)) * from_axis_angle(unit_x(), pitch(rng)) *
         from_axis_angle(unit_z(), full(rng));
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(0.0, M_PI);
  Vec3 axis(u(rng), u(rng), u(rng));
  while (axis.norm() < 1e-6) axis = Vec3(u(rng), u(rng), u(rng));
  return from_axis_angle(axis.normalized(), ang(rng));
}

// Smooth camera orientation track with pitch bounded away from the
// degeneracy, built from sinusoidal yaw/pitch/roll angle trajectories.
inline std::vector<Mat3> smooth_camera_sequence(std::mt19937_64& rng,
                                                std::size_t frames) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> amp(0.2, 1.0);
  const double py = phase(rng), pp = phase(rng), pr = phase(rng);
  const double ay = amp(rng) * 2.0, ap = amp(rng), ar = amp(rng);
  std::vector<Mat3> out;
  out.reserve(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const double s = static_cast<double>(t) * 0.05;
    const double yaw = ay * std::sin(s + py);
    const double pitch = std::clamp(ap * std::sin(0.7 * s + pp), -1.3, 1.3);
    const double roll = ar * std::sin(1.3 * s + pr);
    out.push_back(yaw_rotation(yaw) * from_axis_angle(unit_x(), pitch) *
                  from_axis_angle(unit_z(), roll));
  }
  return out;
}

}  // namespace detail

using Check = std::function<CheckResult()>;

inline CheckResult make_result(const std::string& name, bool pass,
                               const std::string& detail = "") {
  return {name, pass, detail};
}

inline CheckResult check_heading_config() {
  const HeadingConfig cfg = default_heading_config();
  return make_result("heading-config-epsilon-positive", cfg.epsilon > 0.0,
                     cfg.epsilon > 0.0 ? "" : "epsilon override is not positive");
}

inline CheckResult check_orthonormalize_idempotent() {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const Mat3 R = detail::random_rotation(rng);
    if ((orthonormalize(R) - R).norm() > 1e-12)
      return make_result("so3-orthonormalize-idempotent", false);
  }
  return make_result("so3-orthonormalize-idempotent", true);
}

inline CheckResult check_conjugation_identity() {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 R_t = detail::random_rotation(rng);
    const Mat3 R_n = detail::random_rotation(rng);
    const Mat3 lhs =
        body_to_world_velocity(body_angular_velocity(R_t, R_n), R_t);
    if ((lhs - R_n * R_t.transpose()).norm() > 1e-12)
      return make_result("so3-conjugation-identity", false);
  }
  return make_result("so3-conjugation-identity", true);
}

inline CheckResult check_heading_roundtrip() {
  const HeadingConfig cfg = default_heading_config();
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 R = detail::random_rotation_bounded_pitch(rng);
    const HeadingDecomp d = decompose_heading(R, cfg);
    if ((d.yaw * d.rp - R).norm() > 1e-9 ||
        (d.yaw * unit_y() - unit_y()).norm() > 1e-9 ||
        geodesic_distance(decompose_heading(d.rp, cfg).yaw, Mat3::Identity()) > 1e-9)
      return make_result("heading-roundtrip", false);
  }
  return make_result("heading-roundtrip", true);
}

inline CheckResult check_heading_invariance() {
  const HeadingConfig cfg = default_heading_config();
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const auto seq = detail::smooth_camera_sequence(rng, 60);
    const Mat3 G = yaw_rotation(std::uniform_real_distribution<double>(
        -M_PI, M_PI)(rng));
    std::vector<Mat3> yawed;
    for (const Mat3& R : seq) yawed.push_back(G * R);
    const SequenceDecomp a = decompose_sequence(seq, cfg);
    const SequenceDecomp b = decompose_sequence(yawed, cfg);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if ((a.rp[t] - b.rp[t]).norm() > 1e-9)
        return make_result("heading-invariance", false, "rp changed");
      if ((G * a.yaw[t] - b.yaw[t]).norm() > 1e-9)
        return make_result("heading-invariance", false, "yaw not equivariant");
      if (t + 1 < seq.size() && (a.dyaw[t] - b.dyaw[t]).norm() > 1e-9)
        return make_result("heading-invariance", false, "dyaw changed");
    }
  }
  return make_result("heading-invariance", true);
}

inline CheckResult check_degenerate_continuity() {
  const HeadingConfig cfg = default_heading_config();
  for (int i = 0; i <= 200; ++i) {
    const double pitch =
        -(M_PI / 2 - 1e-4) + (M_PI - 2e-4) * static_cast<double>(i) / 200.0;
    const HeadingDecomp d =
        decompose_heading(from_axis_angle(unit_x(), pitch), cfg);
    if (!is_rotation(d.yaw, 1e-6) || !is_rotation(d.rp, 1e-6) ||
        !d.yaw.allFinite() || !d.rp.allFinite())
      return make_result("heading-degenerate-finite", false);
  }
  return make_result("heading-degenerate-finite", true);
}

inline CheckResult check_trajectory_inverse_pair() {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Mat3> rots;
    std::vector<Vec3> pos;
    for (int t = 0; t < 20; ++t) {
      rots.push_back(detail::random_rotation(rng));
      pos.push_back(Vec3(n(rng), n(rng), n(rng)));
    }
    const auto vel = differentiate_trajectory(pos, rots);
    const auto back = integrate_trajectory(pos[0], rots, vel);
    for (std::size_t t = 0; t < pos.size(); ++t)
      if ((back[t] - pos[t]).norm() > 1e-12)
        return make_result("trajectory-inverse-pair", false);
  }
  return make_result("trajectory-inverse-pair", true);
}

inline CheckResult check_teacher_forcing_zero() {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<Mat3> rots;
  std::vector<Vec3> vel;
  for (int t = 0; t < 30; ++t) rots.push_back(detail::random_rotation(rng));
  for (int t = 0; t < 29; ++t) vel.push_back(Vec3(n(rng), n(rng), n(rng)));
  const auto t_gt = integrate_trajectory(Vec3::Zero(), rots, vel);
  const double zero = teacher_forcing_traj_loss(vel, rots, vel, rots, t_gt);
  auto vel2 = vel;
  vel2[5] += Vec3(0.0, 0.0, 0.01);
  const double nonzero = teacher_forcing_traj_loss(vel2, rots, vel, rots, t_gt);
  return make_result("teacher-forcing-zero-iff", zero < 1e-12 && nonzero > 1e-6);
}

inline CheckResult check_contact_threshold() {
  const double fps = 30.0;
  std::vector<std::vector<Vec3>> feet;
  for (int t = 0; t < 10; ++t) {
    const double s = static_cast<double>(t);
    feet.push_back({Vec3(0, 0, 0), Vec3(0, 0, s * 0.2 / fps)});
  }
  const auto labels = generate_contact_labels(feet, fps);
  for (const auto& row : labels)
    if (!(row[0] && !row[1])) return make_result("contact-threshold", false);

  // Exact boundary: fps = 1 and a dyadic threshold whose square root
  // round-trips exactly, so strict less-than is what decides the label.
  const std::vector<std::vector<Vec3>> edge = {{Vec3::Zero()},
                                               {Vec3(0, 0, 0.25)}};
  const auto at = generate_contact_labels(edge, 1.0, 0.25);
  return make_result("contact-threshold", !at[0][0] && !at[1][0]);
}

inline CheckResult check_metrics_zero_on_identity() {
  const SceneConfig cfg;
  const Scene scene = generate_scene(cfg, 3);
  const MetricsReport rep = evaluate_sequences(scene.human, scene.human);
  const bool ok = rep.wa_mpjpe_100_mm && *rep.wa_mpjpe_100_mm < 1e-9 &&
                  rep.w_mpjpe_100_mm && *rep.w_mpjpe_100_mm < 1e-9 &&
                  rep.rte_percent && *rep.rte_percent < 1e-9 &&
                  rep.accel_mm_s2 && *rep.accel_mm_s2 < 1e-9;
  return make_result("metrics-zero-on-self", ok);
}

inline CheckResult check_procrustes_recovery() {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> P;
    for (int i = 0; i < 8; ++i) P.push_back(Vec3(n(rng), n(rng), n(rng)));
    const Mat3 R = detail::random_rotation(rng);
    const Vec3 t(n(rng), n(rng), n(rng));
    const double s = 0.5 + std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    std::vector<Vec3> Q;
    for (const Vec3& p : P) Q.push_back(s * (R * p) + t);
    const RigidAlignment a = procrustes_align(P, Q, true);
    if ((a.rotation - R).norm() > 1e-9 || std::abs(a.scale - s) > 1e-9 ||
        (a.translation - t).norm() > 1e-8)
      return make_result("procrustes-recovery", false);
  }
  return make_result("procrustes-recovery", true);
}

inline CheckResult check_scene_self_consistency() {
  for (std::uint64_t seed : {1ull, 2ull}) {
    SceneConfig cfg;
    cfg.path = HumanPath::kCircle;
    cfg.rig = CameraRig::kOrbit;
    const Scene scene = generate_scene(cfg, seed);
    const auto back = integrate_trajectory(scene.human.positions[0],
                                           scene.human.rotations,
                                           scene.human.local_velocities);
    for (std::size_t t = 0; t < back.size(); ++t)
      if ((back[t] - scene.human.positions[t]).norm() > 1e-12)
        return make_result("scene-eq6-consistency", false);
  }
  return make_result("scene-eq6-consistency", true);
}

inline CheckResult check_scene_determinism() {
  SceneConfig cfg;
  cfg.rig = CameraRig::kHandheld;
  const Scene a = generate_scene(cfg, 42);
  const Scene b = generate_scene(cfg, 42);
  for (std::size_t t = 0; t < a.camera.frames(); ++t) {
    if (a.camera.rotations[t] != b.camera.rotations[t] ||
        a.human.positions[t] != b.human.positions[t])
      return make_result("scene-determinism", false);
  }
  return make_result("scene-determinism", true);
}

inline CheckResult check_noiseless_roundtrip() {
  const HeadingConfig hcfg = default_heading_config();
  SceneConfig cfg;
  cfg.path = HumanPath::kCircle;
  cfg.rig = CameraRig::kFollow;
  const Scene scene = generate_scene(cfg, 5);
  const Observations obs = perturb(scene, NoiseModel{}, hcfg);
  const WorldMotion rec = reconstruct_world_motion_from_factors(
      obs.body_ang_vel_seq, obs.cam_local_v, obs.rp_seq, obs.r_hc_seq,
      obs.human_local_v, obs.t0_human, obs.t0_camera, obs.initial_yaw,
      obs.fps, hcfg);
  for (std::size_t t = 0; t < scene.human.frames(); ++t) {
    if ((rec.human.positions[t] - scene.human.positions[t]).norm() > 1e-6 ||
        geodesic_distance(rec.human.rotations[t], scene.human.rotations[t]) > 1e-6)
      return make_result("noiseless-roundtrip", false);
  }
  return make_result("noiseless-roundtrip", true);
}

inline CheckResult check_solver_fixed_point() {
  const HeadingConfig hcfg = default_heading_config();
  SceneConfig cfg;
  cfg.frames = 30;
  cfg.path = HumanPath::kLine;
  cfg.rig = CameraRig::kFollow;
  const Scene scene = generate_scene(cfg, 9);
  const Observations obs = perturb(scene, NoiseModel{}, hcfg);
  SolverConfig scfg;
  scfg.max_iters = 5;
  const SolverState st = fit(obs, scene, scfg, LossWeights{}, hcfg);
  for (double prev = st.loss_history.front(); const double l : st.loss_history) {
    if (l > prev) return make_result("solver-fixed-point", false, "loss increased");
    prev = l;
  }
  for (std::size_t t = 0; t < obs.rp_seq.size(); ++t) {
    if ((st.rp_params[t] - rp_angles(obs.rp_seq[t])).norm() > 1e-9)
      return make_result("solver-fixed-point", false, "parameters drifted");
  }
  return make_result("solver-fixed-point", true);
}

inline std::vector<CheckResult> run_all() {
  const std::vector<Check> checks = {
      check_heading_config,
      check_orthonormalize_idempotent,
      check_conjugation_identity,
      check_heading_roundtrip,
      check_heading_invariance,
      check_degenerate_continuity,
      check_trajectory_inverse_pair,
      check_teacher_forcing_zero,
      check_contact_threshold,
      check_metrics_zero_on_identity,
      check_procrustes_recovery,
      check_scene_self_consistency,
      check_scene_determinism,
      check_noiseless_roundtrip,
      check_solver_fixed_point,
  };
  std::vector<CheckResult> results;
  for (const Check& c : checks) {
    try {
      results.push_back(c());
    } catch (const std::exception& e) {
      results.push_back({"(exception)", false, e.what()});
    }
  }
  return results;
}

}  // namespace headtraj::selftest
