#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "headtraj/losses.hpp"
#include "headtraj/trajectory.hpp"

// Deterministic synthetic scene generator: ground-truth camera and human
// MotionSequences with a minimal 3-joint skeleton (root + two feet), plus
// noise injection emulating estimation error. Ground plane is y = 0 with
// +Y pointing down, so heights above ground are negative y.

namespace headtraj {

enum class HumanPath { kStationary, kLine, kCircle, kFigureEight };
enum class CameraRig { kStatic, kOrbit, kFollow, kHandheld };

struct SceneConfig {
  std::size_t frames = 120;
  double fps = 30.0;

  HumanPath path = HumanPath::kLine;
  double speed = 1.2;    // m/s along the path
  double radius = 3.0;   // m, circle/figure-eight extent

  CameraRig rig = CameraRig::kFollow;
  double cam_radius = 6.0;        // m, orbit radius
  double cam_angular_rate = 0.5;  // rad/s, orbit rate
  double handheld_amplitude = 0.05;  // rad, wobble amplitude

  // Nominal gait; actual stride follows from path speed and cadence so the
  // feet stay attached to the root path.
  double step_length = 0.5;  // m
  double cadence = 2.0;      // steps/s

  void validate() const {
    if (frames < 2) throw std::invalid_argument("SceneConfig: frames must be >= 2");
    if (!(fps > 0.0)) throw std::invalid_argument("SceneConfig: fps must be > 0");
    if (path != HumanPath::kStationary && !(speed > 0.0))
      throw std::invalid_argument("SceneConfig: speed must be > 0");
    if (!(radius > 0.0) || !(cam_radius > 0.0) || !(step_length > 0.0) ||
        !(cadence > 0.0))
      throw std::invalid_argument("SceneConfig: dimensional parameters must be > 0");
    if (handheld_amplitude < 0.0)
      throw std::invalid_argument("SceneConfig: handheld amplitude must be >= 0");
  }
};

struct NoiseModel {
  double rp_noise_rad = 0.0;
  double vel_noise_mpf = 0.0;
  double ang_vel_noise_rad = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (rp_noise_rad < 0.0 || vel_noise_mpf < 0.0 || ang_vel_noise_rad < 0.0)
      throw std::invalid_argument("NoiseModel: stds must be >= 0");
  }
};

struct Scene {
  MotionSequence camera;
  MotionSequence human;  // joints: root, left foot, right foot
};

// What a trained estimator would output for one sequence, plus the
// pass-through channels needed to rebuild full world motion.
struct Observations {
  double fps = 30.0;
  std::vector<Mat3> rp_seq;                     // length T
  std::vector<Mat3> body_ang_vel_seq;           // length T-1
  std::vector<Vec3> cam_local_v;                // length T-1
  std::vector<Vec3> human_local_v;              // length T-1
  std::vector<Mat3> r_hc_seq;                   // length T
  std::vector<std::vector<Vec3>> joints_local;  // T x J, root-frame offsets
  // Ground-truth frame-0 anchor; reconstruction may ignore it and use the
  // identity initial heading instead.
  Mat3 initial_yaw = Mat3::Identity();
  Vec3 t0_human = Vec3::Zero();
  Vec3 t0_camera = Vec3::Zero();
};

namespace sim_detail {

inline constexpr double kRootHeight = 0.9;   // m above ground
inline constexpr double kCamHeight = 1.5;    // m above ground
inline constexpr double kFootLift = 0.05;    // m swing apex
inline constexpr double kStanceWidth = 0.1;  // m lateral foot offset
inline constexpr double kFollowDistance = 2.5;  // m behind the root

// Horizontal root position and path tangent at time t (seconds). The
// vertical coordinate is fixed at -kRootHeight.
inline void root_path(const SceneConfig& cfg, double t, Vec3* pos, Vec3* tangent) {
  switch (cfg.path) {
    case HumanPath::kStationary:
      *pos = Vec3(0.0, -kRootHeight, 0.0);
      *tangent = Vec3(0.0, 0.0, 1.0);
      return;
    case HumanPath::kLine:
      *pos = Vec3(0.0, -kRootHeight, cfg.speed * t);
      *tangent = Vec3(0.0, 0.0, 1.0);
      return;
    case HumanPath::kCircle: {
      const double phi = cfg.speed * t / cfg.radius;
      *pos = Vec3(cfg.radius * std::cos(phi), -kRootHeight,
                  cfg.radius * std::sin(phi));
      *tangent = Vec3(-std::sin(phi), 0.0, std::cos(phi));
      return;
    }
    case HumanPath::kFigureEight: {
      const double phi = cfg.speed * t / cfg.radius;
      *pos = Vec3(0.5 * cfg.radius * std::sin(2.0 * phi), -kRootHeight,
                  cfg.radius * std::sin(phi));
      *tangent =
          Vec3(std::cos(2.0 * phi), 0.0, std::cos(phi)).normalized();
      return;
    }
  }
  throw std::invalid_argument("unknown human path");
}

// Pure yaw whose forward column is the horizontal direction f.
inline Mat3 yaw_facing(const Vec3& f_horizontal) {
  Vec3 f(f_horizontal.x(), 0.0, f_horizontal.z());
  if (f.norm() < 1e-12) return Mat3::Identity();
  f.normalize();
  Mat3 R;
  R.col(0) = unit_y().cross(f).normalized();
  R.col(1) = unit_y();
  R.col(2) = f;
  return R;
}

// Look-at orientation: +Z toward the target, up consistent with Y-down.
inline Mat3 look_at(const Vec3& pos, const Vec3& target) {
  const Vec3 f = (target - pos).normalized();
  Vec3 r = unit_y().cross(f);
  if (r.norm() < 1e-9) r = unit_x();  // looking straight up/down
  r.normalize();
  Mat3 R;
  R.col(0) = r;
  R.col(1) = f.cross(r);
  R.col(2) = f;
  return R;
}

// Stance phases are snapped to whole frames: each foot alternates
// stance_frames of zero motion with stance_frames of swing, so contact
// labeling recovers the schedule exactly on noiseless scenes.
struct Gait {
  long stance_frames;
  long cycle;

  explicit Gait(const SceneConfig& cfg)
      : stance_frames(std::max<long>(1, std::lround(cfg.fps / cfg.cadence))),
        cycle(2 * stance_frames) {}

  bool in_stance(long frame, long phase) const {
    long c = (frame + phase) % cycle;
    if (c < 0) c += cycle;
    return c < stance_frames;
  }

  // Stance anchor of the cycle containing (frame + phase): the root path
  // point at mid-stance, dropped to the ground, pushed sideways.
  Vec3 anchor(const SceneConfig& cfg, long frame, long phase, double side) const {
    long shifted = frame + phase;
    long k = shifted >= 0 ? shifted / cycle : -((-shifted + cycle - 1) / cycle);
    const double mid = static_cast<double>(k * cycle - phase) +
                       0.5 * static_cast<double>(stance_frames - 1);
    Vec3 pos, tangent;
    root_path(cfg, mid / cfg.fps, &pos, &tangent);
    const Vec3 right = unit_y().cross(Vec3(tangent.x(), 0.0, tangent.z()))
                           .normalized();
    return Vec3(pos.x(), 0.0, pos.z()) + side * kStanceWidth * right;
  }

  Vec3 foot_position(const SceneConfig& cfg, long frame, long phase,
                     double side) const {
    if (cfg.path == HumanPath::kStationary)
      return anchor(cfg, 0, phase, side);
    if (in_stance(frame, phase)) return anchor(cfg, frame, phase, side);
    long c = (frame + phase) % cycle;
    if (c < 0) c += cycle;
    const long j = c - stance_frames;  // 0 .. stance_frames-1 within swing
    const double u = static_cast<double>(j + 1) /
                     static_cast<double>(stance_frames + 1);
    const Vec3 from = anchor(cfg, frame - c, phase, side);
    const Vec3 to = anchor(cfg, frame - c + cycle, phase, side);
    Vec3 p = (1.0 - u) * from + u * to;
    p.y() = -kFootLift * std::sin(M_PI * u);
    return p;
  }
};

inline Mat3 handheld_wobble(const SceneConfig& cfg, double t, double phase_x,
                            double phase_z) {
  const double a = cfg.handheld_amplitude;
  return from_axis_angle(unit_x(), a * std::sin(2.0 * M_PI * 0.9 * t + phase_x)) *
         from_axis_angle(unit_z(), a * std::sin(2.0 * M_PI * 1.3 * t + phase_z));
}

inline Mat3 random_small_rotation(std::mt19937_64& rng, double std_rad) {
  if (std_rad <= 0.0) return Mat3::Identity();
  std::normal_distribution<double> angle_dist(0.0, std_rad);
  std::normal_distribution<double> unit(0.0, 1.0);
  Vec3 axis(unit(rng), unit(rng), unit(rng));
  while (axis.norm() < 1e-9) axis = Vec3(unit(rng), unit(rng), unit(rng));
  return from_axis_angle(axis.normalized(), angle_dist(rng));
}

}  // namespace sim_detail

inline Scene generate_scene(const SceneConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);
  const double wobble_phase_x = phase_dist(rng);
  const double wobble_phase_z = phase_dist(rng);

  const std::size_t T = cfg.frames;
  const sim_detail::Gait gait(cfg);

  Scene scene;
  scene.human.fps = cfg.fps;
  scene.camera.fps = cfg.fps;

  Vec3 root0, tangent0;
  sim_detail::root_path(cfg, 0.0, &root0, &tangent0);

  for (std::size_t n = 0; n < T; ++n) {
    const double t = static_cast<double>(n) / cfg.fps;
    Vec3 root, tangent;
    sim_detail::root_path(cfg, t, &root, &tangent);
    const Mat3 R_h = cfg.path == HumanPath::kStationary
                         ? Mat3::Identity()
                         : sim_detail::yaw_facing(tangent);
    scene.human.positions.push_back(root);
    scene.human.rotations.push_back(R_h);

    const Vec3 lf = gait.foot_position(cfg, static_cast<long>(n), 0, -1.0);
    const Vec3 rf = gait.foot_position(cfg, static_cast<long>(n),
                                       gait.stance_frames, 1.0);
    scene.human.joints.push_back({root, lf, rf});

    Vec3 cam_pos;
    switch (cfg.rig) {
      case CameraRig::kStatic:
        cam_pos = root0 + Vec3(0.0, sim_detail::kRootHeight -
                                        sim_detail::kCamHeight, -3.0);
        break;
      case CameraRig::kOrbit: {
        const double phi = cfg.cam_angular_rate * t;
        cam_pos = Vec3(cfg.cam_radius * std::cos(phi),
                       -sim_detail::kCamHeight,
                       cfg.cam_radius * std::sin(phi));
        break;
      }
      case CameraRig::kFollow:
      case CameraRig::kHandheld: {
        Vec3 back(tangent.x(), 0.0, tangent.z());
        back = back.norm() < 1e-12 ? Vec3(0.0, 0.0, 1.0) : back.normalized();
        cam_pos = root - sim_detail::kFollowDistance * back;
        cam_pos.y() = -sim_detail::kCamHeight;
        break;
      }
      default:
        throw std::invalid_argument("unknown camera rig");
    }
    const Vec3 target = cfg.rig == CameraRig::kStatic ? root0 : root;
    Mat3 cam_R = sim_detail::look_at(cam_pos, target);
    if (cfg.rig == CameraRig::kHandheld) {
      cam_R = cam_R * sim_detail::handheld_wobble(cfg, t, wobble_phase_x,
                                                  wobble_phase_z);
    }
    scene.camera.positions.push_back(cam_pos);
    scene.camera.rotations.push_back(cam_R);
  }

  scene.human.local_velocities =
      differentiate_trajectory(scene.human.positions, scene.human.rotations);
  scene.camera.local_velocities =
      differentiate_trajectory(scene.camera.positions, scene.camera.rotations);

  std::vector<std::vector<Vec3>> feet(T);
  for (std::size_t n = 0; n < T; ++n)
    feet[n] = {scene.human.joints[n][1], scene.human.joints[n][2]};
  scene.human.contacts = generate_contact_labels(feet, cfg.fps);

  scene.human.validate();
  scene.camera.validate();
  return scene;
}

// Ground-truth factors plus injected noise. Zero noise reproduces the
// exact factors the reconstruction pipeline inverts.
inline Observations perturb(const Scene& scene, const NoiseModel& noise,
                            const HeadingConfig& cfg = {}) {
  noise.validate();
  const std::size_t T = scene.camera.frames();
  if (T < 2) throw std::invalid_argument("perturb: need >= 2 frames");

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> vel_noise(0.0, 1.0);
  const auto jiggle = [&](const Vec3& v) {
    if (noise.vel_noise_mpf <= 0.0) return v;
    return Vec3(v.x() + noise.vel_noise_mpf * vel_noise(rng),
                v.y() + noise.vel_noise_mpf * vel_noise(rng),
                v.z() + noise.vel_noise_mpf * vel_noise(rng));
  };

  Observations obs;
  obs.fps = scene.camera.fps;
  for (std::size_t t = 0; t < T; ++t) {
    const Mat3 rp = decompose_heading(scene.camera.rotations[t], cfg).rp;
    obs.rp_seq.push_back(
        rp * sim_detail::random_small_rotation(rng, noise.rp_noise_rad));
    obs.r_hc_seq.push_back(scene.camera.rotations[t].transpose() *
                           scene.human.rotations[t]);
    if (!scene.human.joints.empty()) {
      std::vector<Vec3> local;
      for (const Vec3& p : scene.human.joints[t])
        local.push_back(scene.human.rotations[t].transpose() *
                        (p - scene.human.positions[t]));
      obs.joints_local.push_back(std::move(local));
    }
  }
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const Mat3 dRb = body_angular_velocity(scene.camera.rotations[t],
                                           scene.camera.rotations[t + 1]);
    obs.body_ang_vel_seq.push_back(
        dRb * sim_detail::random_small_rotation(rng, noise.ang_vel_noise_rad));
    obs.cam_local_v.push_back(jiggle(scene.camera.local_velocities[t]));
    obs.human_local_v.push_back(jiggle(scene.human.local_velocities[t]));
  }
  obs.initial_yaw = decompose_heading(scene.camera.rotations[0], cfg).yaw;
  obs.t0_human = scene.human.positions[0];
  obs.t0_camera = scene.camera.positions[0];
  return obs;
}

}  // namespace headtraj
