#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "headtraj/losses.hpp"
#include "headtraj/simulator.hpp"
#include "headtraj/trajectory.hpp"

// Desk-scale inverse problem: recover per-frame camera roll-pitch and
// local velocities from noisy observations by minimizing the trajectory
// losses, with ground-truth trajectories as supervision.

namespace headtraj {

struct SolverConfig {
  std::size_t max_iters = 1000;
  double step_init = 0.5;
  // Also acts as a smoothing radius: the L1 trajectory terms are kinked
  // wherever a per-frame error crosses zero, and central differences with
  // h well above the kink scale average the one-sided slopes instead of
  // returning spurious unit-magnitude components.
  double fd_step = 2e-3;
  double tol = 1e-8;         // relative loss decrease stop criterion
  double data_weight = 0.1;  // fidelity-to-observations prior

  void validate() const {
    if (max_iters == 0 || !(step_init > 0.0) || !(fd_step > 0.0) ||
        !(tol > 0.0) || data_weight < 0.0)
      throw std::invalid_argument("SolverConfig: invalid parameters");
  }
};

struct SolverState {
  // Per-frame (pitch about X, roll about Z), composed rp = Rx(pitch) Rz(roll).
  // The chart is exact for any yaw-free rotation with |pitch| < pi/2 and
  // never produces a yaw component.
  std::vector<Eigen::Vector2d> rp_params;  // length T
  std::vector<Vec3> velocities;            // camera local velocities, length T-1
  std::vector<double> loss_history;
};

inline Mat3 rp_from_angles(double pitch, double roll) {
  return from_axis_angle(unit_x(), pitch) * from_axis_angle(unit_z(), roll);
}

// Inverse of rp_from_angles; for a general rotation this projects onto the
// chart (exact when the input is yaw-free).
inline Eigen::Vector2d rp_angles(const Mat3& rp) {
  const Vec3 f = rp * unit_z();
  const double pitch = std::atan2(-f.y(), f.z());
  const Mat3 Q = from_axis_angle(unit_x(), pitch).transpose() * rp;
  const double roll = std::atan2(Q(1, 0), Q(0, 0));
  return {pitch, roll};
}

// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("finite_difference_gradient: h must be > 0");
  std::vector<double> grad(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::invalid_argument(
          "finite_difference_gradient: objective not finite");
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

namespace solver_detail {

inline std::vector<double> pack(const SolverState& s) {
  std::vector<double> x;
  x.reserve(2 * s.rp_params.size() + 3 * s.velocities.size());
  for (const auto& a : s.rp_params) {
    x.push_back(a.x());
    x.push_back(a.y());
  }
  for (const auto& v : s.velocities) {
    x.push_back(v.x());
    x.push_back(v.y());
    x.push_back(v.z());
  }
  return x;
}

inline void unpack(const std::vector<double>& x, std::size_t T, SolverState* s) {
  s->rp_params.resize(T);
  s->velocities.resize(T - 1);
  std::size_t i = 0;
  for (std::size_t t = 0; t < T; ++t, i += 2)
    s->rp_params[t] = {x[i], x[i + 1]};
  for (std::size_t t = 0; t + 1 < T; ++t, i += 3)
    s->velocities[t] = {x[i], x[i + 1], x[i + 2]};
}

}  // namespace solver_detail

// Eq.-7-shaped objective: teacher-forcing trajectory losses for human and
// camera, plus a data-fidelity term tying the state to the observations.
// Camera orientations are rebuilt from the state's roll-pitch chart via
// the heading pipeline, anchored at the supervision's initial yaw.
inline double objective(const SolverState& state, const Observations& obs,
                        const Scene& gt, const LossWeights& w,
                        double data_weight, const HeadingConfig& cfg = {}) {
  w.validate();
  const std::size_t T = gt.camera.frames();
  if (state.rp_params.size() != T || state.velocities.size() != T - 1 ||
      obs.rp_seq.size() != T)
    throw std::invalid_argument("objective: length mismatch");

  std::vector<Mat3> rp(T);
  for (std::size_t t = 0; t < T; ++t)
    rp[t] = rp_from_angles(state.rp_params[t].x(), state.rp_params[t].y());

  const Mat3 yaw0 = decompose_heading(gt.camera.rotations[0], cfg).yaw;
  const WorldMotion rebuilt = reconstruct_world_motion_from_factors(
      obs.body_ang_vel_seq, state.velocities, rp, obs.r_hc_seq,
      obs.human_local_v, obs.t0_human, obs.t0_camera, yaw0, obs.fps, cfg);

  const double traj_cam = teacher_forcing_traj_loss(
      state.velocities, rebuilt.camera.rotations, gt.camera.local_velocities,
      gt.camera.rotations, gt.camera.positions);
  const double traj_h = teacher_forcing_traj_loss(
      obs.human_local_v, rebuilt.human.rotations, gt.human.local_velocities,
      gt.human.rotations, gt.human.positions);

  double data = 0.0;
  if (data_weight > 0.0) {
    PredictionVector pred, meas;
    for (std::size_t t = 0; t < T; ++t) {
      const Eigen::Vector2d a = rp_angles(obs.rp_seq[t]);
      pred.values.push_back(state.rp_params[t].x());
      pred.values.push_back(state.rp_params[t].y());
      meas.values.push_back(a.x());
      meas.values.push_back(a.y());
    }
    for (std::size_t t = 0; t + 1 < T; ++t) {
      for (int k = 0; k < 3; ++k) {
        pred.values.push_back(state.velocities[t](k));
        meas.values.push_back(obs.cam_local_v[t](k));
      }
    }
    pred.mask.assign(pred.values.size(), true);
    meas.mask.assign(meas.values.size(), true);
    data = simple_loss(pred, meas);
  }

  return w.lambda_h * traj_h + w.lambda_cam * traj_cam + data_weight * data;
}

inline constexpr std::size_t kMaxSolverFrames = 512;

// Finite-difference descent with backtracking line search, accelerated by
// Nesterov-style momentum. Steps are only accepted when the objective
// decreases, so loss_history is non-increasing; when a momentum step fails
// the line search, the momentum resets and a plain gradient step is
// retried. Plain descent alone crawls here: the heading integration makes
// the objective badly conditioned (an early roll-pitch frame rotates the
// whole remaining trajectory).
inline SolverState fit(const Observations& obs, const Scene& supervision,
                       const SolverConfig& cfg, const LossWeights& w,
                       const HeadingConfig& hcfg = {}) {
  cfg.validate();
  const std::size_t T = supervision.camera.frames();
  if (T < 2 || T > kMaxSolverFrames)
    throw std::invalid_argument("fit: sequence length must be in [2, 512]");
  if (obs.rp_seq.size() != T)
    throw std::invalid_argument("fit: observation/supervision length mismatch");

  SolverState state;
  state.rp_params.reserve(T);
  for (const Mat3& rp : obs.rp_seq) state.rp_params.push_back(rp_angles(rp));
  state.velocities = obs.cam_local_v;

  const auto eval = [&](const std::vector<double>& x) {
    SolverState s;
    solver_detail::unpack(x, T, &s);
    return objective(s, obs, supervision, w, cfg.data_weight, hcfg);
  };

  std::vector<double> x = solver_detail::pack(state);
  std::vector<double> x_prev = x;
  double loss = eval(x);
  state.loss_history.push_back(loss);

  double beta = 0.0;
  std::size_t momentum_age = 0;
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    if (loss < 1e-12) break;  // already at the global minimum

    std::vector<double> probe(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      probe[i] = x[i] + beta * (x[i] - x_prev[i]);
    const std::vector<double> grad =
        finite_difference_gradient(eval, probe, cfg.fd_step);

    double step = cfg.step_init;
    bool accepted = false;
    std::vector<double> trial(x.size());
    for (int halving = 0; halving < 20; ++halving) {
      for (std::size_t i = 0; i < x.size(); ++i)
        trial[i] = probe[i] - step * grad[i];
      const double trial_loss = eval(trial);
      if (trial_loss < loss) {
        x_prev = x;
        x = trial;
        loss = trial_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (beta > 0.0) {  // retry from a momentum-free step
        beta = 0.0;
        momentum_age = 0;
        continue;
      }
      if (iter == 0)
        throw std::runtime_error("fit: objective not locally decreasable");
      break;
    }
    const bool plain_step = beta == 0.0;
    ++momentum_age;
    beta = static_cast<double>(momentum_age) /
           static_cast<double>(momentum_age + 3);

    const double prev = state.loss_history.back();
    state.loss_history.push_back(loss);
    // The tol stop only fires on momentum-free steps; a rebuilding
    // momentum phase legitimately produces tiny early decreases.
    if (plain_step && prev > 0.0 && (prev - loss) / prev < cfg.tol) break;
  }

  solver_detail::unpack(x, T, &state);
  return state;
}

}  // namespace headtraj
