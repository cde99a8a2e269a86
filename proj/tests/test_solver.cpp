#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "headtraj/metrics.hpp"
#include "headtraj/solver.hpp"
#include "test_util.hpp"

using namespace headtraj;

TEST_CASE("rp chart round-trips yaw-free rotations") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 500; ++i) {
    std::uniform_real_distribution<double> pitch_dist(-1.4, 1.4);
    std::uniform_real_distribution<double> roll_dist(-M_PI + 0.1, M_PI - 0.1);
    const double pitch = pitch_dist(rng);
    const double roll = roll_dist(rng);
    const Mat3 rp = rp_from_angles(pitch, roll);
    CHECK(is_rotation(rp, 1e-12));
    // The chart never introduces yaw.
    CHECK(geodesic_distance(decompose_heading(rp).yaw, Mat3::Identity()) <
          1e-9);
    const Eigen::Vector2d a = rp_angles(rp);
    CHECK(a.x() == Catch::Approx(pitch).margin(1e-9));
    CHECK(a.y() == Catch::Approx(roll).margin(1e-9));
  }

  // rp factors of arbitrary orientations live on the chart too.
  for (int i = 0; i < 500; ++i) {
    const Mat3 R = testutil::random_rotation_bounded_pitch(rng);
    const Mat3 rp = decompose_heading(R).rp;
    const Eigen::Vector2d a = rp_angles(rp);
    CHECK((rp_from_angles(a.x(), a.y()) - rp).norm() < 1e-9);
  }
}

TEST_CASE("finite_difference_gradient") {
  const auto quad = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  const std::vector<double> x = {1.0, -2.0, 0.5};
  const auto g = finite_difference_gradient(quad, x, 1e-6);
  REQUIRE(g.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(g[i] == Catch::Approx(2.0 * x[i]).margin(1e-6));

  CHECK_THROWS_AS(finite_difference_gradient(quad, x, 0.0),
                  std::invalid_argument);
  const auto nan_f = [](const std::vector<double>&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(finite_difference_gradient(nan_f, x, 1e-6),
                  std::invalid_argument);
}

TEST_CASE("state pack and unpack are inverses") {
  SolverState s;
  s.rp_params = {{0.1, -0.2}, {0.3, 0.4}, {-0.5, 0.6}};
  s.velocities = {Vec3(1, 2, 3), Vec3(-4, 5, -6)};
  const auto x = solver_detail::pack(s);
  REQUIRE(x.size() == 2 * 3 + 3 * 2);
  SolverState back;
  solver_detail::unpack(x, 3, &back);
  for (int t = 0; t < 3; ++t)
    CHECK((back.rp_params[t] - s.rp_params[t]).norm() == 0.0);
  for (int t = 0; t < 2; ++t)
    CHECK((back.velocities[t] - s.velocities[t]).norm() == 0.0);
}

namespace {

Scene small_scene() {
  SceneConfig cfg;
  cfg.frames = 40;
  cfg.path = HumanPath::kCircle;
  cfg.rig = CameraRig::kFollow;
  return generate_scene(cfg, 7);
}

SolverState exact_state(const Scene& scene, const Observations& obs) {
  SolverState s;
  for (const Mat3& R : scene.camera.rotations)
    s.rp_params.push_back(rp_angles(decompose_heading(R).rp));
  s.velocities = scene.camera.local_velocities;
  (void)obs;
  return s;
}

}  // namespace

TEST_CASE("objective vanishes on the exact state and grows with error") {
  const Scene scene = small_scene();
  const Observations obs = perturb(scene, NoiseModel{});
  const SolverState exact = exact_state(scene, obs);

  const double at_truth =
      objective(exact, obs, scene, LossWeights{}, /*data_weight=*/0.0);
  CHECK(at_truth < 1e-9);

  SolverState off = exact;
  for (auto& v : off.velocities) v += Vec3(0.01, 0, 0);
  CHECK(objective(off, obs, scene, LossWeights{}, 0.0) > at_truth + 1e-6);

  SolverState tilted = exact;
  for (auto& a : tilted.rp_params) a.x() += 0.05;
  CHECK(objective(tilted, obs, scene, LossWeights{}, 0.0) > at_truth + 1e-6);

  SolverState short_state = exact;
  short_state.velocities.pop_back();
  CHECK_THROWS_AS(objective(short_state, obs, scene, LossWeights{}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("fit is a no-op on noiseless observations") {
  const Scene scene = small_scene();
  const Observations obs = perturb(scene, NoiseModel{});
  SolverConfig cfg;
  cfg.max_iters = 5;
  const SolverState s = fit(obs, scene, cfg, LossWeights{});
  REQUIRE(!s.loss_history.empty());
  CHECK(s.loss_history.front() < 1e-9);
  CHECK(s.loss_history.size() <= 2);
}

TEST_CASE("fit reduces the loss on noisy observations") {
  const Scene scene = small_scene();
  NoiseModel noise;
  noise.rp_noise_rad = 0.02;
  noise.seed = 7;
  const Observations obs = perturb(scene, noise);

  SolverConfig cfg;
  cfg.max_iters = 40;
  const SolverState s = fit(obs, scene, cfg, LossWeights{});

  REQUIRE(s.loss_history.size() >= 2);
  for (std::size_t i = 0; i + 1 < s.loss_history.size(); ++i)
    CHECK(s.loss_history[i + 1] <= s.loss_history[i]);
  CHECK(s.loss_history.back() < 0.5 * s.loss_history.front());

  // The fitted state reconstructs a better camera trajectory than the
  // raw observations do.
  const auto reconstruct = [&](const std::vector<Mat3>& rp,
                               const std::vector<Vec3>& vel) {
    return reconstruct_world_motion_from_factors(
               obs.body_ang_vel_seq, vel, rp, obs.r_hc_seq, obs.human_local_v,
               obs.t0_human, obs.t0_camera, obs.initial_yaw, obs.fps)
        .camera.positions;
  };
  std::vector<Mat3> rp_fit;
  for (const auto& a : s.rp_params)
    rp_fit.push_back(rp_from_angles(a.x(), a.y()));
  const auto before = reconstruct(obs.rp_seq, obs.cam_local_v);
  const auto after = reconstruct(rp_fit, s.velocities);
  double err_before = 0.0, err_after = 0.0;
  for (std::size_t t = 0; t < scene.camera.frames(); ++t) {
    err_before += (before[t] - scene.camera.positions[t]).norm();
    err_after += (after[t] - scene.camera.positions[t]).norm();
  }
  CHECK(err_after < err_before);
}

TEST_CASE("fit rejects out-of-range sequence lengths") {
  SceneConfig cfg;
  cfg.frames = 520;
  const Scene scene = generate_scene(cfg, 1);
  const Observations obs = perturb(scene, NoiseModel{});
  CHECK_THROWS_AS(fit(obs, scene, SolverConfig{}, LossWeights{}),
                  std::invalid_argument);

  SolverConfig bad;
  bad.step_init = 0.0;
  const Scene ok = small_scene();
  CHECK_THROWS_AS(fit(perturb(ok, NoiseModel{}), ok, bad, LossWeights{}),
                  std::invalid_argument);
}
