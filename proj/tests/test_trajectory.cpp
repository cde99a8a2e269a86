#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "headtraj/metrics.hpp"
#include "headtraj/simulator.hpp"
#include "headtraj/trajectory.hpp"
#include "test_util.hpp"

using namespace headtraj;

TEST_CASE("integrate_trajectory basics") {
  const std::vector<Mat3> eyes(3, Mat3::Identity());

  const auto zero = integrate_trajectory(Vec3::Zero(), eyes,
                                         {Vec3::Zero(), Vec3::Zero()});
  for (const Vec3& p : zero) CHECK(p.norm() < 1e-15);

  const auto line = integrate_trajectory(Vec3::Zero(), eyes,
                                         {Vec3(0, 0, 1), Vec3(0, 0, 1)});
  CHECK((line[2] - Vec3(0, 0, 2)).norm() < 1e-15);

  // Rotating heading, verified against a per-step hand computation.
  const std::vector<Mat3> rots = {Mat3::Identity(), yaw_rotation(M_PI / 2),
                                  yaw_rotation(M_PI)};
  const std::vector<Vec3> v = {Vec3(0, 0, 1), Vec3(0, 0, 1)};
  const auto traced = integrate_trajectory(Vec3::Zero(), rots, v);
  Vec3 expect = Vec3::Zero();
  expect += rots[0] * v[0];
  CHECK((traced[1] - expect).norm() < 1e-12);
  expect += rots[1] * v[1];
  CHECK((traced[2] - expect).norm() < 1e-12);

  CHECK_THROWS_AS(integrate_trajectory(Vec3::Zero(), eyes, {Vec3::Zero()}),
                  std::invalid_argument);
}

TEST_CASE("differentiate_trajectory basics") {
  const std::vector<Mat3> eyes(2, Mat3::Identity());
  const auto still =
      differentiate_trajectory({Vec3(1, 2, 3), Vec3(1, 2, 3)}, eyes);
  CHECK(still[0].norm() < 1e-15);

  const auto v =
      differentiate_trajectory({Vec3::Zero(), Vec3(0, 0, 2)}, eyes);
  CHECK((v[0] - Vec3(0, 0, 2)).norm() < 1e-15);

  CHECK_THROWS_AS(differentiate_trajectory({Vec3::Zero()}, eyes),
                  std::invalid_argument);
}

TEST_CASE("integrate and differentiate are exact inverses") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Mat3> rots;
    std::vector<Vec3> pos;
    const int T = 5 + static_cast<int>(rng() % 30);
    for (int t = 0; t < T; ++t) {
      rots.push_back(testutil::random_rotation(rng));
      pos.push_back(testutil::random_vec3(rng, 2.0));
    }
    const auto vel = differentiate_trajectory(pos, rots);
    const auto back = integrate_trajectory(pos[0], rots, vel);
    for (int t = 0; t < T; ++t) CHECK((back[t] - pos[t]).norm() < 1e-12);

    std::vector<Vec3> v0;
    for (int t = 0; t + 1 < T; ++t) v0.push_back(testutil::random_vec3(rng, 0.5));
    const auto traj = integrate_trajectory(pos[0], rots, v0);
    const auto v_back = differentiate_trajectory(traj, rots);
    for (int t = 0; t + 1 < T; ++t) CHECK((v_back[t] - v0[t]).norm() < 1e-12);
  }
}

TEST_CASE("integration is equivariant under a global rotation") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Mat3> rots;
    std::vector<Vec3> vel;
    for (int t = 0; t < 20; ++t) rots.push_back(testutil::random_rotation(rng));
    for (int t = 0; t < 19; ++t) vel.push_back(testutil::random_vec3(rng));
    const Vec3 t0 = testutil::random_vec3(rng);
    const Mat3 G = testutil::random_rotation(rng);

    std::vector<Mat3> g_rots;
    for (const Mat3& R : rots) g_rots.push_back(G * R);
    const auto base = integrate_trajectory(t0, rots, vel);
    const auto moved = integrate_trajectory(G * t0, g_rots, vel);
    for (int t = 0; t < 20; ++t)
      CHECK((moved[t] - G * base[t]).norm() < 1e-12);
  }
}

namespace {

Observations exact_observations(const Scene& scene) {
  return perturb(scene, NoiseModel{});
}

}  // namespace

TEST_CASE("reconstruct_world_motion round-trips a noiseless scene") {
  SceneConfig cfg;
  cfg.path = HumanPath::kCircle;
  cfg.rig = CameraRig::kOrbit;
  const Scene scene = generate_scene(cfg, 7);
  const Observations obs = exact_observations(scene);

  const WorldMotion rec = reconstruct_world_motion(
      scene.camera.rotations, obs.cam_local_v, obs.rp_seq, obs.r_hc_seq,
      obs.human_local_v, obs.t0_human, obs.t0_camera, obs.initial_yaw,
      scene.camera.fps);

  for (std::size_t t = 0; t < scene.human.frames(); ++t) {
    CHECK((rec.human.positions[t] - scene.human.positions[t]).norm() < 1e-6);
    CHECK((rec.camera.positions[t] - scene.camera.positions[t]).norm() < 1e-6);
    CHECK(geodesic_distance(rec.human.rotations[t], scene.human.rotations[t]) <
          1e-6);
    CHECK(geodesic_distance(rec.camera.rotations[t],
                            scene.camera.rotations[t]) < 1e-6);
  }
}

TEST_CASE("reconstruct_world_motion static case") {
  const std::size_t T = 5;
  const std::vector<Mat3> cam_rots(T, yaw_rotation(0.3));
  const std::vector<Mat3> rp(T, Mat3::Identity());
  const std::vector<Mat3> hc(T, Mat3::Identity());
  const std::vector<Vec3> zero_v(T - 1, Vec3::Zero());
  const WorldMotion rec = reconstruct_world_motion(
      cam_rots, zero_v, rp, hc, zero_v, Vec3(1, 2, 3), Vec3(4, 5, 6));
  for (std::size_t t = 0; t < T; ++t) {
    CHECK((rec.human.positions[t] - Vec3(1, 2, 3)).norm() < 1e-12);
    CHECK((rec.camera.positions[t] - Vec3(4, 5, 6)).norm() < 1e-12);
  }
}

TEST_CASE("reconstruction is invariant to the unknown initial heading") {
  SceneConfig cfg;
  cfg.path = HumanPath::kFigureEight;
  cfg.rig = CameraRig::kFollow;
  const Scene scene = generate_scene(cfg, 11);
  const Observations obs = exact_observations(scene);

  const auto run = [&](const Mat3& yaw0) {
    return reconstruct_world_motion_from_factors(
        obs.body_ang_vel_seq, obs.cam_local_v, obs.rp_seq, obs.r_hc_seq,
        obs.human_local_v, Vec3::Zero(), Vec3::Zero(), yaw0, scene.camera.fps);
  };
  const WorldMotion a = run(Mat3::Identity());
  const WorldMotion b = run(yaw_rotation(1.1));

  // WA alignment absorbs the global yaw + translation gauge.
  std::vector<Vec3> pa(a.human.positions), pb(b.human.positions);
  const RigidAlignment align = procrustes_align(pa, pb, false);
  for (std::size_t t = 0; t < pa.size(); ++t)
    CHECK((align.apply(pa[t]) - pb[t]).norm() < 1e-9);
}

TEST_CASE("reconstruct_world_motion rejects mismatched lengths") {
  const std::vector<Mat3> rots(4, Mat3::Identity());
  const std::vector<Vec3> v(2, Vec3::Zero());  // should be 3
  CHECK_THROWS_AS(
      reconstruct_world_motion(rots, v, rots, rots, v, Vec3::Zero(),
                               Vec3::Zero()),
      std::invalid_argument);
}
