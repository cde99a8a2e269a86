#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "headtraj/losses.hpp"
#include "test_util.hpp"

using namespace headtraj;

TEST_CASE("simple_loss") {
  PredictionVector a{{1.0, 2.0, 3.0}, {true, true, true}};
  CHECK(simple_loss(a, a) == 0.0);

  PredictionVector shifted{{2.0, 3.0, 4.0}, {true, true, true}};
  CHECK(simple_loss(shifted, a) == Catch::Approx(1.0));

  PredictionVector masked_pred{{1.0, 99.0}, {true, false}};
  PredictionVector masked_gt{{1.0, -5.0}, {true, false}};
  CHECK(simple_loss(masked_pred, masked_gt) == 0.0);

  PredictionVector bad_mask{{1.0, 2.0}, {true, true}};
  PredictionVector other_mask{{1.0, 2.0}, {true, false}};
  CHECK_THROWS_AS(simple_loss(bad_mask, other_mask), std::invalid_argument);

  PredictionVector all_masked{{1.0}, {false}};
  CHECK(simple_loss(all_masked, PredictionVector{{2.0}, {false}}) == 0.0);
}

TEST_CASE("teacher forcing loss vanishes on exact inputs") {
  std::mt19937_64 rng(41);
  std::vector<Mat3> rots;
  std::vector<Vec3> vel;
  for (int t = 0; t < 25; ++t) rots.push_back(testutil::random_rotation(rng));
  for (int t = 0; t < 24; ++t) vel.push_back(testutil::random_vec3(rng, 0.1));
  const auto t_gt = integrate_trajectory(Vec3(1, 0, 2), rots, vel);
  CHECK(teacher_forcing_traj_loss(vel, rots, vel, rots, t_gt) < 1e-12);
}

TEST_CASE("teacher forcing constant velocity bias closed form") {
  const std::size_t T = 40;
  const double b = 0.013;
  const std::vector<Mat3> rots(T, Mat3::Identity());
  std::vector<Vec3> v_gt(T - 1, Vec3(0, 0, 0.1));
  std::vector<Vec3> v_pred(T - 1, Vec3(0, 0, 0.1 + b));
  const auto t_gt = integrate_trajectory(Vec3::Zero(), rots, v_gt);

  const double loss = teacher_forcing_traj_loss(v_pred, rots, v_gt, rots, t_gt);
  // Branch with fixed orientation accumulates t*b at frame t; the other
  // branch is exact. Undo the per-branch 1/T normalization.
  const double expected =
      b * static_cast<double>(T) * static_cast<double>(T - 1) / 2.0;
  CHECK(loss * static_cast<double>(T) == Catch::Approx(expected).margin(1e-9));
}

TEST_CASE("teacher forcing yaw-offset branch matches the chord-length oracle") {
  const std::size_t T = 30;
  const double theta = 0.2;
  const std::vector<Mat3> R_gt(T, Mat3::Identity());
  std::vector<Mat3> R_pred;
  for (std::size_t t = 0; t < T; ++t) R_pred.push_back(yaw_rotation(theta));
  const std::vector<Vec3> v_gt(T - 1, Vec3(0, 0, 0.1));
  const auto t_gt = integrate_trajectory(Vec3::Zero(), R_gt, v_gt);

  // Brute-force oracle: integrate the predicted-orientation branch by hand
  // and sum L1 errors.
  const auto branch = integrate_trajectory(t_gt[0], R_pred, v_gt);
  double oracle = 0.0;
  for (std::size_t t = 0; t < T; ++t)
    oracle += (branch[t] - t_gt[t]).norm();
  const double loss =
      teacher_forcing_traj_loss(v_gt, R_pred, v_gt, R_gt, t_gt);
  CHECK(loss * static_cast<double>(T) == Catch::Approx(oracle).margin(1e-9));

  // Euclidean distance at frame t equals the chord 2 sin(theta/2) * path.
  for (std::size_t t = 1; t < T; ++t) {
    const double path = 0.1 * static_cast<double>(t);
    CHECK((branch[t] - t_gt[t]).norm() ==
          Catch::Approx(2.0 * std::sin(theta / 2.0) * path).margin(1e-9));
  }
}

TEST_CASE("teacher forcing is invariant to a global rigid transform") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Mat3> R_gt, R_pred;
    std::vector<Vec3> v_gt, v_pred;
    for (int t = 0; t < 15; ++t) {
      R_gt.push_back(testutil::random_rotation(rng));
      R_pred.push_back(testutil::random_rotation(rng));
    }
    for (int t = 0; t < 14; ++t) {
      v_gt.push_back(testutil::random_vec3(rng, 0.1));
      v_pred.push_back(testutil::random_vec3(rng, 0.1));
    }
    const auto t_gt = integrate_trajectory(Vec3::Zero(), R_gt, v_gt);
    const double base =
        teacher_forcing_traj_loss(v_pred, R_pred, v_gt, R_gt, t_gt);

    const Mat3 G = testutil::random_rotation(rng);
    const Vec3 shift = testutil::random_vec3(rng);
    std::vector<Mat3> gR_gt, gR_pred;
    std::vector<Vec3> gt_gt;
    for (const auto& R : R_gt) gR_gt.push_back(G * R);
    for (const auto& R : R_pred) gR_pred.push_back(G * R);
    for (const auto& p : t_gt) gt_gt.push_back(G * p + shift);
    const double moved =
        teacher_forcing_traj_loss(v_pred, gR_pred, v_gt, gR_gt, gt_gt);
    CHECK(moved == Catch::Approx(base).margin(1e-9));
  }
}

TEST_CASE("teacher forcing L1 homogeneity on a straight line") {
  const std::size_t T = 20;
  const std::vector<Mat3> rots(T, Mat3::Identity());
  const std::vector<Vec3> v_gt(T - 1, Vec3(0, 0, 0.1));
  const auto t_gt = integrate_trajectory(Vec3::Zero(), rots, v_gt);
  const double c = 3.7;
  std::vector<Vec3> v_small(T - 1, Vec3(0, 0, 0.1 + 0.01));
  std::vector<Vec3> v_big(T - 1, Vec3(0, 0, 0.1 + 0.01 * c));
  const double small = teacher_forcing_traj_loss(v_small, rots, v_gt, rots, t_gt);
  const double big = teacher_forcing_traj_loss(v_big, rots, v_gt, rots, t_gt);
  CHECK(big == Catch::Approx(c * small).margin(1e-9));
}

TEST_CASE("teacher forcing rejects inconsistent ground truth") {
  const std::vector<Mat3> rots(3, Mat3::Identity());
  const std::vector<Vec3> v(2, Vec3(0, 0, 1));
  std::vector<Vec3> bad_t = {Vec3::Zero(), Vec3(0, 0, 1), Vec3(0, 0, 5)};
  CHECK_THROWS_AS(teacher_forcing_traj_loss(v, rots, v, rots, bad_t),
                  std::invalid_argument);
}

TEST_CASE("generate_contact_labels thresholding") {
  const double fps = 30.0;
  std::vector<std::vector<Vec3>> feet;
  for (int t = 0; t < 12; ++t) {
    const double s = static_cast<double>(t) / fps;
    feet.push_back({
        Vec3(0, 0, 0),        // static
        Vec3(0, 0, 0.2 * s),  // 0.2 m/s
    });
  }
  const auto labels = generate_contact_labels(feet, fps);
  REQUIRE(labels.size() == feet.size());
  for (const auto& row : labels) {
    CHECK(row[0]);
    CHECK_FALSE(row[1]);
  }
  // Last frame copies the previous one.
  CHECK(labels.back() == labels[labels.size() - 2]);

  // Boundary semantics: strict less-than, so speed == threshold is
  // non-contact. Probed with fps = 1 and a dyadic step (0.25) whose
  // square root round-trips exactly; the default threshold is bracketed.
  // -> bool matters: operator[][] on the temporary label table yields a
  // vector<bool> proxy that must not outlive the expression.
  const auto speed_label = [](double step, double threshold) -> bool {
    const std::vector<std::vector<Vec3>> two = {{Vec3::Zero()},
                                                {Vec3(0, 0, step)}};
    return generate_contact_labels(two, 1.0, threshold)[0][0];
  };
  CHECK(speed_label(0.2499, 0.25));
  CHECK_FALSE(speed_label(0.25, 0.25));  // boundary: non-contact
  CHECK(speed_label(0.149, kContactThresholdMps));
  CHECK_FALSE(speed_label(0.151, kContactThresholdMps));

  CHECK_THROWS_AS(generate_contact_labels({feet[0]}, fps),
                  std::invalid_argument);
}

TEST_CASE("contact labels are translation invariant") {
  std::mt19937_64 rng(43);
  std::vector<std::vector<Vec3>> feet;
  for (int t = 0; t < 20; ++t)
    feet.push_back({testutil::random_vec3(rng, 0.002),
                    testutil::random_vec3(rng, 0.02)});
  const Vec3 shift(3.0, -1.0, 12.0);
  auto moved = feet;
  for (auto& frame : moved)
    for (auto& p : frame) p += shift;
  CHECK(generate_contact_labels(feet, 30.0) ==
        generate_contact_labels(moved, 30.0));
}

TEST_CASE("static_contact_loss") {
  std::vector<std::vector<Vec3>> vel(5, {Vec3::Zero(), Vec3::Zero()});
  std::vector<std::vector<bool>> contacts(5, {true, true});
  CHECK(static_contact_loss(vel, contacts, 30.0) == 0.0);

  // One contact frame moving 0.1 m/s, everything else swinging.
  std::vector<std::vector<Vec3>> v2(4, {Vec3(0, 0, 0.5)});
  std::vector<std::vector<bool>> c2(4, {false});
  v2[1][0] = Vec3(0, 0, 0.1 / 30.0);
  c2[1][0] = true;
  CHECK(static_contact_loss(v2, c2, 30.0) == Catch::Approx(0.1));

  // Mixed case against a direct masked mean.
  std::mt19937_64 rng(44);
  std::vector<std::vector<Vec3>> v3;
  std::vector<std::vector<bool>> c3;
  double sum = 0.0;
  int n = 0;
  for (int t = 0; t < 30; ++t) {
    v3.push_back({testutil::random_vec3(rng, 0.01), testutil::random_vec3(rng, 0.01)});
    c3.push_back({rng() % 2 == 0, rng() % 2 == 0});
    for (int f = 0; f < 2; ++f) {
      if (c3[t][f]) {
        sum += v3[t][f].norm() * 30.0;
        ++n;
      }
    }
  }
  const double expected = n == 0 ? 0.0 : sum / n;
  CHECK(static_contact_loss(v3, c3, 30.0) == Catch::Approx(expected).margin(1e-12));

  CHECK_THROWS_AS(static_contact_loss(v2, contacts, 30.0), std::invalid_argument);
}

TEST_CASE("total_loss weighting") {
  CHECK(total_loss(0, 0, 0, 0, LossWeights{}) == 0.0);
  CHECK(total_loss(1, 2, 3, 4, LossWeights{}) == Catch::Approx(10.0));
  LossWeights w;
  w.lambda_h = 2.0;
  w.lambda_cam = 0.0;
  w.lambda_static = 1.0;
  CHECK(total_loss(1, 2, 3, 4, w) == Catch::Approx(9.0));
  CHECK_THROWS_AS(total_loss(-1, 0, 0, 0, LossWeights{}), std::invalid_argument);
}
