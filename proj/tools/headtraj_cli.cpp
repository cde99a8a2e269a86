// Command-line front end: simulate / decompose / reconstruct / evaluate /
// fit / selftest over the JSON file formats in headtraj/io.hpp.
//
// Exit codes: 0 success, 1 selftest failure, 2 input error, 3 solver failure.

#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "headtraj/io.hpp"
#include "headtraj/selftest.hpp"
#include "headtraj/solver.hpp"

namespace {

using namespace headtraj;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitSelftestFail = 1;
constexpr int kExitInputError = 2;
constexpr int kExitSolverError = 3;

const std::map<std::string, HumanPath> kPaths = {
    {"stationary", HumanPath::kStationary},
    {"line", HumanPath::kLine},
    {"circle", HumanPath::kCircle},
    {"figure-eight", HumanPath::kFigureEight},
};

const std::map<std::string, CameraRig> kRigs = {
    {"static", CameraRig::kStatic},
    {"orbit", CameraRig::kOrbit},
    {"follow", CameraRig::kFollow},
    {"handheld", CameraRig::kHandheld},
};

// Presets are "<path>-<rig>", e.g. circle-orbit or figure-eight-follow.
bool apply_preset(const std::string& preset, SceneConfig* cfg) {
  for (const auto& [pname, path] : kPaths) {
    for (const auto& [rname, rig] : kRigs) {
      if (preset == pname + "-" + rname) {
        cfg->path = path;
        cfg->rig = rig;
        return true;
      }
    }
  }
  return false;
}

json meta_block(const std::vector<std::string>& inputs) {
  json meta;
  meta["tool_version"] = io::kToolVersion;
  meta["inputs"] = inputs;
  return meta;
}

int cmd_simulate(const std::string& preset, const std::string& path_name,
                 const std::string& rig_name, SceneConfig cfg,
                 std::uint64_t seed, const std::string& out) {
  if (!preset.empty()) {
    if (!apply_preset(preset, &cfg)) {
      std::cerr << "error: unknown preset '" << preset << "'\n";
      return kExitInputError;
    }
  } else {
    cfg.path = kPaths.at(path_name);
    cfg.rig = kRigs.at(rig_name);
  }
  const Scene scene = generate_scene(cfg, seed);
  io::write_json(out, io::scene_to_json(scene));
  return kExitOk;
}

int cmd_decompose(const std::string& in, const std::string& out) {
  const Scene scene = io::scene_from_json(io::read_json(in));
  const HeadingConfig hcfg = default_heading_config();
  const SequenceDecomp d = decompose_sequence(scene.camera.rotations, hcfg);

  double max_residual = 0.0;
  for (std::size_t t = 0; t < scene.camera.frames(); ++t) {
    max_residual = std::max(
        max_residual, (d.yaw[t] * d.rp[t] - scene.camera.rotations[t]).norm());
  }

  json j;
  j["version"] = io::kFormatVersion;
  j["yaw"] = io::sequence_to_json(d.yaw, io::rotation_to_json);
  j["rp"] = io::sequence_to_json(d.rp, io::rotation_to_json);
  j["dyaw"] = io::sequence_to_json(d.dyaw, io::rotation_to_json);
  j["meta"] = meta_block({in});
  j["meta"]["max_reconstruction_residual"] = max_residual;
  io::write_json(out, j);
  return kExitOk;
}

int cmd_reconstruct(const std::string& obs_path, const std::string& out,
                    bool identity_initial_yaw) {
  const Observations obs = io::observations_from_json(io::read_json(obs_path));
  const HeadingConfig hcfg = default_heading_config();
  const Mat3 yaw0 =
      identity_initial_yaw ? Mat3::Identity() : obs.initial_yaw;
  const Vec3 t0_h = identity_initial_yaw ? Vec3::Zero() : obs.t0_human;
  const Vec3 t0_c = identity_initial_yaw ? Vec3::Zero() : obs.t0_camera;
  WorldMotion rec = reconstruct_world_motion_from_factors(
      obs.body_ang_vel_seq, obs.cam_local_v, obs.rp_seq, obs.r_hc_seq,
      obs.human_local_v, t0_h, t0_c, yaw0, obs.fps, hcfg);

  if (!obs.joints_local.empty()) {
    for (std::size_t t = 0; t < rec.human.frames(); ++t) {
      std::vector<Vec3> frame;
      for (const Vec3& p : obs.joints_local[t])
        frame.push_back(rec.human.positions[t] + rec.human.rotations[t] * p);
      rec.human.joints.push_back(std::move(frame));
    }
    if (rec.human.joints[0].size() >= 3 && rec.human.frames() >= 2) {
      std::vector<std::vector<Vec3>> feet(rec.human.frames());
      for (std::size_t t = 0; t < rec.human.frames(); ++t)
        feet[t] = {rec.human.joints[t][1], rec.human.joints[t][2]};
      rec.human.contacts = generate_contact_labels(feet, obs.fps);
    }
  }

  Scene scene;
  scene.camera = std::move(rec.camera);
  scene.human = std::move(rec.human);
  io::write_json(out, io::scene_to_json(scene));
  return kExitOk;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gt_path,
                 const std::string& out, const std::string& csv_path) {
  const Scene pred = io::scene_from_json(io::read_json(pred_path));
  const Scene gt = io::scene_from_json(io::read_json(gt_path));
  if (pred.human.frames() != gt.human.frames()) {
    std::cerr << "error: prediction and ground truth differ in frame count\n";
    return kExitInputError;
  }
  if (!pred.human.joints.empty() && !gt.human.joints.empty() &&
      pred.human.joints[0].size() != gt.human.joints[0].size()) {
    std::cerr << "error: prediction and ground truth differ in joint count\n";
    return kExitInputError;
  }

  const MetricsReport rep = evaluate_sequences(pred.human, gt.human);
  json j;
  j["metrics"] = io::report_to_json(rep);
  j["meta"] = meta_block({pred_path, gt_path});
  json omitted = json::array();
  if (!rep.wa_mpjpe_100_mm) omitted.push_back("wa_mpjpe_100_mm (needs joints)");
  if (!rep.rte_percent) omitted.push_back("rte_percent (degenerate path)");
  if (!rep.foot_sliding_mm) omitted.push_back("foot_sliding_mm (needs contacts)");
  j["meta"]["omitted"] = omitted;
  io::write_json(out, j);

  if (!csv_path.empty() && !pred.human.joints.empty() &&
      !gt.human.joints.empty()) {
    const auto segs = wa_w_mpjpe_segments(pred.human.joints, gt.human.joints);
    std::string csv = "segment_begin,segment_end,wa_mpjpe_mm,w_mpjpe_mm\n";
    for (const auto& s : segs) {
      csv += std::to_string(s.begin) + "," + std::to_string(s.end) + "," +
             std::to_string(s.wa_mm) + "," + std::to_string(s.w_mm) + "\n";
    }
    io::write_file_atomic(csv_path, csv);
  }
  return kExitOk;
}

int cmd_fit(const std::string& obs_path, const std::string& supervision_path,
            const std::string& config_path, const std::string& out,
            const std::string& report_path) {
  const Observations obs = io::observations_from_json(io::read_json(obs_path));
  const Scene gt = io::scene_from_json(io::read_json(supervision_path));
  if (gt.camera.frames() > kMaxSolverFrames) {
    std::cerr << "error: sequence length " << gt.camera.frames()
              << " exceeds the solver guard of " << kMaxSolverFrames << "\n";
    return kExitInputError;
  }

  SolverConfig cfg;
  LossWeights weights;
  if (!config_path.empty()) {
    const json c = io::read_json(config_path);
    cfg.max_iters = c.value("max_iters", cfg.max_iters);
    cfg.step_init = c.value("step_init", cfg.step_init);
    cfg.fd_step = c.value("fd_step", cfg.fd_step);
    cfg.tol = c.value("tol", cfg.tol);
    cfg.data_weight = c.value("data_weight", cfg.data_weight);
    weights.lambda_h = c.value("lambda_h", weights.lambda_h);
    weights.lambda_cam = c.value("lambda_cam", weights.lambda_cam);
    weights.lambda_static = c.value("lambda_static", weights.lambda_static);
  }

  const HeadingConfig hcfg = default_heading_config();
  SolverState st;
  try {
    st = fit(obs, gt, cfg, weights, hcfg);
  } catch (const std::runtime_error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolverError;
  }

  Observations fitted = obs;
  for (std::size_t t = 0; t < st.rp_params.size(); ++t)
    fitted.rp_seq[t] = rp_from_angles(st.rp_params[t].x(), st.rp_params[t].y());
  fitted.cam_local_v = st.velocities;

  json out_json = io::observations_to_json(fitted);
  out_json["loss_history"] = st.loss_history;
  io::write_json(out, out_json);

  if (!report_path.empty()) {
    const auto reconstruct = [&](const Observations& o) {
      WorldMotion wm = reconstruct_world_motion_from_factors(
          o.body_ang_vel_seq, o.cam_local_v, o.rp_seq, o.r_hc_seq,
          o.human_local_v, o.t0_human, o.t0_camera, o.initial_yaw, o.fps, hcfg);
      if (!o.joints_local.empty()) {
        for (std::size_t t = 0; t < wm.human.frames(); ++t) {
          std::vector<Vec3> frame;
          for (const Vec3& p : o.joints_local[t])
            frame.push_back(wm.human.positions[t] + wm.human.rotations[t] * p);
          wm.human.joints.push_back(std::move(frame));
        }
      }
      return wm;
    };
    const WorldMotion before = reconstruct(obs);
    const WorldMotion after = reconstruct(fitted);
    json rep;
    rep["before"] = io::report_to_json(evaluate_sequences(before.human, gt.human));
    rep["after"] = io::report_to_json(evaluate_sequences(after.human, gt.human));
    rep["meta"] = meta_block({obs_path, supervision_path});
    rep["meta"]["iterations"] = st.loss_history.size() - 1;
    rep["meta"]["final_loss"] = st.loss_history.back();
    io::write_json(report_path, rep);
  }
  return kExitOk;
}

int cmd_selftest() {
  const auto results = selftest::run_all();
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name;
    if (!r.pass && !r.detail.empty()) std::cout << ": " << r.detail;
    std::cout << "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << (all_pass ? "selftest: all checks passed\n"
                         : "selftest: FAILURES detected\n");
  return all_pass ? kExitOk : kExitSelftestFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heading-decomposition trajectory toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic scene");
  std::string preset, path_name = "line", rig_name = "follow", sim_out;
  SceneConfig scfg;
  std::uint64_t seed = 0;
  sim->add_option("--preset", preset, "<path>-<rig> shorthand, e.g. circle-orbit");
  sim->add_option("--path", path_name)
      ->check(CLI::IsMember({"stationary", "line", "circle", "figure-eight"}));
  sim->add_option("--rig", rig_name)
      ->check(CLI::IsMember({"static", "orbit", "follow", "handheld"}));
  sim->add_option("--frames", scfg.frames);
  sim->add_option("--fps", scfg.fps);
  sim->add_option("--speed", scfg.speed);
  sim->add_option("--radius", scfg.radius);
  sim->add_option("--cam-radius", scfg.cam_radius);
  sim->add_option("--angular-rate", scfg.cam_angular_rate);
  sim->add_option("--handheld-amplitude", scfg.handheld_amplitude);
  sim->add_option("--step-length", scfg.step_length);
  sim->add_option("--cadence", scfg.cadence);
  sim->add_option("--seed", seed);
  sim->add_option("--out", sim_out)->required();

  // decompose
  auto* dec = app.add_subcommand("decompose", "heading decomposition of a scene");
  std::string dec_in, dec_out;
  dec->add_option("--in", dec_in)->required();
  dec->add_option("--out", dec_out)->required();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "world motion from observations");
  std::string rec_obs, rec_out;
  bool identity_yaw = false;
  rec->add_option("--obs", rec_obs)->required();
  rec->add_option("--out", rec_out)->required();
  rec->add_flag("--identity-initial-yaw", identity_yaw,
                "ignore the anchor and start the heading at identity");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "metrics of prediction vs ground truth");
  std::string ev_pred, ev_gt, ev_out, ev_csv;
  ev->add_option("--pred", ev_pred)->required();
  ev->add_option("--gt", ev_gt)->required();
  ev->add_option("--out", ev_out)->required();
  ev->add_option("--csv", ev_csv, "per-segment CSV alongside the JSON report");

  // fit
  auto* ft = app.add_subcommand("fit", "optimize observations against supervision");
  std::string ft_obs, ft_sup, ft_cfg, ft_out, ft_report;
  ft->add_option("--obs", ft_obs)->required();
  ft->add_option("--supervision", ft_sup)->required();
  ft->add_option("--config", ft_cfg);
  ft->add_option("--out", ft_out)->required();
  ft->add_option("--report", ft_report);

  auto* self = app.add_subcommand("selftest", "run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(preset, path_name, rig_name, scfg, seed, sim_out);
    if (dec->parsed()) return cmd_decompose(dec_in, dec_out);
    if (rec->parsed()) return cmd_reconstruct(rec_obs, rec_out, identity_yaw);
    if (ev->parsed()) return cmd_evaluate(ev_pred, ev_gt, ev_out, ev_csv);
    if (ft->parsed()) return cmd_fit(ft_obs, ft_sup, ft_cfg, ft_out, ft_report);
    if (self->parsed()) return cmd_selftest();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
