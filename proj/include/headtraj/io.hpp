#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "headtraj/metrics.hpp"
#include "headtraj/simulator.hpp"
#include "headtraj/trajectory.hpp"

// JSON file formats for the CLI: scene files, observation files, metric
// reports. Rotations are row-major 9-arrays; numbers round-trip losslessly.

namespace headtraj::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kFormatVersion = "1";
inline constexpr const char* kConvention = "y-down-z-forward";
inline constexpr const char* kToolVersion = "headtraj 0.1.0";

inline json rotation_to_json(const Mat3& R) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(R(r, c));
  return a;
}

inline Mat3 rotation_from_json(const json& a) {
  if (!a.is_array() || a.size() != 9)
    throw std::invalid_argument("rotation must be a row-major 9-array");
  Mat3 R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R(r, c) = a.at(3 * r + c).get<double>();
  require_rotation(R, kInputRotationTol,
                   "rotation fails the orthonormality check on load");
  return R;
}

inline json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const json& a) {
  if (!a.is_array() || a.size() != 3)
    throw std::invalid_argument("vector must be a 3-array");
  return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
}

template <typename T, typename Fn>
json sequence_to_json(const std::vector<T>& seq, Fn&& item) {
  json a = json::array();
  for (const auto& x : seq) a.push_back(item(x));
  return a;
}

inline json motion_to_json(const MotionSequence& m) {
  json j;
  j["rotations"] = sequence_to_json(m.rotations, rotation_to_json);
  j["positions"] = sequence_to_json(m.positions, vec3_to_json);
  if (!m.local_velocities.empty())
    j["local_velocities"] = sequence_to_json(m.local_velocities, vec3_to_json);
  if (!m.joints.empty()) {
    json frames = json::array();
    for (const auto& frame : m.joints)
      frames.push_back(sequence_to_json(frame, vec3_to_json));
    j["joints"] = frames;
  }
  if (!m.contacts.empty()) {
    json frames = json::array();
    for (const auto& frame : m.contacts) {
      json row = json::array();
      for (bool b : frame) row.push_back(b);
      frames.push_back(row);
    }
    j["contacts"] = frames;
  }
  return j;
}

inline MotionSequence motion_from_json(const json& j, double fps) {
  MotionSequence m;
  m.fps = fps;
  for (const auto& r : j.at("rotations")) m.rotations.push_back(rotation_from_json(r));
  for (const auto& p : j.at("positions")) m.positions.push_back(vec3_from_json(p));
  if (j.contains("local_velocities"))
    for (const auto& v : j.at("local_velocities"))
      m.local_velocities.push_back(vec3_from_json(v));
  if (j.contains("joints")) {
    for (const auto& frame : j.at("joints")) {
      std::vector<Vec3> row;
      for (const auto& p : frame) row.push_back(vec3_from_json(p));
      m.joints.push_back(std::move(row));
    }
  }
  if (j.contains("contacts")) {
    for (const auto& frame : j.at("contacts")) {
      std::vector<bool> row;
      for (const auto& b : frame) row.push_back(b.get<bool>());
      m.contacts.push_back(std::move(row));
    }
  }
  m.validate();
  return m;
}

inline json scene_to_json(const Scene& scene) {
  json j;
  j["version"] = kFormatVersion;
  j["fps"] = scene.camera.fps;
  j["convention"] = kConvention;
  j["joint_names"] = json::array({"root", "left_foot", "right_foot"});
  j["camera"] = motion_to_json(scene.camera);
  j["human"] = motion_to_json(scene.human);
  return j;
}

inline Scene scene_from_json(const json& j) {
  if (j.value("version", "") != kFormatVersion)
    throw std::invalid_argument("scene file: unsupported version");
  if (j.value("convention", "") != kConvention)
    throw std::invalid_argument("scene file: unexpected frame convention");
  const double fps = j.at("fps").get<double>();
  Scene scene;
  scene.camera = motion_from_json(j.at("camera"), fps);
  scene.human = motion_from_json(j.at("human"), fps);
  if (scene.camera.frames() != scene.human.frames())
    throw std::invalid_argument("scene file: camera/human frame mismatch");
  return scene;
}

inline json observations_to_json(const Observations& obs) {
  json j;
  j["version"] = kFormatVersion;
  j["fps"] = obs.fps;
  j["convention"] = kConvention;
  j["rp_seq"] = sequence_to_json(obs.rp_seq, rotation_to_json);
  j["body_ang_vel_seq"] = sequence_to_json(obs.body_ang_vel_seq, rotation_to_json);
  j["cam_local_velocities"] = sequence_to_json(obs.cam_local_v, vec3_to_json);
  j["human_local_velocities"] = sequence_to_json(obs.human_local_v, vec3_to_json);
  j["r_hc_seq"] = sequence_to_json(obs.r_hc_seq, rotation_to_json);
  if (!obs.joints_local.empty()) {
    json frames = json::array();
    for (const auto& frame : obs.joints_local)
      frames.push_back(sequence_to_json(frame, vec3_to_json));
    j["joints_local"] = frames;
  }
  j["anchor"] = {{"initial_yaw", rotation_to_json(obs.initial_yaw)},
                 {"t0_human", vec3_to_json(obs.t0_human)},
                 {"t0_camera", vec3_to_json(obs.t0_camera)}};
  return j;
}

inline Observations observations_from_json(const json& j) {
  for (const char* key : {"rp_seq", "body_ang_vel_seq", "cam_local_velocities",
                          "human_local_velocities", "r_hc_seq"}) {
    if (!j.contains(key))
      throw std::invalid_argument(std::string("observations file: missing channel ") + key);
  }
  Observations obs;
  obs.fps = j.at("fps").get<double>();
  for (const auto& r : j.at("rp_seq")) obs.rp_seq.push_back(rotation_from_json(r));
  for (const auto& r : j.at("body_ang_vel_seq"))
    obs.body_ang_vel_seq.push_back(rotation_from_json(r));
  for (const auto& v : j.at("cam_local_velocities"))
    obs.cam_local_v.push_back(vec3_from_json(v));
  for (const auto& v : j.at("human_local_velocities"))
    obs.human_local_v.push_back(vec3_from_json(v));
  for (const auto& r : j.at("r_hc_seq")) obs.r_hc_seq.push_back(rotation_from_json(r));
  if (j.contains("joints_local")) {
    for (const auto& frame : j.at("joints_local")) {
      std::vector<Vec3> row;
      for (const auto& p : frame) row.push_back(vec3_from_json(p));
      obs.joints_local.push_back(std::move(row));
    }
  }
  if (j.contains("anchor")) {
    obs.initial_yaw = rotation_from_json(j.at("anchor").at("initial_yaw"));
    obs.t0_human = vec3_from_json(j.at("anchor").at("t0_human"));
    obs.t0_camera = vec3_from_json(j.at("anchor").at("t0_camera"));
  }
  const std::size_t T = obs.rp_seq.size();
  if (T < 2 || obs.body_ang_vel_seq.size() != T - 1 ||
      obs.cam_local_v.size() != T - 1 || obs.human_local_v.size() != T - 1 ||
      obs.r_hc_seq.size() != T ||
      (!obs.joints_local.empty() && obs.joints_local.size() != T))
    throw std::invalid_argument("observations file: inconsistent channel lengths");
  return obs;
}

inline json report_to_json(const MetricsReport& rep) {
  json m = json::object();
  const auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) m[key] = *v;
  };
  put("wa_mpjpe_100_mm", rep.wa_mpjpe_100_mm);
  put("w_mpjpe_100_mm", rep.w_mpjpe_100_mm);
  put("rte_percent", rep.rte_percent);
  put("jitter_10mps3", rep.jitter_10mps3);
  put("foot_sliding_mm", rep.foot_sliding_mm);
  put("pa_mpjpe_mm", rep.pa_mpjpe_mm);
  put("mpjpe_mm", rep.mpjpe_mm);
  put("accel_mm_s2", rep.accel_mm_s2);
  return m;
}

// Write-temp-then-rename so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open: " + path.string());
  return json::parse(in);
}

}  // namespace headtraj::io
