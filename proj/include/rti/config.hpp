#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rti/capture.hpp"
#include "rti/experiments.hpp"
#include "rti/io.hpp"
#include "rti/lighting_plan.hpp"
#include "rti/mission.hpp"
#include "rti/mpc.hpp"
#include "rti/sequencing.hpp"

namespace rti {

struct GeneratorConfig {
  PlanKind kind = PlanKind::Sppa;
  std::size_t v_s = 3;  // SPPA vertical sample count
  std::size_t n = 60;   // Fibonacci position count
  SppaMode mode = SppaMode::Spherical;
  Rounding rounding = Rounding::HalfAwayFromZero;
};

enum class SequencerKind { Sppa, Etsp };

struct SequencerConfig {
  SequencerKind kind = SequencerKind::Sppa;
  OddRowTraversal traversal = OddRowTraversal::Zigzag;
  int etsp_restarts = 4;
};

// Everything one run needs. All fields have defaults; a JSON config only has
// to name what it changes. Unknown fields are rejected.
struct MissionConfig {
  CameraModel camera = default_camera();
  ScanRegion region = default_region();
  Vec3 initial{3.0, -2.0, 0.3};
  GeneratorConfig generator;
  SequencerConfig sequencer;
  MissionSettings mission;
  std::vector<Sphere> obstacles;
  double camera_uav_radius = 0.25;
  std::string scene_path;  // resolved path when the scene came from a file
  SceneSpec scene = SceneSpec::default_scene();
  double sigma = 0.0;
  std::uint64_t seed = 1;
  std::string output = "rti_out";
  PathStudyConfig path_study;
  NoiseSweepConfig noise_sweep;

  // Defaults: camera at the origin looking along +x, a cap of lighting
  // positions above the OoI, all outside the field of view.
  static CameraModel default_camera();
  static ScanRegion default_region();
  ObstacleSet obstacle_set() const;
  void validate() const;
};

Json to_json(const SceneSpec& s);
SceneSpec scene_from_json(const Json& j);

Json to_json(const MissionConfig& c);
// `base_dir` resolves a relative scene path.
MissionConfig config_from_json(const Json& j, const std::string& base_dir = ".");

// "a.b.c=value": value is parsed as JSON when possible, else taken as a string.
void apply_override(Json& root, const std::string& assignment);

MissionConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

std::string to_string(SequencerKind kind);
std::string to_string(OddRowTraversal t);
std::string to_string(Rounding r);

// Pipeline steps driven by a config.
LightingPlan make_plan(const MissionConfig& c);
Sequence make_sequence(const MissionConfig& c, const LightingPlan& plan);

}  // namespace rti
