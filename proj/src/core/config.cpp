#include "rti/config.hpp"

#include <filesystem>
#include <set>

#include "rti/common.hpp"

namespace rti {

namespace fs = std::filesystem;

namespace {

// Reads optional fields of one JSON object, naming the full path in errors
// and rejecting keys nobody asked for.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorCode::Parse, "config field '" + name() + "': expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out, const char* expected) {
    if (!take(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      fail(ErrorCode::Parse, "config field '" + path_ + key + "': expected " + expected);
    }
  }
  void number(const std::string& key, double& out) { get(key, out, "a number"); }
  void count(const std::string& key, std::size_t& out) { get(key, out, "a non-negative integer"); }
  void flag(const std::string& key, bool& out) { get(key, out, "true or false"); }
  void vec(const std::string& key, Vec3& out) {
    if (take(key)) out = vec3_from_json(j_.at(key), "config field '" + path_ + key + "'");
  }
  template <typename E>
  void choice(const std::string& key, E& out, const std::vector<std::pair<std::string, E>>& options) {
    if (!take(key)) return;
    std::string s;
    std::string allowed;
    for (const auto& o : options) allowed += (allowed.empty() ? "" : "|") + o.first;
    if (!j_.at(key).is_string()) fail(ErrorCode::Parse, "config field '" + path_ + key + "': expected " + allowed);
    s = j_.at(key).get<std::string>();
    for (const auto& o : options)
      if (o.first == s) {
        out = o.second;
        return;
      }
    fail(ErrorCode::Parse, "config field '" + path_ + key + "': '" + s + "' is not one of " + allowed);
  }
  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& raw(const std::string& key) {
    take(key);
    return j_.at(key);
  }
  Reader child(const std::string& key) {
    take(key);
    return Reader(j_.at(key), path_ + key + ".");
  }
  std::string field(const std::string& key) const { return path_ + key; }
  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) fail(ErrorCode::Parse, "config field '" + path_ + item.key() + "': unknown field");
  }

 private:
  bool take(const std::string& key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }
  std::string name() const { return path_.empty() ? "<root>" : path_.substr(0, path_.size() - 1); }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::vector<std::pair<std::string, PlanKind>> kPlanKinds{{"sppa", PlanKind::Sppa},
                                                               {"fibonacci", PlanKind::Fibonacci}};
const std::vector<std::pair<std::string, SppaMode>> kModes{{"spherical", SppaMode::Spherical},
                                                           {"faithful", SppaMode::Faithful}};
const std::vector<std::pair<std::string, Rounding>> kRoundings{{"half_away_from_zero", Rounding::HalfAwayFromZero},
                                                               {"half_to_even", Rounding::HalfToEven}};
const std::vector<std::pair<std::string, SequencerKind>> kSequencers{{"sppa", SequencerKind::Sppa},
                                                                     {"etsp", SequencerKind::Etsp}};
const std::vector<std::pair<std::string, OddRowTraversal>> kTraversals{{"zigzag", OddRowTraversal::Zigzag},
                                                                       {"double_pass", OddRowTraversal::DoublePass}};
const std::vector<std::pair<std::string, SceneFeature::Kind>> kFeatures{
    {"hemisphere", SceneFeature::Kind::Hemisphere},
    {"dome", SceneFeature::Kind::Dome},
    {"plane", SceneFeature::Kind::Plane}};

template <typename E>
std::string name_of(const std::vector<std::pair<std::string, E>>& options, E v) {
  for (const auto& o : options)
    if (o.second == v) return o.first;
  return "?";
}

void read_region(Reader r, ScanRegion& g) {
  r.number("h_min", g.h_min);
  r.number("h_max", g.h_max);
  r.number("v_min", g.v_min);
  r.number("v_max", g.v_max);
  r.number("distance", g.distance);
  r.vec("ooi", g.ooi);
  r.number("cam_yaw", g.cam_yaw);
  r.number("cam_pitch", g.cam_pitch);
  r.finish();
}

void read_camera(Reader r, CameraModel& c) {
  r.vec("position", c.position);
  r.number("yaw", c.yaw);
  r.number("pitch", c.pitch);
  r.number("aov_h", c.aov_h);
  r.number("aov_v", c.aov_v);
  r.number("body_radius", c.body_radius);
  r.finish();
}

void read_mpc(Reader r, MpcConfig& m) {
  r.count("horizon", m.horizon);
  r.number("dt", m.dt);
  r.number("w_position", m.w_position);
  r.number("w_control", m.w_control);
  r.number("w_obstacle", m.w_obstacle);
  r.number("w_rti", m.w_rti);
  r.number("w_orientation", m.w_orientation);
  r.number("w_orient_rate", m.w_orient_rate);
  r.number("r_detect_fov", m.r_detect_fov);
  r.number("r_avoid_fov", m.r_avoid_fov);
  r.number("rti_cap", m.rti_cap);
  r.number("accel_limit", m.accel_limit);
  r.number("vel_limit", m.vel_limit);
  r.number("yaw_rate_limit", m.yaw_rate_limit);
  r.number("pitch_rate_limit", m.pitch_rate_limit);
  r.number("pitch_min", m.pitch_min);
  r.number("pitch_max", m.pitch_max);
  r.number("uav_radius", m.uav_radius);
  r.number("obstacle_margin", m.obstacle_margin);
  r.number("hinge_softness", m.hinge_softness);
  r.count("cem_samples", m.cem_samples);
  r.count("cem_elites", m.cem_elites);
  r.count("cem_iterations", m.cem_iterations);
  r.count("refine_sweeps", m.refine_sweeps);
  r.get("seed", m.seed, "a non-negative integer");
  r.finish();
}

Json to_json(const MpcConfig& m) {
  return {{"horizon", m.horizon}, {"dt", m.dt}, {"w_position", m.w_position}, {"w_control", m.w_control},
          {"w_obstacle", m.w_obstacle}, {"w_rti", m.w_rti}, {"w_orientation", m.w_orientation},
          {"w_orient_rate", m.w_orient_rate}, {"r_detect_fov", m.r_detect_fov}, {"r_avoid_fov", m.r_avoid_fov},
          {"rti_cap", m.rti_cap}, {"accel_limit", m.accel_limit}, {"vel_limit", m.vel_limit},
          {"yaw_rate_limit", m.yaw_rate_limit}, {"pitch_rate_limit", m.pitch_rate_limit},
          {"pitch_min", m.pitch_min}, {"pitch_max", m.pitch_max}, {"uav_radius", m.uav_radius},
          {"obstacle_margin", m.obstacle_margin}, {"hinge_softness", m.hinge_softness},
          {"cem_samples", m.cem_samples}, {"cem_elites", m.cem_elites}, {"cem_iterations", m.cem_iterations},
          {"refine_sweeps", m.refine_sweeps}, {"seed", m.seed}};
}

std::array<double, 3> rgb_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::Parse, "config field '" + field + "': expected [r, g, b]");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const Json::exception&) {
    fail(ErrorCode::Parse, "config field '" + field + "': expected [r, g, b]");
  }
}

SceneSpec read_scene(Reader r) {
  SceneSpec s;
  s.features.clear();
  r.get("width", s.width, "an integer");
  r.get("height", s.height, "an integer");
  r.number("extent_m", s.extent_m);
  if (r.has("albedo")) s.albedo = rgb_from_json(r.raw("albedo"), r.field("albedo"));
  if (r.has("checker_albedo")) s.checker_albedo = rgb_from_json(r.raw("checker_albedo"), r.field("checker_albedo"));
  r.get("checker_cells", s.checker_cells, "an integer");
  r.number("specular_strength", s.specular_strength);
  r.number("specular_exponent", s.specular_exponent);
  r.flag("shadowing", s.shadowing);
  if (r.has("features")) {
    const Json& arr = r.raw("features");
    if (!arr.is_array()) fail(ErrorCode::Parse, "config field '" + r.field("features") + "': expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader f(arr[i], r.field("features") + "[" + std::to_string(i) + "].");
      SceneFeature feat;
      f.choice("type", feat.kind, kFeatures);
      if (f.has("center")) {
        const Json& c = f.raw("center");
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
          fail(ErrorCode::Parse, "config field '" + f.field("center") + "': expected [u, v]");
        feat.cu = c[0].get<double>();
        feat.cv = c[1].get<double>();
      }
      f.number("radius", feat.radius);
      f.number("footprint", feat.footprint);
      if (f.has("slope")) {
        const Json& c = f.raw("slope");
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
          fail(ErrorCode::Parse, "config field '" + f.field("slope") + "': expected [du, dv]");
        feat.slope_u = c[0].get<double>();
        feat.slope_v = c[1].get<double>();
      }
      f.finish();
      s.features.push_back(feat);
    }
  }
  r.finish();
  return s;
}

}  // namespace

std::string to_string(SequencerKind kind) { return name_of(kSequencers, kind); }
std::string to_string(OddRowTraversal t) { return name_of(kTraversals, t); }
std::string to_string(Rounding r) { return name_of(kRoundings, r); }

Json to_json(const SceneSpec& s) {
  Json features = Json::array();
  for (const auto& f : s.features) {
    Json j{{"type", name_of(kFeatures, f.kind)}};
    if (f.kind == SceneFeature::Kind::Plane) {
      j["slope"] = {f.slope_u, f.slope_v};
    } else {
      j["center"] = {f.cu, f.cv};
      j["radius"] = f.radius;
      if (f.kind == SceneFeature::Kind::Dome) j["footprint"] = f.footprint;
    }
    features.push_back(j);
  }
  return {{"width", s.width}, {"height", s.height}, {"extent_m", s.extent_m}, {"albedo", s.albedo},
          {"checker_albedo", s.checker_albedo}, {"checker_cells", s.checker_cells}, {"features", features},
          {"specular_strength", s.specular_strength}, {"specular_exponent", s.specular_exponent},
          {"shadowing", s.shadowing}};
}

SceneSpec scene_from_json(const Json& j) {
  SceneSpec s = read_scene(Reader(j, "scene."));
  s.validate();
  return s;
}

ObstacleSet MissionConfig::obstacle_set() const {
  ObstacleSet o;
  o.spheres = obstacles;
  o.camera = camera;
  o.camera_uav_radius = camera_uav_radius;
  return o;
}

CameraModel MissionConfig::default_camera() {
  CameraModel c;
  c.aov_h = kPi / 4.0;
  c.aov_v = kPi / 6.0;
  return c;
}

ScanRegion MissionConfig::default_region() {
  ScanRegion r;
  r.h_min = -1.3;
  r.h_max = 1.3;
  r.v_min = -1.3;
  r.v_max = -0.75;
  r.distance = 1.5;
  r.ooi = Vec3(3.0, 0.0, 0.0);
  return r;
}

void MissionConfig::validate() const {
  camera.validate();
  region.validate();
  mission.mpc.validate();
  obstacle_set().validate();
  scene.validate();
  require(mission.v_des > 0.0, "config field 'mission.v_des' must be positive");
  require(mission.t_stab >= 0.0, "config field 'mission.t_stab' must be non-negative");
  require(sigma >= 0.0, "config field 'sigma' must be non-negative");
  require(generator.v_s >= 2, "config field 'generator.v_s' must be at least 2");
  require(generator.n >= 1, "config field 'generator.n' must be positive");
  require(sequencer.etsp_restarts >= 1, "config field 'sequencer.etsp_restarts' must be positive");
  require(!output.empty(), "config field 'output' must not be empty");
}

Json to_json(const MissionConfig& c) {
  Json spheres = Json::array();
  for (const auto& s : c.obstacles) spheres.push_back({{"center", to_json(s.center)}, {"radius", s.radius}});
  const auto& ps = c.path_study;
  const auto& ns = c.noise_sweep;
  return {
      {"camera", to_json(c.camera)},
      {"region", to_json(c.region)},
      {"initial", to_json(c.initial)},
      {"generator", {{"kind", name_of(kPlanKinds, c.generator.kind)}, {"v_s", c.generator.v_s},
                     {"n", c.generator.n}, {"mode", name_of(kModes, c.generator.mode)},
                     {"rounding", name_of(kRoundings, c.generator.rounding)}}},
      {"sequencer", {{"kind", to_string(c.sequencer.kind)}, {"traversal", to_string(c.sequencer.traversal)},
                     {"etsp_restarts", c.sequencer.etsp_restarts}}},
      {"mission", {{"v_des", c.mission.v_des}, {"t_stab", c.mission.t_stab},
                   {"capture_tolerance", c.mission.capture_tolerance},
                   {"capture_timeout", c.mission.capture_timeout}, {"return_timeout", c.mission.return_timeout}}},
      {"mpc", to_json(c.mission.mpc)},
      {"obstacles", {{"spheres", spheres}, {"camera_uav_radius", c.camera_uav_radius}}},
      {"scene", c.scene_path.empty() ? to_json(c.scene) : Json(c.scene_path)},
      {"sigma", c.sigma},
      {"seed", c.seed},
      {"output", c.output},
      {"experiments",
       {{"path_lengths", {{"trials", ps.trials}, {"seed", ps.seed}, {"v_span_min", ps.v_span_min},
                          {"v_span_max", ps.v_span_max}, {"h_span_min", ps.h_span_min},
                          {"h_span_max", ps.h_span_max}, {"distance_min", ps.distance_min},
                          {"distance_max", ps.distance_max}, {"v_s_min", ps.v_s_min}, {"v_s_max", ps.v_s_max}}},
        {"noise_sweep", {{"sigmas", ns.sigmas}, {"trials", ns.trials}, {"plan_size", ns.plan_size},
                         {"truth_size", ns.truth_size}, {"seed", ns.seed}, {"region", to_json(ns.region)},
                         {"camera", to_json(ns.camera)}, {"initial", to_json(ns.initial)}}}}}};
}

MissionConfig config_from_json(const Json& j, const std::string& base_dir) {
  MissionConfig c;
  Reader root(j, "");
  if (root.has("camera")) read_camera(root.child("camera"), c.camera);
  // The window is relative to the camera unless the region says otherwise.
  c.region.cam_yaw = c.camera.yaw;
  c.region.cam_pitch = c.camera.pitch;
  if (root.has("region")) read_region(root.child("region"), c.region);
  root.vec("initial", c.initial);
  if (root.has("generator")) {
    Reader g = root.child("generator");
    g.choice("kind", c.generator.kind, kPlanKinds);
    g.count("v_s", c.generator.v_s);
    g.count("n", c.generator.n);
    g.choice("mode", c.generator.mode, kModes);
    g.choice("rounding", c.generator.rounding, kRoundings);
    g.finish();
  }
  if (root.has("sequencer")) {
    Reader s = root.child("sequencer");
    s.choice("kind", c.sequencer.kind, kSequencers);
    s.choice("traversal", c.sequencer.traversal, kTraversals);
    s.get("etsp_restarts", c.sequencer.etsp_restarts, "an integer");
    s.finish();
  }
  if (root.has("mission")) {
    Reader m = root.child("mission");
    m.number("v_des", c.mission.v_des);
    m.number("t_stab", c.mission.t_stab);
    m.number("capture_tolerance", c.mission.capture_tolerance);
    m.number("capture_timeout", c.mission.capture_timeout);
    m.number("return_timeout", c.mission.return_timeout);
    m.finish();
  }
  if (root.has("mpc")) read_mpc(root.child("mpc"), c.mission.mpc);
  if (root.has("obstacles")) {
    Reader o = root.child("obstacles");
    o.number("camera_uav_radius", c.camera_uav_radius);
    if (o.has("spheres")) {
      const Json& arr = o.raw("spheres");
      if (!arr.is_array()) fail(ErrorCode::Parse, "config field 'obstacles.spheres': expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader s(arr[i], "obstacles.spheres[" + std::to_string(i) + "].");
        Sphere sp;
        s.vec("center", sp.center);
        s.number("radius", sp.radius);
        s.finish();
        c.obstacles.push_back(sp);
      }
    }
    o.finish();
  }
  if (root.has("scene")) {
    const Json& s = root.raw("scene");
    if (s.is_string()) {
      fs::path p(s.get<std::string>());
      if (p.is_relative()) p = fs::path(base_dir) / p;
      if (!fs::exists(p)) fail(ErrorCode::Io, "config field 'scene': file " + p.string() + " does not exist");
      c.scene_path = p.string();
      c.scene = scene_from_json(read_json(p.string()));
    } else if (s.is_object()) {
      c.scene = scene_from_json(s);
    } else if (!s.is_null()) {
      fail(ErrorCode::Parse, "config field 'scene': expected a path, an object or null");
    }
  }
  root.number("sigma", c.sigma);
  root.get("seed", c.seed, "a non-negative integer");
  root.get("output", c.output, "a string");
  if (root.has("experiments")) {
    Reader e = root.child("experiments");
    if (e.has("path_lengths")) {
      Reader p = e.child("path_lengths");
      auto& ps = c.path_study;
      p.count("trials", ps.trials);
      p.get("seed", ps.seed, "a non-negative integer");
      p.number("v_span_min", ps.v_span_min);
      p.number("v_span_max", ps.v_span_max);
      p.number("h_span_min", ps.h_span_min);
      p.number("h_span_max", ps.h_span_max);
      p.number("distance_min", ps.distance_min);
      p.number("distance_max", ps.distance_max);
      p.count("v_s_min", ps.v_s_min);
      p.count("v_s_max", ps.v_s_max);
      p.finish();
    }
    if (e.has("noise_sweep")) {
      Reader n = e.child("noise_sweep");
      auto& ns = c.noise_sweep;
      n.get("sigmas", ns.sigmas, "an array of numbers");
      n.count("trials", ns.trials);
      n.count("plan_size", ns.plan_size);
      n.count("truth_size", ns.truth_size);
      n.get("seed", ns.seed, "a non-negative integer");
      if (n.has("region")) read_region(n.child("region"), ns.region);
      if (n.has("camera")) read_camera(n.child("camera"), ns.camera);
      n.vec("initial", ns.initial);
      n.finish();
    }
    e.finish();
  }
  root.finish();
  c.noise_sweep.scene = c.scene;
  try {
    c.validate();
  } catch (const Error& err) {
    fail(ErrorCode::Parse, std::string("invalid config: ") + err.what());
  }
  return c;
}

void apply_override(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorCode::InvalidArgument, "override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::exception&) {
    value = text;
  }
  Json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) fail(ErrorCode::InvalidArgument, "override key '" + key + "' has an empty component");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

MissionConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json j = path.empty() ? Json::object() : read_json(path);
  for (const auto& o : overrides) apply_override(j, o);
  const std::string base = path.empty() ? "." : fs::path(path).parent_path().string();
  return config_from_json(j, base.empty() ? "." : base);
}

LightingPlan make_plan(const MissionConfig& c) {
  if (c.generator.kind == PlanKind::Fibonacci) return fibonacci_positions(c.region, c.generator.n, c.initial);
  return sppa_positions(c.region, c.generator.v_s, c.initial, c.generator.mode, c.generator.rounding);
}

Sequence make_sequence(const MissionConfig& c, const LightingPlan& plan) {
  if (c.sequencer.kind == SequencerKind::Sppa) {
    if (plan.kind != PlanKind::Sppa)
      fail(ErrorCode::InvalidArgument, "the sppa sequencer needs an SPPA plan; use sequencer.kind = etsp");
    return sppa_sequence(plan, c.sequencer.traversal);
  }
  EtspOptions opts;
  opts.seed = c.seed;
  opts.restarts = c.sequencer.etsp_restarts;
  Sequence tour = etsp_tour(plan_points(plan), opts);
  return tour;
}

}  // namespace rti
