#include "rti/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "rti/common.hpp"

namespace rti {

namespace fs = std::filesystem;

namespace {

template <typename T>
T field(const Json& j, const std::string& name, const std::string& ctx) {
  if (!j.is_object() || !j.contains(name)) fail(ErrorCode::Parse, ctx + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception&) {
    fail(ErrorCode::Parse, ctx + ": field '" + name + "' has the wrong type");
  }
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or_nan(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string label_kind(SequenceLabel::Kind k) {
  switch (k) {
    case SequenceLabel::Kind::Initial: return "initial";
    case SequenceLabel::Kind::Grid: return "grid";
    case SequenceLabel::Kind::Flat: return "flat";
  }
  return "initial";
}

Json to_json(const SequenceLabel& l) { return {{"kind", label_kind(l.kind)}, {"row", l.row}, {"col", l.col}}; }

SequenceLabel label_from_json(const Json& j) {
  const auto kind = field<std::string>(j, "kind", "sequence label");
  SequenceLabel l;
  if (kind == "initial") l.kind = SequenceLabel::Kind::Initial;
  else if (kind == "grid") l.kind = SequenceLabel::Kind::Grid;
  else if (kind == "flat") l.kind = SequenceLabel::Kind::Flat;
  else fail(ErrorCode::Parse, "sequence label: unknown kind '" + kind + "'");
  l.row = field<int>(j, "row", "sequence label");
  l.col = field<int>(j, "col", "sequence label");
  return l;
}

Json to_json(const LightingVector& l) { return Json::array({l.u, l.v, l.w}); }

LightingVector lighting_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::Parse, ctx + ": lighting vector must be [u, v, w]");
  LightingVector l;
  l.u = j[0].get<double>();
  l.v = j[1].get<double>();
  l.w = j[2].get<double>();
  l.valid = l.w >= 0.0;
  return l;
}

Json to_json(const PositionCost& c) {
  return {{"total", c.total}, {"position", c.position}, {"control", c.control},
          {"obstacle", c.obstacle}, {"rti", c.rti}};
}

Json to_json(const OrientationCost& c) {
  return {{"total", c.total}, {"orientation", c.orientation}, {"rate_change", c.rate_change}};
}

}  // namespace

Json to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const Json& j, const std::string& field_name) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    fail(ErrorCode::Parse, field_name + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json to_json(const ScanRegion& r) {
  return {{"h_min", r.h_min}, {"h_max", r.h_max}, {"v_min", r.v_min}, {"v_max", r.v_max},
          {"distance", r.distance}, {"ooi", to_json(r.ooi)}, {"cam_yaw", r.cam_yaw},
          {"cam_pitch", r.cam_pitch}};
}

ScanRegion region_from_json(const Json& j) {
  const std::string ctx = "region";
  ScanRegion r;
  r.h_min = field<double>(j, "h_min", ctx);
  r.h_max = field<double>(j, "h_max", ctx);
  r.v_min = field<double>(j, "v_min", ctx);
  r.v_max = field<double>(j, "v_max", ctx);
  r.distance = field<double>(j, "distance", ctx);
  r.ooi = vec3_from_json(field<Json>(j, "ooi", ctx), "region.ooi");
  r.cam_yaw = field<double>(j, "cam_yaw", ctx);
  r.cam_pitch = field<double>(j, "cam_pitch", ctx);
  return r;
}

Json to_json(const CameraModel& c) {
  return {{"position", to_json(c.position)}, {"yaw", c.yaw}, {"pitch", c.pitch},
          {"aov_h", c.aov_h}, {"aov_v", c.aov_v}, {"body_radius", c.body_radius}};
}

CameraModel camera_from_json(const Json& j) {
  const std::string ctx = "camera";
  CameraModel c;
  c.position = vec3_from_json(field<Json>(j, "position", ctx), "camera.position");
  c.yaw = field<double>(j, "yaw", ctx);
  c.pitch = field<double>(j, "pitch", ctx);
  c.aov_h = field<double>(j, "aov_h", ctx);
  c.aov_v = field<double>(j, "aov_v", ctx);
  c.body_radius = field<double>(j, "body_radius", ctx);
  return c;
}

Json to_json(const LightingPlan& plan) {
  Json rows = Json::array();
  for (const auto& r : plan.rows) rows.push_back({{"lambda_v", number_or_null(r.lambda_v)}, {"lambda_h", r.lambda_h}});
  Json positions = Json::array(), angles = Json::array();
  for (const auto& p : plan.positions) positions.push_back(to_json(p));
  for (const auto& a : plan.angles) angles.push_back(Json::array({a.h, a.v}));
  return {{"kind", to_string(plan.kind)},
          {"mode", to_string(plan.mode)},
          {"region", to_json(plan.region)},
          {"rows", rows},
          {"positions", positions},
          {"angles", angles},
          {"initial", to_json(plan.initial)}};
}

LightingPlan plan_from_json(const Json& j) {
  const std::string ctx = "plan";
  LightingPlan plan;
  const auto kind = field<std::string>(j, "kind", ctx);
  if (kind == to_string(PlanKind::Sppa)) plan.kind = PlanKind::Sppa;
  else if (kind == to_string(PlanKind::Fibonacci)) plan.kind = PlanKind::Fibonacci;
  else fail(ErrorCode::Parse, "plan: unknown kind '" + kind + "'");
  const auto mode = field<std::string>(j, "mode", ctx);
  if (mode == to_string(SppaMode::Spherical)) plan.mode = SppaMode::Spherical;
  else if (mode == to_string(SppaMode::Faithful)) plan.mode = SppaMode::Faithful;
  else fail(ErrorCode::Parse, "plan: unknown mode '" + mode + "'");
  plan.region = region_from_json(field<Json>(j, "region", ctx));
  try {
    for (const auto& r : field<Json>(j, "rows", ctx))
      plan.rows.push_back({number_or_nan(r.at("lambda_v")), r.at("lambda_h").get<std::vector<double>>()});
    for (const auto& p : field<Json>(j, "positions", ctx)) plan.positions.push_back(vec3_from_json(p, "plan.positions"));
    for (const auto& a : field<Json>(j, "angles", ctx)) plan.angles.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
  } catch (const Json::exception& e) {
    fail(ErrorCode::Parse, std::string("plan: malformed rows or positions: ") + e.what());
  }
  plan.initial = vec3_from_json(field<Json>(j, "initial", ctx), "plan.initial");
  std::size_t total = 0;
  for (const auto& r : plan.rows) total += r.lambda_h.size();
  if (total != plan.positions.size() || plan.angles.size() != plan.positions.size())
    fail(ErrorCode::Parse, "plan: rows, positions and angles disagree in size");
  return plan;
}

Json to_json(const Sequence& seq) {
  Json positions = Json::array(), labels = Json::array();
  for (const auto& p : seq.positions) positions.push_back(to_json(p));
  for (const auto& l : seq.labels) labels.push_back(to_json(l));
  return {{"positions", positions}, {"labels", labels}, {"length_m", seq.length_m}};
}

Sequence sequence_from_json(const Json& j) {
  const std::string ctx = "sequence";
  Sequence seq;
  for (const auto& p : field<Json>(j, "positions", ctx)) seq.positions.push_back(vec3_from_json(p, "sequence.positions"));
  for (const auto& l : field<Json>(j, "labels", ctx)) seq.labels.push_back(label_from_json(l));
  seq.length_m = field<double>(j, "length_m", ctx);
  if (seq.labels.size() != seq.positions.size()) fail(ErrorCode::Parse, "sequence: labels and positions disagree in size");
  return seq;
}

std::string sequence_csv(const Sequence& seq) {
  std::ostringstream out;
  out.precision(17);
  out << "index,x,y,z,label_kind,row,col\n";
  for (std::size_t i = 0; i < seq.positions.size(); ++i) {
    const auto& p = seq.positions[i];
    const auto& l = seq.labels[i];
    out << i << ',' << p.x << ',' << p.y << ',' << p.z << ',' << label_kind(l.kind) << ',' << l.row << ','
        << l.col << '\n';
  }
  return out.str();
}

Json to_json(const Trajectory& traj) {
  Json samples = Json::array();
  for (const auto& s : traj.samples)
    samples.push_back({{"time", s.time},
                       {"position", to_json(s.position)},
                       {"hold", s.is_rti_hold},
                       {"rti_index", s.rti_index ? Json(*s.rti_index) : Json(nullptr)}});
  return {{"dt", traj.dt}, {"d_rti", traj.d_rti}, {"n_hover", traj.n_hover},
          {"path_length_m", traj.path_length()}, {"samples", samples}};
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out.precision(17);
  out << "index,time,x,y,z,hold,rti_index\n";
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    out << i << ',' << s.time << ',' << s.position.x << ',' << s.position.y << ',' << s.position.z << ','
        << (s.is_rti_hold ? 1 : 0) << ',';
    if (s.rti_index) out << *s.rti_index;
    out << '\n';
  }
  return out.str();
}

std::string mission_log_jsonl(const MissionLog& log) {
  std::string out;
  const Json camera{{"position", to_json(log.camera.position)}, {"yaw", log.camera.yaw}, {"pitch", log.camera.pitch}};
  for (const auto& r : log.records) {
    Json j{{"time", r.time},
           {"light", {{"position", to_json(r.light_position)},
                      {"velocity", to_json(r.light_velocity)},
                      {"yaw", r.light_yaw},
                      {"pitch", r.light_pitch}}},
           {"camera", camera},
           {"reference", to_json(r.reference)},
           {"costs", {{"position", to_json(r.position_cost)}, {"orientation", to_json(r.orientation_cost)}}},
           {"clearance", r.clearance},
           {"fov", r.fov},
           {"fallback", r.fallback},
           {"capture", r.capture},
           {"capture_id", r.capture_id ? Json(*r.capture_id) : Json(nullptr)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

Json mission_captures_manifest(const MissionLog& log) {
  Json captures = Json::array(), skipped = Json::array();
  for (const auto& c : log.captures)
    captures.push_back({{"id", c.id},
                        {"rti_index", c.rti_index},
                        {"label", to_json(c.label)},
                        {"time", c.time},
                        {"true_position", to_json(c.true_position)},
                        {"commanded_position", to_json(c.commanded_position)},
                        {"light_yaw", c.light_yaw},
                        {"light_pitch", c.light_pitch},
                        {"lighting_vector", to_json(c.lighting)}});
  for (const auto& s : log.skipped)
    skipped.push_back({{"rti_index", s.rti_index}, {"commanded_position", to_json(s.commanded_position)},
                       {"reason", s.reason}});
  return {{"camera", to_json(log.camera)},
          {"ooi", to_json(log.ooi)},
          {"dt", log.dt},
          {"steps", log.records.size()},
          {"duration_s", log.records.empty() ? 0.0 : log.records.back().time},
          {"flown_length_m", log.flown_length()},
          {"fallback_steps", log.fallback_steps},
          {"captures", captures},
          {"skipped", skipped}};
}

MissionLog mission_from_manifest(const Json& j) {
  const std::string ctx = "mission manifest";
  MissionLog log;
  log.camera = camera_from_json(field<Json>(j, "camera", ctx));
  log.ooi = vec3_from_json(field<Json>(j, "ooi", ctx), "mission.ooi");
  log.dt = field<double>(j, "dt", ctx);
  log.fallback_steps = field<std::size_t>(j, "fallback_steps", ctx);
  for (const auto& c : field<Json>(j, "captures", ctx)) {
    CaptureEvent e;
    e.id = field<std::size_t>(c, "id", "capture");
    e.rti_index = field<std::size_t>(c, "rti_index", "capture");
    e.label = label_from_json(field<Json>(c, "label", "capture"));
    e.time = field<double>(c, "time", "capture");
    e.true_position = vec3_from_json(field<Json>(c, "true_position", "capture"), "capture.true_position");
    e.commanded_position = vec3_from_json(field<Json>(c, "commanded_position", "capture"), "capture.commanded_position");
    e.light_yaw = field<double>(c, "light_yaw", "capture");
    e.light_pitch = field<double>(c, "light_pitch", "capture");
    e.lighting = lighting_from_json(field<Json>(c, "lighting_vector", "capture"), "capture");
    log.captures.push_back(e);
  }
  for (const auto& s : field<Json>(j, "skipped", ctx))
    log.skipped.push_back({field<std::size_t>(s, "rti_index", "skipped"),
                           vec3_from_json(field<Json>(s, "commanded_position", "skipped"), "skipped.commanded_position"),
                           field<std::string>(s, "reason", "skipped")});
  return log;
}

std::string format_lp(const std::vector<LpEntry>& entries) {
  std::string out = std::to_string(entries.size()) + "\n";
  char line[512];
  for (const auto& e : entries) {
    require(!e.name.empty() && e.name.find_first_of(" \t\n") == std::string::npos,
            ".lp image names must be non-empty and contain no whitespace");
    std::snprintf(line, sizeof line, "%s %.9f %.9f %.9f\n", e.name.c_str(), e.u, e.v, e.w);
    out += line;
  }
  return out;
}

std::vector<LpEntry> parse_lp(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t count = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> count))
    fail(ErrorCode::Parse, ".lp: line 1 must hold the image count");
  std::vector<LpEntry> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) fail(ErrorCode::Parse, ".lp: expected " + std::to_string(count) + " entries");
    std::istringstream ls(line);
    LpEntry e;
    if (!(ls >> e.name >> e.u >> e.v >> e.w))
      fail(ErrorCode::Parse, ".lp: line " + std::to_string(i + 2) + " is not '<name> <l_u> <l_v> <l_w>'");
    out.push_back(e);
  }
  return out;
}

std::vector<LpEntry> plan_lp_entries(const LightingPlan& plan, const CameraModel& camera) {
  std::vector<LpEntry> out;
  char name[32];
  for (std::size_t i = 0; i < plan.positions.size(); ++i) {
    const LightingVector l = lighting_vector(plan.positions[i], plan.region.ooi, camera);
    std::snprintf(name, sizeof name, "capture_%03zu.png", i);
    out.push_back({name, l.u, l.v, l.w});
  }
  return out;
}

std::vector<LpEntry> capture_lp_entries(const CaptureSet& set) {
  std::vector<LpEntry> out;
  for (const auto& c : set.captures) out.push_back({c.name, c.recorded.u, c.recorded.v, c.recorded.w});
  return out;
}

void save_capture_set(const std::string& dir, const CaptureSet& set) {
  fs::create_directories(dir);
  Json captures = Json::array();
  for (const auto& c : set.captures) {
    write_png((fs::path(dir) / c.name).string(), c.image);
    captures.push_back({{"image", c.name},
                        {"recorded_lighting", to_json(c.recorded)},
                        {"true_lighting", to_json(c.truth)},
                        {"true_position", to_json(c.true_position)},
                        {"recorded_position", to_json(c.recorded_position)}});
  }
  const Json manifest{{"camera", to_json(set.camera)},
                      {"ooi", to_json(set.ooi)},
                      {"sigma", set.sigma},
                      {"seed", set.seed},
                      {"few_captures", set.few_captures},
                      {"lp_file", "captures.lp"},
                      {"captures", captures}};
  write_json((fs::path(dir) / "captures.json").string(), manifest);
  write_text((fs::path(dir) / "captures.lp").string(), format_lp(capture_lp_entries(set)));
}

CaptureSet load_capture_set(const std::string& dir) {
  const fs::path root = fs::is_directory(dir) ? fs::path(dir) : fs::path(dir).parent_path();
  const fs::path manifest_path = fs::is_directory(dir) ? root / "captures.json" : fs::path(dir);
  const Json j = read_json(manifest_path.string());
  const std::string ctx = "capture manifest";
  CaptureSet set;
  set.camera = camera_from_json(field<Json>(j, "camera", ctx));
  set.ooi = vec3_from_json(field<Json>(j, "ooi", ctx), "captures.ooi");
  set.sigma = field<double>(j, "sigma", ctx);
  set.seed = field<std::uint64_t>(j, "seed", ctx);
  for (const auto& c : field<Json>(j, "captures", ctx)) {
    Capture cap;
    cap.name = field<std::string>(c, "image", "capture");
    cap.image = read_png((root / cap.name).string());
    cap.recorded = lighting_from_json(field<Json>(c, "recorded_lighting", "capture"), "capture");
    cap.truth = lighting_from_json(field<Json>(c, "true_lighting", "capture"), "capture");
    cap.true_position = vec3_from_json(field<Json>(c, "true_position", "capture"), "capture.true_position");
    cap.recorded_position = vec3_from_json(field<Json>(c, "recorded_position", "capture"), "capture.recorded_position");
    if (!set.captures.empty() && (cap.image.width != set.captures.front().image.width ||
                                  cap.image.height != set.captures.front().image.height))
      fail(ErrorCode::Parse, "capture " + cap.name + " differs in size from the first capture");
    set.captures.push_back(std::move(cap));
  }
  set.few_captures = set.captures.size() < kMinCaptures;
  return set;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorCode::Io, "failed writing " + path);
}

Json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    fail(ErrorCode::Parse, path + ":" + std::to_string(line) + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace rti
