#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "rti/capture.hpp"
#include "rti/lighting_plan.hpp"
#include "rti/mission.hpp"
#include "rti/sequencing.hpp"
#include "rti/trajectory.hpp"

namespace rti {

using Json = nlohmann::json;

Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j, const std::string& field);

Json to_json(const ScanRegion& r);
ScanRegion region_from_json(const Json& j);
Json to_json(const CameraModel& c);
CameraModel camera_from_json(const Json& j);

Json to_json(const LightingPlan& plan);
LightingPlan plan_from_json(const Json& j);

Json to_json(const Sequence& seq);
Sequence sequence_from_json(const Json& j);
std::string sequence_csv(const Sequence& seq);

Json to_json(const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);

// One JSON object per control step.
std::string mission_log_jsonl(const MissionLog& log);
// Capture events, skipped positions and mission summary.
Json mission_captures_manifest(const MissionLog& log);
// Rebuilds the capture-relevant part of a log from its manifest.
MissionLog mission_from_manifest(const Json& j);

struct LpEntry {
  std::string name;
  double u = 0.0, v = 0.0, w = 0.0;
};

std::string format_lp(const std::vector<LpEntry>& entries);
std::vector<LpEntry> parse_lp(const std::string& text);
// Planned lighting vectors, one image name per plan position.
std::vector<LpEntry> plan_lp_entries(const LightingPlan& plan, const CameraModel& camera);
std::vector<LpEntry> capture_lp_entries(const CaptureSet& set);

// Directory with one PNG per capture, captures.json and captures.lp.
void save_capture_set(const std::string& dir, const CaptureSet& set);
CaptureSet load_capture_set(const std::string& dir);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);

}  // namespace rti
