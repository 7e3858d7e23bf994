#pragma once

#include <cstddef>
#include <string>

#include "rti/config.hpp"

namespace rti {

struct DemoResult {
  std::size_t planned = 0;
  std::size_t captured = 0;
  std::size_t skipped = 0;
  std::size_t fallback_steps = 0;
  double sequence_length_m = 0.0;
  double flown_length_m = 0.0;
  double min_clearance = 0.0;
  double min_fov = 0.0;             // over every control step
  double min_fov_at_capture = 0.0;
  double normal_error_rad = 0.0;    // fitted vs analytic scene normals
  std::string manifest_path;
};

// plan -> sequence -> trajectory -> simulate -> capture -> fit -> normals,
// every artifact written under out_dir and linked from manifest.json.
DemoResult run_demo(const MissionConfig& config, const std::string& out_dir);

}  // namespace rti
