#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rti/capture.hpp"
#include "rti/lighting_plan.hpp"

namespace rti {

struct PathStudyConfig {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  double v_span_min = kPi / 12.0;
  double v_span_max = kPi / 2.2;
  double h_span_min = kPi / 6.0;
  double h_span_max = 2.0 * kPi;
  double distance_min = 1.0;
  double distance_max = 5.0;
  std::size_t v_s_min = 2;
  std::size_t v_s_max = 8;

  void validate() const;
};

struct PathTrial {
  std::size_t index = 0;
  ScanRegion region;
  std::size_t v_s = 0;
  Vec3 initial;
  std::size_t points = 0;  // grid size without P_i
  double sppa_length = 0.0;
  double etsp_length = 0.0;  // same grid, local-search ETSP
  double fib_length = 0.0;   // Fibonacci positions of equal count, same ETSP
  double sppa_seconds = 0.0;
  double etsp_seconds = 0.0;
  double fib_seconds = 0.0;

  double sppa_ratio() const { return sppa_length / etsp_length; }
  double fib_ratio() const { return fib_length / etsp_length; }
};

struct Percentile {
  double p = 0.0;
  double sppa_ratio = 0.0;
  double fib_ratio = 0.0;
};

struct PathStudyReport {
  PathStudyConfig config;
  std::vector<PathTrial> trials;
  std::vector<Percentile> percentiles;  // p = 0, 1, ..., 100
  double fraction_within_1_5 = 0.0;     // sppa / etsp <= 1.5
  double fraction_sppa_not_longer = 0.0;
  double max_sppa_seconds = 0.0;
  double max_etsp_seconds = 0.0;
  double max_fib_seconds = 0.0;
  double total_seconds = 0.0;
};

// Nearest-rank percentile of an unsorted sample, p in [0, 100].
double nearest_rank(std::vector<double> values, double p);

PathTrial path_trial(const PathStudyConfig& cfg, std::size_t index);
PathStudyReport path_length_study(const PathStudyConfig& cfg);

struct NoiseSweepConfig {
  std::vector<double> sigmas{0.0, 0.05, 0.1, 0.2, 0.3};
  std::size_t trials = 20;
  std::size_t plan_size = 60;
  std::size_t truth_size = 360;
  std::uint64_t seed = 1;
  ScanRegion region = default_region();
  CameraModel camera;
  Vec3 initial{3.0, -1.0, 1.0};
  SceneSpec scene = SceneSpec::default_scene();

  static ScanRegion default_region();
  void validate() const;
};

struct NoisePoint {
  double sigma = 0.0;
  std::vector<double> deltas;  // one per trial
  double mean = 0.0;
  double stddev = 0.0;
  double mean_light_gap = 0.0;  // recorded vs true lighting, radians
};

struct NoiseSweepReport {
  NoiseSweepConfig config;
  std::size_t plan_positions = 0;
  std::size_t truth_positions = 0;
  std::size_t truth_valid_pixels = 0;
  double truth_vs_analytic = 0.0;  // ground truth against the scene's own normals
  std::vector<NoisePoint> points;
};

NoiseSweepReport noise_sweep(const NoiseSweepConfig& cfg);

// Writers: CSV per-trial dump, JSON summary, SVG plot. Runtime statistics go
// to a separate *_timing.json so the other files are reproducible byte for byte.
void write_path_study(const std::string& dir, const PathStudyReport& report);
void write_noise_sweep(const std::string& dir, const NoiseSweepReport& report);
std::string path_study_json(const PathStudyReport& report);
std::string path_study_csv(const PathStudyReport& report);
std::string noise_sweep_json(const NoiseSweepReport& report);
std::string noise_sweep_csv(const NoiseSweepReport& report);

}  // namespace rti
