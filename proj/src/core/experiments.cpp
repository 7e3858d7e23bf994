#include "rti/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "rti/common.hpp"
#include "rti/io.hpp"
#include "rti/mpc.hpp"
#include "rti/ptm.hpp"
#include "rti/sequencing.hpp"

namespace rti {

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Series {
  std::string name;
  std::string color;
  std::vector<double> x, y;
};

// Minimal static line chart.
std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series) {
  const double w = 640, h = 420, left = 70, right = 160, top = 40, bottom = 60;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  y0 = std::min(y0, 0.0);
  if (!(y1 > y0)) y1 = y0 + 1.0;
  y1 += 0.05 * (y1 - y0);
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    s << "<text x=\"" << fmt(px(xv), 1) << "\" y=\"" << h - bottom + 18 << "\" text-anchor=\"middle\">"
      << fmt(xv, 3) << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(yv) + 4, 1) << "\" text-anchor=\"end\">" << fmt(yv, 3)
      << "</text>\n";
  }
  s << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n";
  s << "<text x=\"18\" y=\"" << (top + h - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (top + h - bottom) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& ser = series[k];
    s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < ser.x.size(); ++i) s << fmt(px(ser.x[i]), 2) << ',' << fmt(py(ser.y[i]), 2) << ' ';
    s << "\"/>\n";
    const double ly = top + 20.0 * static_cast<double>(k);
    s << "<line x1=\"" << w - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << w - right + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << ser.color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << w - right + 35 << "\" y=\"" << ly + 4 << "\">" << ser.name << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

void PathStudyConfig::validate() const {
  require(trials >= 1, "path study needs at least one trial");
  require(0.0 < v_span_min && v_span_min <= v_span_max && v_span_max < kPi, "invalid vertical span range");
  require(0.0 < h_span_min && h_span_min <= h_span_max && h_span_max <= 2.0 * kPi, "invalid horizontal span range");
  require(0.0 < distance_min && distance_min <= distance_max, "invalid lighting distance range");
  require(2 <= v_s_min && v_s_min <= v_s_max, "invalid v_s range");
}

double nearest_rank(std::vector<double> values, double p) {
  require(!values.empty(), "percentile of an empty sample");
  require(p >= 0.0 && p <= 100.0, "percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  const auto rank = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9)));
  return values[std::min(rank, values.size()) - 1];
}

PathTrial path_trial(const PathStudyConfig& cfg, std::size_t index) {
  std::mt19937_64 rng(stream_seed(cfg.seed, index));
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  PathTrial t;
  t.index = index;
  const double v_span = uniform(cfg.v_span_min, cfg.v_span_max);
  const double h_span = uniform(cfg.h_span_min, cfg.h_span_max);
  // Keep the whole vertical window strictly inside (-pi/2, pi/2).
  const double v_room = kPi - v_span - 1e-6;
  t.region.v_min = -kPi / 2.0 + 5e-7 + uniform(0.0, v_room);
  t.region.v_max = t.region.v_min + v_span;
  t.region.h_min = uniform(-kPi, kPi);
  t.region.h_max = t.region.h_min + h_span;
  t.region.distance = uniform(cfg.distance_min, cfg.distance_max);
  t.region.ooi = {0.0, 0.0, 0.0};
  t.v_s = cfg.v_s_min + static_cast<std::size_t>(rng() % (cfg.v_s_max - cfg.v_s_min + 1));
  // P_i: a take-off point outside the cap, somewhere over the window.
  ScanRegion launch = t.region;
  launch.distance = t.region.distance * uniform(1.2, 2.0);
  t.initial = cap_point(launch, uniform(t.region.h_min, t.region.h_max), uniform(t.region.v_min, t.region.v_max));
  const EtspOptions etsp{stream_seed(cfg.seed ^ 0x5bd1e995ull, index), 4, 10};

  double c0 = thread_cpu_seconds();
  const LightingPlan plan = sppa_positions(t.region, t.v_s, t.initial);
  const Sequence sppa = sppa_sequence(plan);
  double c1 = thread_cpu_seconds();
  t.sppa_seconds = c1 - c0;
  t.sppa_length = sppa.length_m;
  t.points = plan.size();

  c0 = thread_cpu_seconds();
  const Sequence tour = etsp_tour(plan_points(plan), etsp);
  c1 = thread_cpu_seconds();
  t.etsp_seconds = c1 - c0;
  t.etsp_length = tour.length_m;

  c0 = thread_cpu_seconds();
  const LightingPlan fib = fibonacci_positions(t.region, plan.size(), t.initial);
  const Sequence fib_tour = etsp_tour(plan_points(fib), etsp);
  c1 = thread_cpu_seconds();
  t.fib_seconds = c1 - c0;
  t.fib_length = fib_tour.length_m;
  return t;
}

PathStudyReport path_length_study(const PathStudyConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  PathStudyReport r;
  r.config = cfg;
  r.trials.resize(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t i) { r.trials[i] = path_trial(cfg, i); });

  std::vector<double> sppa, fib;
  std::size_t within = 0, not_longer = 0;
  for (const auto& t : r.trials) {
    sppa.push_back(t.sppa_ratio());
    fib.push_back(t.fib_ratio());
    if (t.sppa_ratio() <= 1.5) ++within;
    if (t.sppa_length <= t.etsp_length * (1.0 + 1e-9)) ++not_longer;
    r.max_sppa_seconds = std::max(r.max_sppa_seconds, t.sppa_seconds);
    r.max_etsp_seconds = std::max(r.max_etsp_seconds, t.etsp_seconds);
    r.max_fib_seconds = std::max(r.max_fib_seconds, t.fib_seconds);
  }
  for (int p = 0; p <= 100; ++p)
    r.percentiles.push_back({static_cast<double>(p), nearest_rank(sppa, p), nearest_rank(fib, p)});
  const auto n = static_cast<double>(r.trials.size());
  r.fraction_within_1_5 = static_cast<double>(within) / n;
  r.fraction_sppa_not_longer = static_cast<double>(not_longer) / n;
  r.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ScanRegion NoiseSweepConfig::default_region() {
  ScanRegion r;
  r.h_min = -kPi / 3.0;
  r.h_max = kPi / 3.0;
  r.v_min = -kPi / 3.0;
  r.v_max = kPi / 3.0;
  r.distance = 1.5;
  r.ooi = {3.0, 0.0, 0.0};
  return r;
}

void NoiseSweepConfig::validate() const {
  require(!sigmas.empty(), "noise sweep needs at least one sigma");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    require(sigmas[i] >= 0.0 && std::isfinite(sigmas[i]), "sigma must be non-negative");
    require(i == 0 || sigmas[i] >= sigmas[i - 1], "sigma list must be sorted");
  }
  require(trials >= 1, "noise sweep needs at least one trial");
  require(plan_size >= kMinCaptures && truth_size >= kMinCaptures, "plans need at least 6 positions");
  region.validate();
  camera.validate();
  scene.validate();
}

NoiseSweepReport noise_sweep(const NoiseSweepConfig& cfg) {
  cfg.validate();
  NoiseSweepReport r;
  r.config = cfg;
  const Scene scene = Scene::build(cfg.scene);
  auto poses = [&](const LightingPlan& plan) {
    std::vector<Pose> out;
    for (const auto& p : plan.positions) {
      const Bearing b = desired_bearing(p, plan.region.ooi);
      out.push_back({p, b.yaw, b.pitch});
    }
    return out;
  };

  const LightingPlan truth_plan = sppa_plan_near_count(cfg.region, cfg.truth_size, cfg.initial);
  const auto truth_poses = poses(truth_plan);
  const CaptureSet truth_set = run_capture(truth_poses, scene, cfg.camera, cfg.region.ooi,
                                           cfg.region.distance, 0.0, cfg.seed);
  const NormalMap truth = normal_map(fit_ptm(truth_set));
  r.truth_positions = truth_plan.size();
  r.truth_valid_pixels = truth.valid_count();
  r.truth_vs_analytic = compare_normals(truth, scene_normals(scene)).delta;

  const LightingPlan plan = sppa_plan_near_count(cfg.region, cfg.plan_size, cfg.initial);
  const auto plan_poses = poses(plan);
  r.plan_positions = plan.size();
  const auto images = render_captures(scene, cfg.camera, cfg.region.ooi, plan_poses, cfg.region.distance);

  for (double sigma : cfg.sigmas) {
    NoisePoint pt;
    pt.sigma = sigma;
    double gap = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      // Trial t uses the same noise stream for every sigma.
      const auto lights = record_lights(cfg.camera, cfg.region.ooi, plan_poses, sigma, stream_seed(cfg.seed, t));
      std::vector<LightingVector> recorded;
      for (const auto& l : lights) {
        recorded.push_back(l.recorded);
        gap += angular_gap(l.recorded, l.truth);
      }
      const NormalMap nm = normal_map(quantize_ptm(fit_ptm_coefficients(recorded, images)));
      pt.deltas.push_back(compare_normals(nm, truth).delta);
    }
    const auto n = static_cast<double>(pt.deltas.size());
    pt.mean = std::accumulate(pt.deltas.begin(), pt.deltas.end(), 0.0) / n;
    double var = 0.0;
    for (double d : pt.deltas) var += (d - pt.mean) * (d - pt.mean);
    pt.stddev = pt.deltas.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    pt.mean_light_gap = gap / (n * static_cast<double>(plan_poses.size()));
    r.points.push_back(std::move(pt));
  }
  return r;
}

std::string path_study_csv(const PathStudyReport& report) {
  std::ostringstream s;
  s.precision(17);
  s << "trial,h_min,h_max,v_min,v_max,distance,v_s,initial_x,initial_y,initial_z,points,"
       "sppa_length,etsp_length,fib_length,sppa_ratio,fib_ratio\n";
  for (const auto& t : report.trials)
    s << t.index << ',' << t.region.h_min << ',' << t.region.h_max << ',' << t.region.v_min << ','
      << t.region.v_max << ',' << t.region.distance << ',' << t.v_s << ',' << t.initial.x << ',' << t.initial.y
      << ',' << t.initial.z << ',' << t.points << ',' << t.sppa_length << ',' << t.etsp_length << ','
      << t.fib_length << ',' << t.sppa_ratio() << ',' << t.fib_ratio() << '\n';
  return s.str();
}

std::string path_study_json(const PathStudyReport& report) {
  const auto& c = report.config;
  Json pct = Json::array();
  for (const auto& p : report.percentiles)
    pct.push_back({{"p", p.p}, {"sppa_over_etsp", p.sppa_ratio}, {"fib_over_etsp", p.fib_ratio}});
  const Json j{{"config",
                {{"trials", c.trials}, {"seed", c.seed}, {"v_span", {c.v_span_min, c.v_span_max}},
                 {"h_span", {c.h_span_min, c.h_span_max}}, {"distance", {c.distance_min, c.distance_max}},
                 {"v_s", {c.v_s_min, c.v_s_max}}}},
               {"percentile_method", "nearest rank"},
               {"fraction_sppa_within_1_5", report.fraction_within_1_5},
               {"fraction_sppa_not_longer", report.fraction_sppa_not_longer},
               {"percentiles", pct}};
  return j.dump(2) + "\n";
}

std::string noise_sweep_csv(const NoiseSweepReport& report) {
  std::ostringstream s;
  s.precision(17);
  s << "sigma,trial,delta\n";
  for (const auto& p : report.points)
    for (std::size_t t = 0; t < p.deltas.size(); ++t) s << p.sigma << ',' << t << ',' << p.deltas[t] << '\n';
  return s.str();
}

std::string noise_sweep_json(const NoiseSweepReport& report) {
  Json curve = Json::array();
  for (const auto& p : report.points)
    curve.push_back({{"sigma", p.sigma}, {"mean_delta", p.mean}, {"stddev_delta", p.stddev},
                     {"mean_lighting_gap", p.mean_light_gap}, {"trials", p.deltas.size()}});
  const auto& c = report.config;
  const Json j{{"config",
                {{"sigmas", c.sigmas}, {"trials", c.trials}, {"plan_size", c.plan_size},
                 {"truth_size", c.truth_size}, {"seed", c.seed}, {"region", to_json(c.region)},
                 {"camera", to_json(c.camera)}}},
               {"plan_positions", report.plan_positions},
               {"truth_positions", report.truth_positions},
               {"truth_valid_pixels", report.truth_valid_pixels},
               {"truth_vs_analytic", report.truth_vs_analytic},
               {"curve", curve}};
  return j.dump(2) + "\n";
}

void write_path_study(const std::string& dir, const PathStudyReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  write_text((d / "path_lengths.csv").string(), path_study_csv(report));
  write_text((d / "path_lengths.json").string(), path_study_json(report));
  double sum_sppa = 0, sum_etsp = 0, sum_fib = 0;
  for (const auto& t : report.trials) {
    sum_sppa += t.sppa_seconds;
    sum_etsp += t.etsp_seconds;
    sum_fib += t.fib_seconds;
  }
  const double n = static_cast<double>(report.trials.size());
  const Json timing{{"cpu_seconds_mean", {{"sppa", sum_sppa / n}, {"etsp", sum_etsp / n}, {"fib_etsp", sum_fib / n}}},
                    {"cpu_seconds_max", {{"sppa", report.max_sppa_seconds}, {"etsp", report.max_etsp_seconds},
                                         {"fib_etsp", report.max_fib_seconds}}},
                    {"wall_seconds_total", report.total_seconds},
                    {"workers", worker_count()}};
  write_json((d / "path_lengths_timing.json").string(), timing);
  Series s1{"SPPA / ETSP", "#1f77b4", {}, {}}, s2{"Fib-ETSP / ETSP", "#d62728", {}, {}};
  for (const auto& p : report.percentiles) {
    s1.x.push_back(p.p);
    s1.y.push_back(p.sppa_ratio);
    s2.x.push_back(p.p);
    s2.y.push_back(p.fib_ratio);
  }
  write_text((d / "path_lengths.svg").string(),
             svg_chart("Path length ratio percentiles", "percentile of trials", "length ratio", {s1, s2}));
}

void write_noise_sweep(const std::string& dir, const NoiseSweepReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  write_text((d / "noise_sweep.csv").string(), noise_sweep_csv(report));
  write_text((d / "noise_sweep.json").string(), noise_sweep_json(report));
  Series s{"mean delta", "#1f77b4", {}, {}};
  for (const auto& p : report.points) {
    s.x.push_back(p.sigma);
    s.y.push_back(p.mean);
  }
  write_text((d / "noise_sweep.svg").string(),
             svg_chart("Normal error vs localization noise", "sigma [m]", "mean angle [rad]", {s}));
}

}  // namespace rti
