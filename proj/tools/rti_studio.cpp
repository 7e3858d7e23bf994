// rti-studio: command-line front end over the rtistudio C API.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtistudio.h"

namespace fs = std::filesystem;

namespace {

constexpr int kUsageExit = 2;

// Pipeline errors exit with 10 + status so each error class stays distinct
// from usage errors.
struct Failure {
  rti_status status;
};

void check(rti_status status) {
  if (status != RTI_OK) throw Failure{status};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Config = Handle<rti_config, rti_config_free>;
using Plan = Handle<rti_plan, rti_plan_free>;
using Sequence = Handle<rti_sequence, rti_sequence_free>;
using Trajectory = Handle<rti_trajectory, rti_trajectory_free>;
using Mission = Handle<rti_mission, rti_mission_free>;
using Scene = Handle<rti_scene, rti_scene_free>;
using Captures = Handle<rti_captures, rti_captures_free>;
using Ptm = Handle<rti_ptm, rti_ptm_free>;
using Normals = Handle<rti_normals, rti_normals_free>;

struct Global {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

// JSON string literal for a config override value.
std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// Loads the config, applies --set and per-command overrides, and returns the
// output directory.
std::string load(Config& cfg, const Global& g, const std::vector<std::string>& extra) {
  if (g.config_path.empty())
    check(rti_config_default(cfg.out()));
  else
    check(rti_config_load(g.config_path.c_str(), cfg.out()));
  std::vector<std::string> all(g.sets);
  all.insert(all.end(), extra.begin(), extra.end());
  if (g.seed) all.push_back("seed=" + std::to_string(*g.seed));
  if (!g.out.empty()) all.push_back("output=" + quoted(g.out));
  std::vector<const char*> ptrs;
  for (const auto& s : all) ptrs.push_back(s.c_str());
  check(rti_config_set_many(cfg.get(), ptrs.data(), ptrs.size()));
  char* out = nullptr;
  check(rti_config_output_dir(cfg.get(), &out));
  std::string dir(out);
  rti_string_free(out);
  fs::create_directories(dir);
  return dir;
}

template <typename T>
void override_if(std::vector<std::string>& extra, const std::optional<T>& v, const std::string& key) {
  if (!v) return;
  if constexpr (std::is_same_v<T, std::string>)
    extra.push_back(key + "=" + quoted(*v));
  else
    extra.push_back(key + "=" + std::to_string(*v));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-UAV reflectance transformation imaging studio"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--config", g.config_path, "JSON mission config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for every stochastic step");
  app.add_option("--out", g.out, "Output directory (overrides config 'output')");
  app.add_option("--set", g.sets, "Config override key=value, dotted keys, repeatable");
  app.add_flag_callback("--version", [] {
    std::printf("rti-studio %s\n", rti_version());
    throw CLI::Success();
  });

  std::function<void()> action;
  std::vector<std::string> extra;

  // plan
  std::optional<std::string> generator, mode, rounding;
  std::optional<std::size_t> v_s, n_fib;
  auto* plan_cmd = app.add_subcommand("plan", "Generate lighting positions (plan.json, plan.lp)");
  plan_cmd->add_option("--generator", generator, "sppa | fibonacci")->check(CLI::IsMember({"sppa", "fibonacci"}));
  plan_cmd->add_option("--v-s", v_s, "SPPA vertical sample count");
  plan_cmd->add_option("--n", n_fib, "Fibonacci position count");
  plan_cmd->add_option("--mode", mode, "spherical | faithful")->check(CLI::IsMember({"spherical", "faithful"}));
  plan_cmd->add_option("--rounding", rounding, "half_away_from_zero | half_to_even")
      ->check(CLI::IsMember({"half_away_from_zero", "half_to_even"}));
  plan_cmd->callback([&] {
    override_if(extra, generator, "generator.kind");
    override_if(extra, v_s, "generator.v_s");
    override_if(extra, n_fib, "generator.n");
    override_if(extra, mode, "generator.mode");
    override_if(extra, rounding, "generator.rounding");
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Plan plan;
      check(rti_plan_generate(cfg.get(), plan.out()));
      check(rti_plan_save_json(plan.get(), join(dir, "plan.json").c_str()));
      check(rti_plan_save_lp(plan.get(), cfg.get(), join(dir, "plan.lp").c_str()));
      std::printf("positions: %zu\nrows:", rti_plan_size(plan.get()));
      for (std::size_t r = 0; r < rti_plan_row_count(plan.get()); ++r) {
        std::size_t k = 0;
        check(rti_plan_row_size(plan.get(), r, &k));
        std::printf(" %zu", k);
      }
      std::printf("\nwrote %s, %s\n", join(dir, "plan.json").c_str(), join(dir, "plan.lp").c_str());
    };
  });

  // sequence
  std::string plan_path, sequence_path, mission_path, captures_path, ptm_path;
  std::optional<std::string> sequencer, traversal;
  auto* seq_cmd = app.add_subcommand("sequence", "Order a plan into a closed visit sequence");
  seq_cmd->add_option("--plan", plan_path, "plan.json (default <out>/plan.json)");
  seq_cmd->add_option("--sequencer", sequencer, "sppa | etsp")->check(CLI::IsMember({"sppa", "etsp"}));
  seq_cmd->add_option("--traversal", traversal, "zigzag | double_pass")->check(CLI::IsMember({"zigzag", "double_pass"}));
  seq_cmd->callback([&] {
    override_if(extra, sequencer, "sequencer.kind");
    override_if(extra, traversal, "sequencer.traversal");
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Plan plan;
      check(rti_plan_load((plan_path.empty() ? join(dir, "plan.json") : plan_path).c_str(), plan.out()));
      Sequence seq;
      check(rti_sequence_generate(cfg.get(), plan.get(), seq.out()));
      check(rti_sequence_save_json(seq.get(), join(dir, "sequence.json").c_str()));
      check(rti_sequence_save_csv(seq.get(), join(dir, "sequence.csv").c_str()));
      std::printf("positions: %zu\nlength_m: %.6f\nwrote %s\n", rti_sequence_size(seq.get()),
                  rti_sequence_length(seq.get()), join(dir, "sequence.json").c_str());
    };
  });

  // trajectory
  auto* traj_cmd = app.add_subcommand("trajectory", "Sample a sequence into a timed reference");
  traj_cmd->add_option("--sequence", sequence_path, "sequence.json (default <out>/sequence.json)");
  traj_cmd->callback([&] {
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Sequence seq;
      check(rti_sequence_load((sequence_path.empty() ? join(dir, "sequence.json") : sequence_path).c_str(), seq.out()));
      Trajectory traj;
      check(rti_trajectory_generate(cfg.get(), seq.get(), traj.out()));
      check(rti_trajectory_save_json(traj.get(), join(dir, "trajectory.json").c_str()));
      check(rti_trajectory_save_csv(traj.get(), join(dir, "trajectory.csv").c_str()));
      std::printf("samples: %zu\nhover_samples: %zu\nwrote %s\n", rti_trajectory_sample_count(traj.get()),
                  rti_trajectory_hover_count(traj.get()), join(dir, "trajectory.json").c_str());
    };
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Fly the mission with the MPC tracker");
  sim_cmd->add_option("--plan", plan_path, "plan.json (default <out>/plan.json)");
  sim_cmd->add_option("--sequence", sequence_path, "sequence.json (default <out>/sequence.json)");
  sim_cmd->callback([&] {
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Plan plan;
      check(rti_plan_load((plan_path.empty() ? join(dir, "plan.json") : plan_path).c_str(), plan.out()));
      Sequence seq;
      check(rti_sequence_load((sequence_path.empty() ? join(dir, "sequence.json") : sequence_path).c_str(), seq.out()));
      Mission mission;
      check(rti_mission_simulate(cfg.get(), plan.get(), seq.get(), mission.out()));
      check(rti_mission_save(mission.get(), dir.c_str()));
      std::printf("steps: %zu\ncaptures: %zu of %zu\nskipped: %zu\nflown_length_m: %.6f\nmin_clearance_m: %.6f\n"
                  "min_fov_m: %.6f\nwrote %s\n",
                  rti_mission_step_count(mission.get()), rti_mission_capture_count(mission.get()),
                  rti_plan_size(plan.get()), rti_mission_skipped_count(mission.get()),
                  rti_mission_flown_length(mission.get()), rti_mission_min_clearance(mission.get()),
                  rti_mission_min_fov(mission.get()), join(dir, "mission_log.jsonl").c_str());
    };
  });

  // capture
  std::optional<double> sigma;
  std::string scene_path;
  auto* cap_cmd = app.add_subcommand("capture", "Render the capture set for a mission or a plan");
  auto* from_mission = cap_cmd->add_option("--mission", mission_path, "mission_captures.json");
  cap_cmd->add_option("--plan", plan_path, "plan.json, capturing every plan position")->excludes(from_mission);
  cap_cmd->add_option("--sigma", sigma, "Localization noise std [m]");
  cap_cmd->add_option("--scene", scene_path, "Scene JSON (default: config scene)");
  cap_cmd->callback([&] {
    override_if(extra, sigma, "sigma");
    if (!scene_path.empty()) extra.push_back("scene=" + quoted(fs::absolute(scene_path).string()));
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Scene scene;
      check(rti_scene_from_config(cfg.get(), scene.out()));
      Captures caps;
      if (!plan_path.empty()) {
        Plan plan;
        check(rti_plan_load(plan_path.c_str(), plan.out()));
        check(rti_capture_from_plan(cfg.get(), scene.get(), plan.get(), caps.out()));
      } else {
        Mission mission;
        check(rti_mission_load_manifest(
            (mission_path.empty() ? join(dir, "mission_captures.json") : mission_path).c_str(), mission.out()));
        check(rti_capture_from_mission(cfg.get(), scene.get(), mission.get(), caps.out()));
      }
      const auto cap_dir = join(dir, "captures");
      check(rti_captures_save(caps.get(), cap_dir.c_str()));
      std::printf("captures: %zu\n", rti_captures_count(caps.get()));
      if (rti_captures_too_few(caps.get()))
        std::fprintf(stderr, "warning: fewer than 6 captures, a PTM fit will be rejected\n");
      std::printf("wrote %s\n", join(cap_dir, "captures.json").c_str());
    };
  });

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a PTM to a capture set (ptm.rtiptm)");
  fit_cmd->add_option("--captures", captures_path, "capture directory (default <out>/captures)");
  fit_cmd->callback([&] {
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Captures caps;
      check(rti_captures_load((captures_path.empty() ? join(dir, "captures") : captures_path).c_str(), caps.out()));
      Ptm ptm;
      check(rti_ptm_fit(caps.get(), ptm.out()));
      check(rti_ptm_save(ptm.get(), join(dir, "ptm.rtiptm").c_str()));
      std::printf("size: %dx%d\nwrote %s\n", rti_ptm_width(ptm.get()), rti_ptm_height(ptm.get()),
                  join(dir, "ptm.rtiptm").c_str());
    };
  });

  // relight
  double lu = 0.0, lv = 0.0;
  std::string image_path;
  auto* relight_cmd = app.add_subcommand("relight", "Relight a PTM at (l_u, l_v)");
  relight_cmd->add_option("--ptm", ptm_path, "ptm.rtiptm (default <out>/ptm.rtiptm)");
  relight_cmd->add_option("--lu", lu, "l_u")->required();
  relight_cmd->add_option("--lv", lv, "l_v")->required();
  relight_cmd->add_option("--image", image_path, "output PNG (default <out>/relight.png)");
  relight_cmd->callback([&] {
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Ptm ptm;
      check(rti_ptm_load((ptm_path.empty() ? join(dir, "ptm.rtiptm") : ptm_path).c_str(), ptm.out()));
      const auto out = image_path.empty() ? join(dir, "relight.png") : image_path;
      check(rti_ptm_relight_png(ptm.get(), lu, lv, out.c_str()));
      std::printf("wrote %s\n", out.c_str());
    };
  });

  // normals
  auto* normals_cmd = app.add_subcommand("normals", "Extract the normal map of a PTM");
  normals_cmd->add_option("--ptm", ptm_path, "ptm.rtiptm (default <out>/ptm.rtiptm)");
  normals_cmd->callback([&] {
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Ptm ptm;
      check(rti_ptm_load((ptm_path.empty() ? join(dir, "ptm.rtiptm") : ptm_path).c_str(), ptm.out()));
      Normals normals;
      check(rti_normals_from_ptm(ptm.get(), normals.out()));
      check(rti_normals_save(normals.get(), join(dir, "normals.png").c_str(), join(dir, "normals.nrm").c_str()));
      std::printf("valid_pixels: %zu\nwrote %s, %s\n", rti_normals_valid_count(normals.get()),
                  join(dir, "normals.png").c_str(), join(dir, "normals.nrm").c_str());
    };
  });

  // compare
  std::string map_a, map_b, heatmap_path;
  bool against_scene = false;
  auto* cmp_cmd = app.add_subcommand("compare", "Mean angle between two normal maps");
  cmp_cmd->add_option("--a", map_a, "normal sidecar (.nrm) or PNG")->required();
  auto* b_opt = cmp_cmd->add_option("--b", map_b, "normal sidecar (.nrm) or PNG");
  cmp_cmd->add_flag("--scene-normals", against_scene, "compare against the config scene's analytic normals")
      ->excludes(b_opt);
  cmp_cmd->add_option("--heatmap", heatmap_path, "heatmap PNG (default <out>/normals_compare.png)");
  cmp_cmd->callback([&] {
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      Normals a, b;
      check(rti_normals_load(map_a.c_str(), a.out()));
      if (against_scene) {
        Scene scene;
        check(rti_scene_from_config(cfg.get(), scene.out()));
        check(rti_normals_from_scene(scene.get(), b.out()));
      } else {
        if (map_b.empty()) throw CLI::RequiredError("--b or --scene-normals");
        check(rti_normals_load(map_b.c_str(), b.out()));
      }
      const auto heat = heatmap_path.empty() ? join(dir, "normals_compare.png") : heatmap_path;
      double delta = 0.0;
      check(rti_normals_compare(a.get(), b.get(), &delta, heat.c_str()));
      std::printf("delta_rad: %.9f\nwrote %s\n", delta, heat.c_str());
    };
  });

  // experiment
  std::optional<std::size_t> trials;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a study");
  exp_cmd->require_subcommand(1);
  auto* path_cmd = exp_cmd->add_subcommand("path-lengths", "SPPA vs ETSP vs Fibonacci path lengths");
  path_cmd->add_option("--trials", trials, "number of random instances");
  path_cmd->callback([&] {
    override_if(extra, trials, "experiments.path_lengths.trials");
    action = [&] {
      Config cfg;
      const auto dir = join(load(cfg, g, extra), "experiments");
      double within = 0.0, not_longer = 0.0;
      check(rti_experiment_path_lengths(cfg.get(), dir.c_str(), &within, &not_longer));
      std::printf("fraction_sppa_within_1_5: %.4f\nfraction_sppa_not_longer: %.4f\nwrote %s\n", within, not_longer,
                  join(dir, "path_lengths.json").c_str());
    };
  });
  auto* noise_cmd = exp_cmd->add_subcommand("noise-sweep", "Normal error against localization noise");
  noise_cmd->add_option("--trials", trials, "trials per sigma");
  noise_cmd->callback([&] {
    override_if(extra, trials, "experiments.noise_sweep.trials");
    action = [&] {
      Config cfg;
      const auto dir = join(load(cfg, g, extra), "experiments");
      std::vector<double> means(64);
      std::size_t count = 0;
      check(rti_experiment_noise_sweep(cfg.get(), dir.c_str(), means.data(), means.size(), &count));
      std::printf("mean_delta_rad:");
      for (std::size_t i = 0; i < count && i < means.size(); ++i) std::printf(" %.6f", means[i]);
      std::printf("\nwrote %s\n", join(dir, "noise_sweep.json").c_str());
    };
  });

  // demo
  auto* demo_cmd = app.add_subcommand("demo", "End-to-end run writing every artifact and a manifest");
  demo_cmd->callback([&] {
    action = [&] {
      Config cfg;
      const auto dir = load(cfg, g, extra);
      std::size_t planned = 0, captured = 0;
      check(rti_demo(cfg.get(), dir.c_str(), &planned, &captured));
      std::printf("planned: %zu\ncaptured: %zu\nwrote %s\n", planned, captured, join(dir, "manifest.json").c_str());
    };
  });

  try {
    app.parse(argc, argv);
    if (action) action();
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageExit;
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", rti_status_name(f.status), rti_last_error());
    return 10 + static_cast<int>(f.status);
  }
  return 0;
}
