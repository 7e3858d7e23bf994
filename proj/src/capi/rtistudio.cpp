#include "rtistudio.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "rti/common.hpp"
#include "rti/config.hpp"
#include "rti/pipeline.hpp"
#include "rti/ptm.hpp"

struct rti_config {
  rti::Json json = rti::Json::object();
  std::string base_dir = ".";
  rti::MissionConfig value;
};
struct rti_plan {
  rti::LightingPlan value;
};
struct rti_sequence {
  rti::Sequence value;
};
struct rti_trajectory {
  rti::Trajectory value;
};
struct rti_mission {
  rti::MissionLog value;
};
struct rti_scene {
  rti::Scene value;
};
struct rti_captures {
  rti::CaptureSet value;
};
struct rti_ptm {
  rti::PtmImage value;
};
struct rti_normals {
  rti::NormalMap value;
};

namespace {

thread_local std::string last_error;

rti_status set_error(rti_status status, const std::string& what) {
  last_error = what;
  return status;
}

// Runs body and converts any exception into a status code.
template <typename F>
rti_status guarded(F&& body) {
  try {
    body();
    return RTI_OK;
  } catch (const rti::Error& e) {
    return set_error(static_cast<rti_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RTI_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RTI_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(RTI_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (!p) rti::fail(rti::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename H, typename T>
rti_status make_handle(H** out, T&& value) {
  *out = new H{std::forward<T>(value)};
  return RTI_OK;
}

}  // namespace

extern "C" {

const char* rti_version(void) { return "1.0.0"; }

const char* rti_last_error(void) { return last_error.c_str(); }

const char* rti_status_name(rti_status status) {
  switch (status) {
    case RTI_OK: return "ok";
    case RTI_ERR_INTERNAL: return "internal error";
    default:
      if (status >= RTI_ERR_INVALID_ARGUMENT && status <= RTI_ERR_UNDEFINED_MEAN)
        return rti::to_string(static_cast<rti::ErrorCode>(status));
      return "unknown status";
  }
}

void rti_string_free(char* s) { delete[] s; }

rti_status rti_config_default(rti_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rti_config{};
  });
}

rti_status rti_config_load(const char* path, rti_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto cfg = std::make_unique<rti_config>();
    cfg->json = rti::read_json(path);
    const auto parent = std::filesystem::path(path).parent_path().string();
    cfg->base_dir = parent.empty() ? "." : parent;
    cfg->value = rti::config_from_json(cfg->json, cfg->base_dir);
    *out = cfg.release();
  });
}

rti_status rti_config_set(rti_config* config, const char* assignment) {
  return guarded([&] {
    need(config, "config");
    need(assignment, "assignment");
    rti::Json next = config->json;
    rti::apply_override(next, assignment);
    config->value = rti::config_from_json(next, config->base_dir);
    config->json = std::move(next);
  });
}

rti_status rti_config_set_many(rti_config* config, const char* const* assignments, size_t count) {
  return guarded([&] {
    need(config, "config");
    if (count) need(assignments, "assignments");
    rti::Json next = config->json;
    for (size_t i = 0; i < count; ++i) {
      need(assignments[i], "assignment");
      rti::apply_override(next, assignments[i]);
    }
    config->value = rti::config_from_json(next, config->base_dir);
    config->json = std::move(next);
  });
}

rti_status rti_config_to_json(const rti_config* config, char** out_json) {
  return guarded([&] {
    need(config, "config");
    need(out_json, "out_json");
    *out_json = dup_string(rti::to_json(config->value).dump(2));
  });
}

rti_status rti_config_output_dir(const rti_config* config, char** out_path) {
  return guarded([&] {
    need(config, "config");
    need(out_path, "out_path");
    *out_path = dup_string(config->value.output);
  });
}

void rti_config_free(rti_config* config) { delete config; }

rti_status rti_plan_generate(const rti_config* config, rti_plan** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    make_handle(out, rti::make_plan(config->value));
  });
}

rti_status rti_plan_load(const char* path, rti_plan** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    make_handle(out, rti::plan_from_json(rti::read_json(path)));
  });
}

rti_status rti_plan_save_json(const rti_plan* plan, const char* path) {
  return guarded([&] {
    need(plan, "plan");
    need(path, "path");
    rti::write_json(path, rti::to_json(plan->value));
  });
}

rti_status rti_plan_save_lp(const rti_plan* plan, const rti_config* config, const char* path) {
  return guarded([&] {
    need(plan, "plan");
    need(config, "config");
    need(path, "path");
    rti::write_text(path, rti::format_lp(rti::plan_lp_entries(plan->value, config->value.camera)));
  });
}

size_t rti_plan_size(const rti_plan* plan) { return plan ? plan->value.size() : 0; }

size_t rti_plan_row_count(const rti_plan* plan) { return plan ? plan->value.rows.size() : 0; }

rti_status rti_plan_row_size(const rti_plan* plan, size_t row, size_t* out) {
  return guarded([&] {
    need(plan, "plan");
    need(out, "out");
    rti::require(row < plan->value.rows.size(), "row index out of range");
    *out = plan->value.rows[row].lambda_h.size();
  });
}

rti_status rti_plan_position(const rti_plan* plan, size_t index, double xyz[3]) {
  return guarded([&] {
    need(plan, "plan");
    need(xyz, "xyz");
    rti::require(index < plan->value.positions.size(), "position index out of range");
    const auto& p = plan->value.positions[index];
    xyz[0] = p.x;
    xyz[1] = p.y;
    xyz[2] = p.z;
  });
}

void rti_plan_free(rti_plan* plan) { delete plan; }

rti_status rti_sequence_generate(const rti_config* config, const rti_plan* plan, rti_sequence** out) {
  return guarded([&] {
    need(config, "config");
    need(plan, "plan");
    need(out, "out");
    make_handle(out, rti::make_sequence(config->value, plan->value));
  });
}

rti_status rti_sequence_load(const char* path, rti_sequence** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    make_handle(out, rti::sequence_from_json(rti::read_json(path)));
  });
}

rti_status rti_sequence_save_json(const rti_sequence* seq, const char* path) {
  return guarded([&] {
    need(seq, "sequence");
    need(path, "path");
    rti::write_json(path, rti::to_json(seq->value));
  });
}

rti_status rti_sequence_save_csv(const rti_sequence* seq, const char* path) {
  return guarded([&] {
    need(seq, "sequence");
    need(path, "path");
    rti::write_text(path, rti::sequence_csv(seq->value));
  });
}

size_t rti_sequence_size(const rti_sequence* seq) { return seq ? seq->value.positions.size() : 0; }

rti_status rti_sequence_position(const rti_sequence* seq, size_t index, double xyz[3]) {
  return guarded([&] {
    need(seq, "sequence");
    need(xyz, "xyz");
    rti::require(index < seq->value.positions.size(), "position index out of range");
    const auto& p = seq->value.positions[index];
    xyz[0] = p.x;
    xyz[1] = p.y;
    xyz[2] = p.z;
  });
}

double rti_sequence_length(const rti_sequence* seq) { return seq ? seq->value.length_m : 0.0; }

void rti_sequence_free(rti_sequence* seq) { delete seq; }

rti_status rti_trajectory_generate(const rti_config* config, const rti_sequence* seq, rti_trajectory** out) {
  return guarded([&] {
    need(config, "config");
    need(seq, "sequence");
    need(out, "out");
    const auto& m = config->value.mission;
    make_handle(out, rti::generate_trajectory(seq->value, m.v_des, m.mpc.dt, m.t_stab));
  });
}

rti_status rti_trajectory_save_json(const rti_trajectory* traj, const char* path) {
  return guarded([&] {
    need(traj, "trajectory");
    need(path, "path");
    rti::write_json(path, rti::to_json(traj->value));
  });
}

rti_status rti_trajectory_save_csv(const rti_trajectory* traj, const char* path) {
  return guarded([&] {
    need(traj, "trajectory");
    need(path, "path");
    rti::write_text(path, rti::trajectory_csv(traj->value));
  });
}

size_t rti_trajectory_sample_count(const rti_trajectory* traj) { return traj ? traj->value.samples.size() : 0; }

size_t rti_trajectory_hover_count(const rti_trajectory* traj) { return traj ? traj->value.n_hover : 0; }

void rti_trajectory_free(rti_trajectory* traj) { delete traj; }

rti_status rti_mission_simulate(const rti_config* config, const rti_plan* plan, const rti_sequence* seq,
                                rti_mission** out) {
  return guarded([&] {
    need(config, "config");
    need(plan, "plan");
    need(seq, "sequence");
    need(out, "out");
    make_handle(out, rti::simulate_mission(plan->value, seq->value, config->value.obstacle_set(),
                                           config->value.mission));
  });
}

rti_status rti_mission_save(const rti_mission* mission, const char* dir) {
  return guarded([&] {
    need(mission, "mission");
    need(dir, "dir");
    const std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    rti::write_text((d / "mission_log.jsonl").string(), rti::mission_log_jsonl(mission->value));
    rti::write_json((d / "mission_captures.json").string(), rti::mission_captures_manifest(mission->value));
  });
}

rti_status rti_mission_load_manifest(const char* path, rti_mission** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    make_handle(out, rti::mission_from_manifest(rti::read_json(path)));
  });
}

size_t rti_mission_capture_count(const rti_mission* mission) { return mission ? mission->value.captures.size() : 0; }

size_t rti_mission_skipped_count(const rti_mission* mission) { return mission ? mission->value.skipped.size() : 0; }

size_t rti_mission_step_count(const rti_mission* mission) { return mission ? mission->value.records.size() : 0; }

double rti_mission_flown_length(const rti_mission* mission) { return mission ? mission->value.flown_length() : 0.0; }

double rti_mission_min_clearance(const rti_mission* mission) {
  double m = std::numeric_limits<double>::infinity();
  if (mission)
    for (const auto& r : mission->value.records) m = std::min(m, r.clearance);
  return m;
}

double rti_mission_min_fov(const rti_mission* mission) {
  double m = std::numeric_limits<double>::infinity();
  if (mission)
    for (const auto& r : mission->value.records) m = std::min(m, r.fov);
  return m;
}

void rti_mission_free(rti_mission* mission) { delete mission; }

rti_status rti_scene_from_config(const rti_config* config, rti_scene** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    make_handle(out, rti::Scene::build(config->value.scene));
  });
}

rti_status rti_scene_load(const char* path, rti_scene** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    make_handle(out, rti::Scene::build(rti::scene_from_json(rti::read_json(path))));
  });
}

void rti_scene_free(rti_scene* scene) { delete scene; }

rti_status rti_capture_from_mission(const rti_config* config, const rti_scene* scene, const rti_mission* mission,
                                    rti_captures** out) {
  return guarded([&] {
    need(config, "config");
    need(scene, "scene");
    need(mission, "mission");
    need(out, "out");
    const auto& c = config->value;
    make_handle(out, rti::run_capture(mission->value, scene->value, c.region.distance, c.sigma, c.seed));
  });
}

rti_status rti_capture_from_plan(const rti_config* config, const rti_scene* scene, const rti_plan* plan,
                                 rti_captures** out) {
  return guarded([&] {
    need(config, "config");
    need(scene, "scene");
    need(plan, "plan");
    need(out, "out");
    const auto& c = config->value;
    make_handle(out, rti::run_capture(plan->value, scene->value, c.camera, c.sigma, c.seed));
  });
}

rti_status rti_captures_save(const rti_captures* captures, const char* dir) {
  return guarded([&] {
    need(captures, "captures");
    need(dir, "dir");
    rti::save_capture_set(dir, captures->value);
  });
}

rti_status rti_captures_load(const char* dir, rti_captures** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    make_handle(out, rti::load_capture_set(dir));
  });
}

size_t rti_captures_count(const rti_captures* captures) { return captures ? captures->value.captures.size() : 0; }

int rti_captures_too_few(const rti_captures* captures) { return captures && captures->value.few_captures ? 1 : 0; }

void rti_captures_free(rti_captures* captures) { delete captures; }

rti_status rti_ptm_fit(const rti_captures* captures, rti_ptm** out) {
  return guarded([&] {
    need(captures, "captures");
    need(out, "out");
    make_handle(out, rti::fit_ptm(captures->value));
  });
}

rti_status rti_ptm_load(const char* path, rti_ptm** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    make_handle(out, rti::read_rtiptm(path));
  });
}

rti_status rti_ptm_save(const rti_ptm* ptm, const char* path) {
  return guarded([&] {
    need(ptm, "ptm");
    need(path, "path");
    rti::write_rtiptm(path, ptm->value);
  });
}

int rti_ptm_width(const rti_ptm* ptm) { return ptm ? ptm->value.width : 0; }

int rti_ptm_height(const rti_ptm* ptm) { return ptm ? ptm->value.height : 0; }

rti_status rti_ptm_relight(const rti_ptm* ptm, double lu, double lv, uint8_t* rgb, size_t size) {
  return guarded([&] {
    need(ptm, "ptm");
    need(rgb, "rgb");
    const auto img = rti::relight(ptm->value, lu, lv);
    rti::require(size >= img.data.size(), "output buffer is smaller than width*height*3");
    std::memcpy(rgb, img.data.data(), img.data.size());
  });
}

rti_status rti_ptm_relight_png(const rti_ptm* ptm, double lu, double lv, const char* path) {
  return guarded([&] {
    need(ptm, "ptm");
    need(path, "path");
    rti::write_png(path, rti::relight(ptm->value, lu, lv));
  });
}

void rti_ptm_free(rti_ptm* ptm) { delete ptm; }

rti_status rti_normals_from_ptm(const rti_ptm* ptm, rti_normals** out) {
  return guarded([&] {
    need(ptm, "ptm");
    need(out, "out");
    make_handle(out, rti::normal_map(ptm->value));
  });
}

rti_status rti_normals_from_scene(const rti_scene* scene, rti_normals** out) {
  return guarded([&] {
    need(scene, "scene");
    need(out, "out");
    make_handle(out, rti::scene_normals(scene->value));
  });
}

rti_status rti_normals_save(const rti_normals* normals, const char* png_path, const char* sidecar_path) {
  return guarded([&] {
    need(normals, "normals");
    need(png_path, "png_path");
    rti::write_normal_map(png_path, sidecar_path ? sidecar_path : "", normals->value);
  });
}

rti_status rti_normals_load(const char* path, rti_normals** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string p(path);
    const bool png = p.size() >= 4 && p.compare(p.size() - 4, 4, ".png") == 0;
    make_handle(out, png ? rti::read_normal_png(p) : rti::read_normal_sidecar(p));
  });
}

size_t rti_normals_valid_count(const rti_normals* normals) { return normals ? normals->value.valid_count() : 0; }

rti_status rti_normals_compare(const rti_normals* a, const rti_normals* b, double* delta, const char* heatmap_png) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(delta, "delta");
    const auto cmp = rti::compare_normals(a->value, b->value);
    *delta = cmp.delta;
    if (heatmap_png) {
      rti::PngText legend;
      const auto img = rti::heatmap(cmp, 0.0, &legend);
      rti::write_png(heatmap_png, img, legend);
    }
  });
}

void rti_normals_free(rti_normals* normals) { delete normals; }

rti_status rti_experiment_path_lengths(const rti_config* config, const char* dir, double* fraction_within_1_5,
                                       double* fraction_not_longer) {
  return guarded([&] {
    need(config, "config");
    need(dir, "dir");
    const auto report = rti::path_length_study(config->value.path_study);
    rti::write_path_study(dir, report);
    if (fraction_within_1_5) *fraction_within_1_5 = report.fraction_within_1_5;
    if (fraction_not_longer) *fraction_not_longer = report.fraction_sppa_not_longer;
  });
}

rti_status rti_experiment_noise_sweep(const rti_config* config, const char* dir, double* means, size_t capacity,
                                      size_t* count) {
  return guarded([&] {
    need(config, "config");
    need(dir, "dir");
    const auto report = rti::noise_sweep(config->value.noise_sweep);
    rti::write_noise_sweep(dir, report);
    if (count) *count = report.points.size();
    if (means)
      for (size_t i = 0; i < report.points.size() && i < capacity; ++i) means[i] = report.points[i].mean;
  });
}

rti_status rti_demo(const rti_config* config, const char* dir, size_t* planned, size_t* captured) {
  return guarded([&] {
    need(config, "config");
    need(dir, "dir");
    const auto r = rti::run_demo(config->value, dir);
    if (planned) *planned = r.planned;
    if (captured) *captured = r.captured;
  });
}

}  // extern "C"
