#ifndef RTISTUDIO_H
#define RTISTUDIO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RTI_EXPORT __declspec(dllexport)
#else
#define RTI_EXPORT __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure rti_last_error() holds a
 * message for the calling thread until its next failing call. */
typedef enum rti_status {
  RTI_OK = 0,
  RTI_ERR_INVALID_ARGUMENT = 1,
  RTI_ERR_DEGENERATE_GEOMETRY = 2,
  RTI_ERR_INVALID_REGION = 3,
  RTI_ERR_INFEASIBLE = 4,
  RTI_ERR_ILL_CONDITIONED = 5,
  RTI_ERR_IO = 6,
  RTI_ERR_PARSE = 7,
  RTI_ERR_UNDEFINED_MEAN = 8,
  RTI_ERR_INTERNAL = 99
} rti_status;

typedef struct rti_config rti_config;
typedef struct rti_plan rti_plan;
typedef struct rti_sequence rti_sequence;
typedef struct rti_trajectory rti_trajectory;
typedef struct rti_mission rti_mission;
typedef struct rti_scene rti_scene;
typedef struct rti_captures rti_captures;
typedef struct rti_ptm rti_ptm;
typedef struct rti_normals rti_normals;

RTI_EXPORT const char* rti_version(void);
RTI_EXPORT const char* rti_last_error(void);
RTI_EXPORT const char* rti_status_name(rti_status status);
/* Frees strings returned through char** out-parameters. */
RTI_EXPORT void rti_string_free(char* s);

/* Configuration. Assignments use dotted paths, e.g. "mpc.dt=0.1". */
RTI_EXPORT rti_status rti_config_default(rti_config** out);
RTI_EXPORT rti_status rti_config_load(const char* path, rti_config** out);
RTI_EXPORT rti_status rti_config_set(rti_config* config, const char* assignment);
/* Applies all assignments, then validates once; the config is unchanged on failure. */
RTI_EXPORT rti_status rti_config_set_many(rti_config* config, const char* const* assignments, size_t count);
RTI_EXPORT rti_status rti_config_to_json(const rti_config* config, char** out_json);
RTI_EXPORT rti_status rti_config_output_dir(const rti_config* config, char** out_path);
RTI_EXPORT void rti_config_free(rti_config* config);

/* Lighting plans. */
RTI_EXPORT rti_status rti_plan_generate(const rti_config* config, rti_plan** out);
RTI_EXPORT rti_status rti_plan_load(const char* path, rti_plan** out);
RTI_EXPORT rti_status rti_plan_save_json(const rti_plan* plan, const char* path);
/* Lighting vectors against the configured camera. */
RTI_EXPORT rti_status rti_plan_save_lp(const rti_plan* plan, const rti_config* config, const char* path);
RTI_EXPORT size_t rti_plan_size(const rti_plan* plan);
RTI_EXPORT size_t rti_plan_row_count(const rti_plan* plan);
RTI_EXPORT rti_status rti_plan_row_size(const rti_plan* plan, size_t row, size_t* out);
RTI_EXPORT rti_status rti_plan_position(const rti_plan* plan, size_t index, double xyz[3]);
RTI_EXPORT void rti_plan_free(rti_plan* plan);

/* Visit orders. Positions include P_i at both ends. */
RTI_EXPORT rti_status rti_sequence_generate(const rti_config* config, const rti_plan* plan, rti_sequence** out);
RTI_EXPORT rti_status rti_sequence_load(const char* path, rti_sequence** out);
RTI_EXPORT rti_status rti_sequence_save_json(const rti_sequence* seq, const char* path);
RTI_EXPORT rti_status rti_sequence_save_csv(const rti_sequence* seq, const char* path);
RTI_EXPORT size_t rti_sequence_size(const rti_sequence* seq);
RTI_EXPORT rti_status rti_sequence_position(const rti_sequence* seq, size_t index, double xyz[3]);
RTI_EXPORT double rti_sequence_length(const rti_sequence* seq);
RTI_EXPORT void rti_sequence_free(rti_sequence* seq);

/* Time-sampled references. */
RTI_EXPORT rti_status rti_trajectory_generate(const rti_config* config, const rti_sequence* seq, rti_trajectory** out);
RTI_EXPORT rti_status rti_trajectory_save_json(const rti_trajectory* traj, const char* path);
RTI_EXPORT rti_status rti_trajectory_save_csv(const rti_trajectory* traj, const char* path);
RTI_EXPORT size_t rti_trajectory_sample_count(const rti_trajectory* traj);
/* Identical samples held at each RTI position. */
RTI_EXPORT size_t rti_trajectory_hover_count(const rti_trajectory* traj);
RTI_EXPORT void rti_trajectory_free(rti_trajectory* traj);

/* Closed-loop mission simulation. */
RTI_EXPORT rti_status rti_mission_simulate(const rti_config* config, const rti_plan* plan, const rti_sequence* seq,
                                           rti_mission** out);
/* Writes mission_log.jsonl and mission_captures.json into dir. */
RTI_EXPORT rti_status rti_mission_save(const rti_mission* mission, const char* dir);
/* Reads a mission_captures.json manifest (captures only, no per-step log). */
RTI_EXPORT rti_status rti_mission_load_manifest(const char* path, rti_mission** out);
RTI_EXPORT size_t rti_mission_capture_count(const rti_mission* mission);
RTI_EXPORT size_t rti_mission_skipped_count(const rti_mission* mission);
RTI_EXPORT size_t rti_mission_step_count(const rti_mission* mission);
RTI_EXPORT double rti_mission_flown_length(const rti_mission* mission);
RTI_EXPORT double rti_mission_min_clearance(const rti_mission* mission);
RTI_EXPORT double rti_mission_min_fov(const rti_mission* mission);
RTI_EXPORT void rti_mission_free(rti_mission* mission);

/* Synthetic scenes and capture sets. */
RTI_EXPORT rti_status rti_scene_from_config(const rti_config* config, rti_scene** out);
RTI_EXPORT rti_status rti_scene_load(const char* path, rti_scene** out);
RTI_EXPORT void rti_scene_free(rti_scene* scene);

RTI_EXPORT rti_status rti_capture_from_mission(const rti_config* config, const rti_scene* scene,
                                               const rti_mission* mission, rti_captures** out);
RTI_EXPORT rti_status rti_capture_from_plan(const rti_config* config, const rti_scene* scene, const rti_plan* plan,
                                            rti_captures** out);
RTI_EXPORT rti_status rti_captures_save(const rti_captures* captures, const char* dir);
RTI_EXPORT rti_status rti_captures_load(const char* dir, rti_captures** out);
RTI_EXPORT size_t rti_captures_count(const rti_captures* captures);
/* Nonzero when there are fewer than six captures. */
RTI_EXPORT int rti_captures_too_few(const rti_captures* captures);
RTI_EXPORT void rti_captures_free(rti_captures* captures);

/* Polynomial texture maps. */
RTI_EXPORT rti_status rti_ptm_fit(const rti_captures* captures, rti_ptm** out);
RTI_EXPORT rti_status rti_ptm_load(const char* path, rti_ptm** out);
RTI_EXPORT rti_status rti_ptm_save(const rti_ptm* ptm, const char* path);
RTI_EXPORT int rti_ptm_width(const rti_ptm* ptm);
RTI_EXPORT int rti_ptm_height(const rti_ptm* ptm);
/* Interleaved RGB8 into rgb (width*height*3 bytes). */
RTI_EXPORT rti_status rti_ptm_relight(const rti_ptm* ptm, double lu, double lv, uint8_t* rgb, size_t size);
RTI_EXPORT rti_status rti_ptm_relight_png(const rti_ptm* ptm, double lu, double lv, const char* path);
RTI_EXPORT void rti_ptm_free(rti_ptm* ptm);

/* Normal maps. */
RTI_EXPORT rti_status rti_normals_from_ptm(const rti_ptm* ptm, rti_normals** out);
RTI_EXPORT rti_status rti_normals_from_scene(const rti_scene* scene, rti_normals** out);
/* sidecar_path may be NULL. */
RTI_EXPORT rti_status rti_normals_save(const rti_normals* normals, const char* png_path, const char* sidecar_path);
/* Accepts a float sidecar or a normal-map PNG. */
RTI_EXPORT rti_status rti_normals_load(const char* path, rti_normals** out);
RTI_EXPORT size_t rti_normals_valid_count(const rti_normals* normals);
/* Mean angle over mutually valid pixels; heatmap_png may be NULL. */
RTI_EXPORT rti_status rti_normals_compare(const rti_normals* a, const rti_normals* b, double* delta,
                                          const char* heatmap_png);
RTI_EXPORT void rti_normals_free(rti_normals* normals);

/* Experiments; reports are written into dir. */
RTI_EXPORT rti_status rti_experiment_path_lengths(const rti_config* config, const char* dir,
                                                  double* fraction_within_1_5, double* fraction_not_longer);
/* means receives one mean delta per configured sigma (up to capacity). */
RTI_EXPORT rti_status rti_experiment_noise_sweep(const rti_config* config, const char* dir, double* means,
                                                 size_t capacity, size_t* count);

/* End-to-end run; writes manifest.json plus every artifact into dir. */
RTI_EXPORT rti_status rti_demo(const rti_config* config, const char* dir, size_t* planned, size_t* captured);

#ifdef __cplusplus
}
#endif

#endif
