/*
 * Public C API of the DLR latent-space RL training library.
 *
 * Usage pattern: build a dlr_config (defaults, then optional file load and
 * key/value overrides), validate it, and hand it to dlr_train. All functions
 * return DLR_OK on success; on failure dlr_last_error() holds a
 * human-readable message for the calling thread.
 */
#ifndef DLR_H
#define DLR_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define DLR_API __declspec(dllexport)
#else
#define DLR_API __attribute__((visibility("default")))
#endif

typedef enum dlr_status {
  DLR_OK = 0,
  DLR_ERR_INTERNAL = 1,
  DLR_ERR_CONFIG = 2,   /* invalid config / task spec / argument */
  DLR_ERR_NUMERIC = 3,  /* numerical abort (non-finite loss) */
  DLR_ERR_CHECKSUM = 4, /* frozen-parameter or container digest mismatch */
  DLR_ERR_IO = 5,       /* missing or unwritable file */
  DLR_ERR_SHAPE = 6     /* array shape mismatch (e.g. checkpoint vs config) */
} dlr_status;

DLR_API const char* dlr_version_string(void);
DLR_API const char* dlr_status_name(dlr_status status);

/* Message of the most recent failure on this thread; empty string if none. */
DLR_API const char* dlr_last_error(void);

/* Frees any string returned by a dlr_*_to_json/summary function. */
DLR_API void dlr_string_free(char* s);

/* ----------------------------------------------------------------------- */
/* Run configuration (opaque)                                              */
/* ----------------------------------------------------------------------- */

typedef struct dlr_config dlr_config;

DLR_API dlr_config* dlr_config_create(void); /* desk-scale defaults */
DLR_API void dlr_config_free(dlr_config* cfg);

/* Merge a JSON config file over the current values. */
DLR_API dlr_status dlr_config_load_file(dlr_config* cfg, const char* path);

/* Set one field from its string form, e.g. ("G", "64"). */
DLR_API dlr_status dlr_config_set(dlr_config* cfg, const char* key,
                                  const char* value);

/* Checks every config invariant (K <= G, eps_clip in (0,1), ...). */
DLR_API dlr_status dlr_config_validate(const dlr_config* cfg);

/* Resolved config as JSON; caller frees with dlr_string_free. */
DLR_API dlr_status dlr_config_to_json(const dlr_config* cfg, char** json_out);

/* Field-name enumeration (for generic CLI flag generation). */
DLR_API int dlr_config_key_count(void);
DLR_API const char* dlr_config_key(int index);

/* ----------------------------------------------------------------------- */
/* Training and evaluation                                                 */
/* ----------------------------------------------------------------------- */

typedef struct dlr_eval_report {
  double pass_at_1;
  double format_valid_rate;
  int n_instances;
} dlr_eval_report;

/* Runs the full training loop; writes config.resolved.json, metrics.jsonl,
 * ckpt_{iter}.bin and eval.json into out_dir. final_eval may be NULL. */
DLR_API dlr_status dlr_train(const dlr_config* cfg, const char* out_dir,
                             dlr_eval_report* final_eval);

/* Deterministic evaluation of a checkpoint on freshly generated instances. */
DLR_API dlr_status dlr_evaluate(const char* ckpt_path, int n_instances,
                                uint64_t seed, dlr_eval_report* report);

/* Writes n task instances as JSON lines ({"context","query","truth"}). */
DLR_API dlr_status dlr_export_instances(const dlr_config* cfg, int n,
                                        uint64_t seed, const char* path);

/* ----------------------------------------------------------------------- */
/* Lab studies                                                             */
/* ----------------------------------------------------------------------- */

typedef struct dlr_cost_report {
  double g;
  double k;
  double c_a;
  double c_m;
  double cost_full;          /* G * (c_a + c_m) */
  double cost_dlr;           /* G * c_a + K * c_m */
  double main_forward_ratio; /* K / G */
  double reduction_factor;   /* G / K */
} dlr_cost_report;

DLR_API dlr_status dlr_cost_model(double g, double k, double c_a, double c_m,
                                   dlr_cost_report* report);

typedef enum dlr_estimator_kind {
  DLR_ESTIMATOR_TOKEN_LEVEL = 0,
  DLR_ESTIMATOR_LATENT_LEVEL = 1
} dlr_estimator_kind;

typedef struct dlr_variance_report {
  int horizon;
  int n_samples;
  double var_mean; /* mean per-coordinate gradient variance */
  double var_max;  /* max per-coordinate gradient variance */
} dlr_variance_report;

DLR_API dlr_status dlr_variance_study(dlr_estimator_kind kind, int horizon,
                                       int n_samples, uint64_t seed,
                                       dlr_variance_report* report);

/* Paired base-vs-ablated trainings over matched seeds. kind is
 * "no_contrastive" or "trainable_decoder". Writes run directories and
 * ablation.csv under out_dir; summary_out (optional) receives a
 * human-readable table, freed with dlr_string_free. */
DLR_API dlr_status dlr_ablate(const dlr_config* cfg, const char* kind,
                              int n_seeds, const char* out_dir,
                              char** summary_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DLR_H */
