/*
 * driftlens — public C API.
 *
 * Domain-shift analytics over model activations: CKA maps, the DS-diff /
 * DS-sim / Model-sim metrics, STFT heart-rate extraction and MAE, the
 * correlation and model-selection reports, plus the batch pipeline commands
 * used by the driftlens CLI.
 *
 * Conventions:
 *   - Every fallible call returns dl_status; DL_OK is 0.
 *   - On failure, dl_last_error() returns a thread-local message describing
 *     the most recent failing call on this thread.
 *   - Objects returned through out-parameters are owned by the caller and
 *     released with the matching *_free function. Strings returned as
 *     const char* stay owned by the object they came from.
 *   - Matrices are passed row-major.
 */

#ifndef DRIFTLENS_H
#define DRIFTLENS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dl_status {
  DL_OK = 0,
  DL_ERR_INVALID_ARGUMENT = 1,
  DL_ERR_VALIDATION = 2,
  DL_ERR_SIZE_MISMATCH = 3,
  DL_ERR_FORMAT = 4,
  DL_ERR_UNSUPPORTED_VERSION = 5,
  DL_ERR_CORRUPT = 6,
  DL_ERR_IO = 7,
  DL_ERR_MATH_DOMAIN = 8,
  DL_ERR_COVERAGE = 9,
  DL_ERR_LOOKUP = 10,
  DL_ERR_CONFIG = 11,
  DL_ERR_INTERNAL = 12
} dl_status;

typedef enum dl_estimator {
  DL_ESTIMATOR_BIASED = 0,
  DL_ESTIMATOR_UNBIASED = 1
} dl_estimator;

const char* dl_version(void);
const char* dl_status_name(dl_status status);
const char* dl_last_error(void);

/* -------- activation sets and the .actv dump format -------- */

typedef struct dl_activation_set dl_activation_set;

dl_status dl_activation_set_create(const char* model_id, const char* dataset_id,
                                   dl_activation_set** out_set);
dl_status dl_activation_set_add_layer(dl_activation_set* set, const char* name,
                                      size_t rows, size_t cols,
                                      const double* row_major_values);
void dl_activation_set_free(dl_activation_set* set);

/* Writes the binary .actv dump (validates invariants first). bytes_written
 * may be NULL. */
dl_status dl_activation_set_write(const dl_activation_set* set, const char* path,
                                  uint64_t* bytes_written);
dl_status dl_activation_set_read(const char* path, dl_activation_set** out_set);

const char* dl_activation_set_model_id(const dl_activation_set* set);
const char* dl_activation_set_dataset_id(const dl_activation_set* set);
size_t dl_activation_set_layer_count(const dl_activation_set* set);
const char* dl_activation_set_layer_name(const dl_activation_set* set, size_t layer);
dl_status dl_activation_set_layer_shape(const dl_activation_set* set, size_t layer,
                                        size_t* rows, size_t* cols);
/* dst must hold rows*cols doubles; filled row-major. */
dl_status dl_activation_set_layer_copy(const dl_activation_set* set, size_t layer,
                                       double* dst);

/* -------- CKA -------- */

typedef struct dl_cka_map dl_cka_map;

/* Scalar CKA between two feature matrices sharing the sample count n.
 * degenerate (may be NULL) is set to 1 when a constant input forced the
 * value to 0. */
dl_status dl_cka_pair(const double* x, size_t n, size_t x_features,
                      const double* y, size_t y_features, dl_estimator estimator,
                      double* value, int* degenerate);

/* Layer-pair CKA map with minibatch accumulation; batch_size >= n gives one
 * full batch. */
dl_status dl_cka_map_compute(const dl_activation_set* x, const dl_activation_set* y,
                             dl_estimator estimator, int64_t batch_size,
                             dl_cka_map** out_map);
void dl_cka_map_free(dl_cka_map* map);
size_t dl_cka_map_rows(const dl_cka_map* map);
size_t dl_cka_map_cols(const dl_cka_map* map);
dl_status dl_cka_map_value(const dl_cka_map* map, size_t i, size_t j, double* value);
dl_status dl_cka_map_degenerate(const dl_cka_map* map, size_t i, size_t j,
                                int* degenerate);

/* -------- domain-shift metrics -------- */

/* Mean absolute difference between two self-similarity maps of one model. */
dl_status dl_ds_diff(const dl_cka_map* self_map_x, const dl_cka_map* self_map_y,
                     double* value);
/* Mean same-layer diagonal of a one-model, two-dataset map. */
dl_status dl_ds_sim(const dl_cka_map* cross_map, double* value);
/* Mean same-layer diagonal of a two-model, one-dataset map. */
dl_status dl_model_sim(const dl_cka_map* pair_map, double* value);

/* -------- heart rate -------- */

typedef struct dl_hr_series dl_hr_series;

/* STFT peak tracking over the 40-180 BPM band. window_s/hop_s <= 0 pick the
 * defaults (10 s / 1 s). */
dl_status dl_stft_hr(const double* bvp, size_t samples, double fps,
                     double window_s, double hop_s, dl_hr_series** out_series);
void dl_hr_series_free(dl_hr_series* series);
size_t dl_hr_series_size(const dl_hr_series* series);
dl_status dl_hr_series_get(const dl_hr_series* series, size_t window,
                           double* time_s, double* hr_bpm, int* low_confidence);
dl_status dl_hr_mae(const dl_hr_series* predicted, const dl_hr_series* truth,
                    double* value);

/* -------- statistics -------- */

dl_status dl_pearson(const double* xs, const double* ys, size_t n, double* r,
                     double* p);
dl_status dl_fisher_composite(const double* rs, size_t n, double* value);
dl_status dl_bonferroni_threshold(double alpha, size_t test_count, double* value);
dl_status dl_ci95(const double* values, size_t n, double* mean, double* halfwidth);

/* -------- pipeline commands -------- */

typedef struct dl_run_config dl_run_config;

dl_status dl_run_config_load(const char* path, dl_run_config** out_config);
void dl_run_config_free(dl_run_config* config);
/* Overrides applied after load; domain seeds that were derived from the
 * global seed are re-derived. */
dl_status dl_run_config_set_seed(dl_run_config* config, uint64_t seed);
dl_status dl_run_config_set_estimator(dl_run_config* config, dl_estimator estimator);
dl_status dl_run_config_set_batch_size(dl_run_config* config, int64_t batch_size);

dl_status dl_cmd_synth(const dl_run_config* config, const char* out_dir);
dl_status dl_cmd_train(const dl_run_config* config, const char* out_dir);
dl_status dl_cmd_eval(const dl_run_config* config, const char* out_dir);
/* kinds: comma-separated subset of "ds_diff,ds_sim,model_sim"; NULL or empty
 * computes all three. */
dl_status dl_cmd_metrics(const dl_run_config* config, const char* out_dir,
                         const char* kinds);
dl_status dl_cmd_correlate(const dl_run_config* config, const char* out_dir);
dl_status dl_cmd_select(const dl_run_config* config, const char* out_dir);
dl_status dl_cmd_report(const dl_run_config* config, const char* out_dir, int svg);

/* Statistical-machinery reproduction from published benchmark CSVs. */
dl_status dl_cmd_correlate_fixture(const char* fixture_csv, const char* out_dir);
dl_status dl_cmd_select_fixture(const char* fixture_csv, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* DRIFTLENS_H */
