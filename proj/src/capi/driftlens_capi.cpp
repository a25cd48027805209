#include "driftlens.h"

#include "core/activations.hpp"
#include "core/cka.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/hr.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "core/selection.hpp"
#include "core/stats.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <vector>

using namespace driftlens;

// Opaque handle definitions: thin wrappers over the core value types.
struct dl_activation_set {
  ActivationSet set;
};
struct dl_cka_map {
  cka::CkaMap map;
};
struct dl_hr_series {
  hr::HrSeries series;
};
struct dl_run_config {
  RunConfig config;
};

namespace {

thread_local std::string t_last_error;

dl_status status_from(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return DL_ERR_INVALID_ARGUMENT;
    case ErrorCode::validation: return DL_ERR_VALIDATION;
    case ErrorCode::size_mismatch: return DL_ERR_SIZE_MISMATCH;
    case ErrorCode::format: return DL_ERR_FORMAT;
    case ErrorCode::unsupported_version: return DL_ERR_UNSUPPORTED_VERSION;
    case ErrorCode::corrupt: return DL_ERR_CORRUPT;
    case ErrorCode::io: return DL_ERR_IO;
    case ErrorCode::math_domain: return DL_ERR_MATH_DOMAIN;
    case ErrorCode::coverage: return DL_ERR_COVERAGE;
    case ErrorCode::lookup: return DL_ERR_LOOKUP;
    case ErrorCode::config: return DL_ERR_CONFIG;
  }
  return DL_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes + the thread-local
// message.
template <typename Fn>
dl_status guarded(Fn&& fn) {
  try {
    fn();
    return DL_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return status_from(e.code());
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return DL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return DL_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return DL_ERR_INTERNAL;
  }
}

dl_status require(bool condition, const char* message) {
  if (condition) return DL_OK;
  t_last_error = message;
  return DL_ERR_INVALID_ARGUMENT;
}

cka::Estimator to_core(dl_estimator estimator) {
  return estimator == DL_ESTIMATOR_BIASED ? cka::Estimator::biased
                                          : cka::Estimator::unbiased;
}

}  // namespace

extern "C" {

const char* dl_version(void) { return "0.1.0"; }

const char* dl_status_name(dl_status status) {
  switch (status) {
    case DL_OK: return "ok";
    case DL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DL_ERR_VALIDATION: return "validation";
    case DL_ERR_SIZE_MISMATCH: return "size_mismatch";
    case DL_ERR_FORMAT: return "format";
    case DL_ERR_UNSUPPORTED_VERSION: return "unsupported_version";
    case DL_ERR_CORRUPT: return "corrupt";
    case DL_ERR_IO: return "io";
    case DL_ERR_MATH_DOMAIN: return "math_domain";
    case DL_ERR_COVERAGE: return "coverage";
    case DL_ERR_LOOKUP: return "lookup";
    case DL_ERR_CONFIG: return "config";
    case DL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* dl_last_error(void) { return t_last_error.c_str(); }

/* -------- activation sets -------- */

dl_status dl_activation_set_create(const char* model_id, const char* dataset_id,
                                   dl_activation_set** out_set) {
  if (auto s = require(model_id && dataset_id && out_set, "null argument")) return s;
  return guarded([&] {
    auto* handle = new dl_activation_set;
    handle->set.model_id = model_id;
    handle->set.dataset_id = dataset_id;
    *out_set = handle;
  });
}

dl_status dl_activation_set_add_layer(dl_activation_set* set, const char* name,
                                      size_t rows, size_t cols,
                                      const double* row_major_values) {
  if (auto s = require(set && name && row_major_values, "null argument")) return s;
  if (auto s = require(rows > 0 && cols > 0, "layer must be at least 1x1")) return s;
  return guarded([&] {
    LayerActivations layer;
    layer.name = name;
    layer.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
      for (size_t c = 0; c < cols; ++c) {
        layer.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            row_major_values[r * cols + c];
      }
    }
    set->set.layers.push_back(std::move(layer));
  });
}

void dl_activation_set_free(dl_activation_set* set) { delete set; }

dl_status dl_activation_set_write(const dl_activation_set* set, const char* path,
                                  uint64_t* bytes_written) {
  if (auto s = require(set && path, "null argument")) return s;
  return guarded([&] {
    const std::uint64_t written = write_activation_dump(set->set, path);
    if (bytes_written) *bytes_written = written;
  });
}

dl_status dl_activation_set_read(const char* path, dl_activation_set** out_set) {
  if (auto s = require(path && out_set, "null argument")) return s;
  return guarded([&] {
    auto* handle = new dl_activation_set{read_activation_dump(path)};
    *out_set = handle;
  });
}

const char* dl_activation_set_model_id(const dl_activation_set* set) {
  return set ? set->set.model_id.c_str() : nullptr;
}

const char* dl_activation_set_dataset_id(const dl_activation_set* set) {
  return set ? set->set.dataset_id.c_str() : nullptr;
}

size_t dl_activation_set_layer_count(const dl_activation_set* set) {
  return set ? set->set.layers.size() : 0;
}

const char* dl_activation_set_layer_name(const dl_activation_set* set, size_t layer) {
  if (!set || layer >= set->set.layers.size()) return nullptr;
  return set->set.layers[layer].name.c_str();
}

dl_status dl_activation_set_layer_shape(const dl_activation_set* set, size_t layer,
                                        size_t* rows, size_t* cols) {
  if (auto s = require(set && rows && cols, "null argument")) return s;
  if (auto s = require(layer < set->set.layers.size(), "layer index out of range")) return s;
  *rows = static_cast<size_t>(set->set.layers[layer].data.rows());
  *cols = static_cast<size_t>(set->set.layers[layer].data.cols());
  return DL_OK;
}

dl_status dl_activation_set_layer_copy(const dl_activation_set* set, size_t layer,
                                       double* dst) {
  if (auto s = require(set && dst, "null argument")) return s;
  if (auto s = require(layer < set->set.layers.size(), "layer index out of range")) return s;
  const Matrix& data = set->set.layers[layer].data;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      dst[static_cast<size_t>(r) * static_cast<size_t>(data.cols()) +
          static_cast<size_t>(c)] = data(r, c);
    }
  }
  return DL_OK;
}

/* -------- CKA -------- */

dl_status dl_cka_pair(const double* x, size_t n, size_t x_features, const double* y,
                      size_t y_features, dl_estimator estimator, double* value,
                      int* degenerate) {
  if (auto s = require(x && y && value, "null argument")) return s;
  if (auto s = require(n > 0 && x_features > 0 && y_features > 0, "empty matrix")) return s;
  return guarded([&] {
    Matrix mx(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(x_features));
    Matrix my(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(y_features));
    for (size_t r = 0; r < n; ++r) {
      for (size_t c = 0; c < x_features; ++c) {
        mx(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            x[r * x_features + c];
      }
      for (size_t c = 0; c < y_features; ++c) {
        my(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            y[r * y_features + c];
      }
    }
    const cka::CkaValue result = cka::cka_pair(mx, my, to_core(estimator));
    *value = result.value;
    if (degenerate) *degenerate = result.degenerate ? 1 : 0;
  });
}

dl_status dl_cka_map_compute(const dl_activation_set* x, const dl_activation_set* y,
                             dl_estimator estimator, int64_t batch_size,
                             dl_cka_map** out_map) {
  if (auto s = require(x && y && out_map, "null argument")) return s;
  if (auto s = require(batch_size > 0, "batch_size must be positive")) return s;
  return guarded([&] {
    cka::CkaOptions options;
    options.estimator = to_core(estimator);
    options.batch_size = static_cast<Eigen::Index>(batch_size);
    auto* handle = new dl_cka_map{cka::cka_map(x->set, y->set, options)};
    *out_map = handle;
  });
}

void dl_cka_map_free(dl_cka_map* map) { delete map; }

size_t dl_cka_map_rows(const dl_cka_map* map) {
  return map ? static_cast<size_t>(map->map.values.rows()) : 0;
}

size_t dl_cka_map_cols(const dl_cka_map* map) {
  return map ? static_cast<size_t>(map->map.values.cols()) : 0;
}

dl_status dl_cka_map_value(const dl_cka_map* map, size_t i, size_t j, double* value) {
  if (auto s = require(map && value, "null argument")) return s;
  if (auto s = require(i < dl_cka_map_rows(map) && j < dl_cka_map_cols(map),
                       "cell index out of range")) {
    return s;
  }
  *value = map->map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return DL_OK;
}

dl_status dl_cka_map_degenerate(const dl_cka_map* map, size_t i, size_t j,
                                int* degenerate) {
  if (auto s = require(map && degenerate, "null argument")) return s;
  if (auto s = require(i < dl_cka_map_rows(map) && j < dl_cka_map_cols(map),
                       "cell index out of range")) {
    return s;
  }
  *degenerate = map->map.cell_degenerate(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j))
                    ? 1
                    : 0;
  return DL_OK;
}

/* -------- metrics -------- */

dl_status dl_ds_diff(const dl_cka_map* self_map_x, const dl_cka_map* self_map_y,
                     double* value) {
  if (auto s = require(self_map_x && self_map_y && value, "null argument")) return s;
  return guarded([&] { *value = metrics::ds_diff(self_map_x->map, self_map_y->map); });
}

dl_status dl_ds_sim(const dl_cka_map* cross_map, double* value) {
  if (auto s = require(cross_map && value, "null argument")) return s;
  return guarded([&] { *value = metrics::ds_sim(cross_map->map); });
}

dl_status dl_model_sim(const dl_cka_map* pair_map, double* value) {
  if (auto s = require(pair_map && value, "null argument")) return s;
  return guarded([&] { *value = metrics::model_sim(pair_map->map); });
}

/* -------- heart rate -------- */

dl_status dl_stft_hr(const double* bvp, size_t samples, double fps, double window_s,
                     double hop_s, dl_hr_series** out_series) {
  if (auto s = require(bvp && out_series, "null argument")) return s;
  if (auto s = require(samples > 0, "empty series")) return s;
  return guarded([&] {
    hr::BvpSeries series;
    series.fps = fps;
    series.samples.assign(bvp, bvp + samples);
    hr::StftParams params;
    if (window_s > 0.0) params.window_s = window_s;
    if (hop_s > 0.0) params.hop_s = hop_s;
    auto* handle = new dl_hr_series{hr::stft_hr(series, params)};
    *out_series = handle;
  });
}

void dl_hr_series_free(dl_hr_series* series) { delete series; }

size_t dl_hr_series_size(const dl_hr_series* series) {
  return series ? series->series.time_s.size() : 0;
}

dl_status dl_hr_series_get(const dl_hr_series* series, size_t window, double* time_s,
                           double* hr_bpm, int* low_confidence) {
  if (auto s = require(series != nullptr, "null argument")) return s;
  if (auto s = require(window < series->series.time_s.size(), "window out of range")) {
    return s;
  }
  if (time_s) *time_s = series->series.time_s[window];
  if (hr_bpm) *hr_bpm = series->series.hr_bpm[window];
  if (low_confidence) *low_confidence = series->series.low_confidence[window];
  return DL_OK;
}

dl_status dl_hr_mae(const dl_hr_series* predicted, const dl_hr_series* truth,
                    double* value) {
  if (auto s = require(predicted && truth && value, "null argument")) return s;
  return guarded([&] { *value = hr::mae(predicted->series, truth->series); });
}

/* -------- statistics -------- */

dl_status dl_pearson(const double* xs, const double* ys, size_t n, double* r,
                     double* p) {
  if (auto s = require(xs && ys && r, "null argument")) return s;
  return guarded([&] {
    const auto result = stats::pearson({xs, n}, {ys, n});
    *r = result.r;
    if (p) *p = result.p;
  });
}

dl_status dl_fisher_composite(const double* rs, size_t n, double* value) {
  if (auto s = require(rs && value, "null argument")) return s;
  return guarded([&] {
    *value = stats::fisher_composite(std::vector<double>(rs, rs + n));
  });
}

dl_status dl_bonferroni_threshold(double alpha, size_t test_count, double* value) {
  if (auto s = require(value != nullptr, "null argument")) return s;
  return guarded([&] { *value = stats::bonferroni_threshold(alpha, test_count); });
}

dl_status dl_ci95(const double* values, size_t n, double* mean, double* halfwidth) {
  if (auto s = require(values && mean && halfwidth, "null argument")) return s;
  return guarded([&] {
    const auto result = stats::ci95(std::vector<double>(values, values + n));
    *mean = result.mean;
    *halfwidth = result.halfwidth;
  });
}

/* -------- pipeline commands -------- */

dl_status dl_run_config_load(const char* path, dl_run_config** out_config) {
  if (auto s = require(path && out_config, "null argument")) return s;
  return guarded([&] { *out_config = new dl_run_config{load_config(path)}; });
}

void dl_run_config_free(dl_run_config* config) { delete config; }

dl_status dl_run_config_set_seed(dl_run_config* config, uint64_t seed) {
  if (auto s = require(config != nullptr, "null argument")) return s;
  return guarded([&] { config->config.set_global_seed(seed); });
}

dl_status dl_run_config_set_estimator(dl_run_config* config, dl_estimator estimator) {
  if (auto s = require(config != nullptr, "null argument")) return s;
  return guarded([&] {
    config->config.estimator = to_core(estimator);
    config->config.validate();
  });
}

dl_status dl_run_config_set_batch_size(dl_run_config* config, int64_t batch_size) {
  if (auto s = require(config != nullptr, "null argument")) return s;
  return guarded([&] {
    config->config.batch_size = static_cast<Eigen::Index>(batch_size);
    config->config.validate();
  });
}

dl_status dl_cmd_synth(const dl_run_config* config, const char* out_dir) {
  if (auto s = require(config && out_dir, "null argument")) return s;
  return guarded([&] { pipeline::cmd_synth(config->config, out_dir); });
}

dl_status dl_cmd_train(const dl_run_config* config, const char* out_dir) {
  if (auto s = require(config && out_dir, "null argument")) return s;
  return guarded([&] { pipeline::cmd_train(config->config, out_dir); });
}

dl_status dl_cmd_eval(const dl_run_config* config, const char* out_dir) {
  if (auto s = require(config && out_dir, "null argument")) return s;
  return guarded([&] { pipeline::cmd_eval(config->config, out_dir); });
}

dl_status dl_cmd_metrics(const dl_run_config* config, const char* out_dir,
                         const char* kinds) {
  if (auto s = require(config && out_dir, "null argument")) return s;
  return guarded([&] {
    std::vector<metrics::MetricKind> parsed;
    if (kinds && *kinds) {
      std::stringstream stream(kinds);
      std::string token;
      while (std::getline(stream, token, ',')) {
        if (!token.empty()) parsed.push_back(metrics::parse_metric(token));
      }
    } else {
      parsed = {metrics::MetricKind::ds_diff, metrics::MetricKind::ds_sim,
                metrics::MetricKind::model_sim};
    }
    pipeline::cmd_metrics(config->config, out_dir, parsed);
  });
}

dl_status dl_cmd_correlate(const dl_run_config* config, const char* out_dir) {
  if (auto s = require(config && out_dir, "null argument")) return s;
  return guarded([&] { pipeline::cmd_correlate(config->config, out_dir); });
}

dl_status dl_cmd_select(const dl_run_config* config, const char* out_dir) {
  if (auto s = require(config && out_dir, "null argument")) return s;
  return guarded([&] { pipeline::cmd_select(config->config, out_dir); });
}

dl_status dl_cmd_report(const dl_run_config* config, const char* out_dir, int svg) {
  if (auto s = require(config && out_dir, "null argument")) return s;
  return guarded([&] { pipeline::cmd_report(config->config, out_dir, svg != 0); });
}

dl_status dl_cmd_correlate_fixture(const char* fixture_csv, const char* out_dir) {
  if (auto s = require(fixture_csv && out_dir, "null argument")) return s;
  return guarded([&] { pipeline::cmd_correlate_fixture(fixture_csv, out_dir); });
}

dl_status dl_cmd_select_fixture(const char* fixture_csv, const char* out_dir) {
  if (auto s = require(fixture_csv && out_dir, "null argument")) return s;
  return guarded([&] { pipeline::cmd_select_fixture(fixture_csv, out_dir); });
}

}  // extern "C"
