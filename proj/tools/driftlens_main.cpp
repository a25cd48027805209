// driftlens CLI: batch front end over the libdriftlens C API. Subcommands
// hand artifacts to each other through files in the output directory, so
// every stage is independently rerunnable and reproducible.

#include <driftlens.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

struct ConfigDeleter {
  void operator()(dl_run_config* config) const { dl_run_config_free(config); }
};
using ConfigPtr = std::unique_ptr<dl_run_config, ConfigDeleter>;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string estimator;
  std::int64_t batch_size = 0;
};

void add_common(CLI::App* cmd, CommonOptions& options, bool config_required) {
  auto* config_opt = cmd->add_option("--config", options.config_path,
                                     "Run configuration (JSON)");
  if (config_required) config_opt->required();
  cmd->add_option("--out", options.out_dir, "Output directory")
      ->capture_default_str();
  cmd->add_option("--seed", options.seed, "Override the global seed")
      ->each([&options](const std::string&) { options.seed_set = true; });
  cmd->add_option("--estimator", options.estimator, "CKA estimator")
      ->check(CLI::IsMember({"biased", "unbiased"}));
  cmd->add_option("--batch-size", options.batch_size, "CKA batch size")
      ->check(CLI::PositiveNumber);
}

int fail(const std::string& command, dl_status status) {
  std::fprintf(stderr, "driftlens %s: %s (%s)\n", command.c_str(), dl_last_error(),
               dl_status_name(status));
  return 1;
}

ConfigPtr load_config_with_overrides(const std::string& command,
                                     const CommonOptions& options, int& exit_code) {
  dl_run_config* raw = nullptr;
  dl_status status = dl_run_config_load(options.config_path.c_str(), &raw);
  if (status != DL_OK) {
    exit_code = fail(command, status);
    return nullptr;
  }
  ConfigPtr config(raw);
  if (options.seed_set) status = dl_run_config_set_seed(config.get(), options.seed);
  if (status == DL_OK && !options.estimator.empty()) {
    status = dl_run_config_set_estimator(config.get(),
                                         options.estimator == "biased"
                                             ? DL_ESTIMATOR_BIASED
                                             : DL_ESTIMATOR_UNBIASED);
  }
  if (status == DL_OK && options.batch_size > 0) {
    status = dl_run_config_set_batch_size(config.get(), options.batch_size);
  }
  if (status != DL_OK) {
    exit_code = fail(command, status);
    return nullptr;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftlens: domain-shift measurement from model-activation similarity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dl_version()));

  CommonOptions synth_opts, train_opts, eval_opts, metrics_opts, correlate_opts,
      select_opts, report_opts;
  std::vector<std::string> metric_kinds;
  std::string correlate_fixture, select_fixture;
  bool report_svg = false;

  auto* synth = app.add_subcommand("synth", "Generate the configured synthetic domains");
  add_common(synth, synth_opts, true);

  auto* train = app.add_subcommand("train", "Fit one model per (domain, fold)");
  add_common(train, train_opts, true);

  auto* eval = app.add_subcommand("eval", "Cross-dataset heart-rate MAE table");
  add_common(eval, eval_opts, true);

  auto* metrics = app.add_subcommand("metrics", "CKA domain-shift metric tables");
  add_common(metrics, metrics_opts, true);
  metrics->add_option("--kind", metric_kinds,
                      "Metric subset (ds_diff, ds_sim, model_sim); default all")
      ->check(CLI::IsMember({"ds_diff", "ds_sim", "model_sim"}));

  auto* correlate = app.add_subcommand("correlate", "Correlate metric tables against MAE");
  add_common(correlate, correlate_opts, false);
  correlate->add_option("--fixtures", correlate_fixture,
                        "Reproduce composites from a published correlation CSV");

  auto* select = app.add_subcommand("select", "DS-diff model selection report");
  add_common(select, select_opts, false);
  select->add_option("--fixtures", select_fixture,
                     "Reproduce the selection table from a published benchmark CSV");

  auto* report = app.add_subcommand("report", "Fold-mean heatmap matrices");
  add_common(report, report_opts, false);
  report->add_flag("--svg", report_svg, "Also render SVG heatmaps");

  CLI11_PARSE(app, argc, argv);

  int exit_code = 0;
  auto run_with_config = [&exit_code](const std::string& name,
                                      const CommonOptions& options, auto&& fn) {
    ConfigPtr config = load_config_with_overrides(name, options, exit_code);
    if (!config) return;
    const dl_status status = fn(config.get(), options.out_dir.c_str());
    if (status != DL_OK) exit_code = fail(name, status);
  };

  if (synth->parsed()) {
    run_with_config("synth", synth_opts, dl_cmd_synth);
  } else if (train->parsed()) {
    run_with_config("train", train_opts, dl_cmd_train);
  } else if (eval->parsed()) {
    run_with_config("eval", eval_opts, dl_cmd_eval);
  } else if (metrics->parsed()) {
    std::string kinds;
    for (const auto& kind : metric_kinds) {
      if (!kinds.empty()) kinds += ',';
      kinds += kind;
    }
    run_with_config("metrics", metrics_opts,
                    [&kinds](const dl_run_config* config, const char* out) {
                      return dl_cmd_metrics(config, out, kinds.c_str());
                    });
  } else if (correlate->parsed()) {
    if (!correlate_fixture.empty()) {
      const dl_status status = dl_cmd_correlate_fixture(
          correlate_fixture.c_str(), correlate_opts.out_dir.c_str());
      if (status != DL_OK) exit_code = fail("correlate", status);
    } else if (correlate_opts.config_path.empty()) {
      std::fprintf(stderr, "driftlens correlate: need --config or --fixtures\n");
      exit_code = 1;
    } else {
      run_with_config("correlate", correlate_opts, dl_cmd_correlate);
    }
  } else if (select->parsed()) {
    if (!select_fixture.empty()) {
      const dl_status status =
          dl_cmd_select_fixture(select_fixture.c_str(), select_opts.out_dir.c_str());
      if (status != DL_OK) exit_code = fail("select", status);
    } else if (select_opts.config_path.empty()) {
      std::fprintf(stderr, "driftlens select: need --config or --fixtures\n");
      exit_code = 1;
    } else {
      run_with_config("select", select_opts, dl_cmd_select);
    }
  } else if (report->parsed()) {
    if (report_opts.config_path.empty()) {
      std::fprintf(stderr, "driftlens report: need --config\n");
      exit_code = 1;
    } else {
      run_with_config("report", report_opts,
                      [report_svg](const dl_run_config* config, const char* out) {
                        return dl_cmd_report(config, out, report_svg ? 1 : 0);
                      });
    }
  }
  return exit_code;
}
