#include <doctest.h>

#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/rng.hpp"

#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <sstream>

using namespace driftlens;
namespace fs = std::filesystem;

namespace {

// Unique scratch directory per test run, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("driftlens_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const char* sub = "") const { return (path / sub).string(); }
};

RunConfig tiny_config() {
  return parse_config(R"({
    "seed": 21,
    "fold_count": 2,
    "batch_size": 32,
    "arch": [10, 10, 10, 10, 10, 10],
    "domains": [
      {"domain_id": "calm",  "subjects": 6, "clip_seconds": 12,
       "hr_mean": 70, "hr_stddev": 3, "noise_level": 0.0,
       "illumination_offset": 0.0},
      {"domain_id": "shift", "subjects": 6, "clip_seconds": 12,
       "hr_mean": 90, "hr_stddev": 3, "noise_level": 0.5,
       "illumination_offset": 1.5},
      {"domain_id": "wild",  "subjects": 6, "clip_seconds": 12,
       "hr_mean": 110, "hr_stddev": 3, "noise_level": 1.0,
       "illumination_offset": 3.0}
    ]
  })");
}

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("pipeline commands hand off through files") {
  const RunConfig config = tiny_config();
  TempDir dir("pipeline");
  const std::string out = dir.str("out");

  pipeline::cmd_synth(config, out);
  CHECK(fs::exists(fs::path(out) / "datasets" / "calm" / "s000.actv"));
  CHECK(fs::exists(fs::path(out) / "datasets" / "calm" / "ground_truth.csv"));
  CHECK(fs::exists(fs::path(out) / "datasets" / "summary_stats.csv"));

  pipeline::cmd_train(config, out);
  int model_files = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(out) / "models")) {
    (void)entry;
    ++model_files;
  }
  CHECK(model_files == 3 * 2);  // |domains| x fold_count

  pipeline::cmd_eval(config, out);
  const auto mae = pipeline::detail::load_table(out, metrics::MetricKind::mae);
  CHECK(mae.domains() == config.domain_ids());
  CHECK(mae.fold_count() == 2);
  CHECK(mae.complete());

  // A clean-domain model degrades away from home.
  const Matrix mae_means = mae.fold_mean();
  CHECK(mae_means(0, 2) > mae_means(0, 0));

  pipeline::cmd_metrics(config, out);
  for (const auto kind : {metrics::MetricKind::ds_diff, metrics::MetricKind::ds_sim,
                          metrics::MetricKind::model_sim}) {
    const auto table = pipeline::detail::load_table(out, kind);
    CHECK(table.complete());
    const Matrix means = table.fold_mean();
    if (kind == metrics::MetricKind::ds_diff) {
      for (Eigen::Index d = 0; d < means.rows(); ++d) {
        CHECK(means(d, d) == 0.0);
      }
    }
  }

  pipeline::cmd_correlate(config, out);
  const auto correlation = csv::read_file(out + "/tables/correlation.csv");
  CHECK(correlation.header.front() == "train_domain");
  CHECK(correlation.rows.size() == 3 + 2);  // domains + composite + threshold

  pipeline::cmd_select(config, out);
  const auto selection = csv::read_file(out + "/tables/selection.csv");
  CHECK(selection.rows.size() == 3 + 1);  // domains + average row
  CHECK(fs::exists(fs::path(out) / "tables" / "selection_residuals.csv"));

  pipeline::cmd_report(config, out, true);
  for (const char* name : {"heatmap_mae.csv", "heatmap_ds_diff.csv", "heatmap_mae.svg"}) {
    CHECK(fs::exists(fs::path(out) / "report" / name));
  }
  const std::string svg = file_bytes(fs::path(out) / "report" / "heatmap_ds_sim.svg");
  CHECK(svg.find("inverted colormap") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
  const RunConfig config = tiny_config();
  TempDir dir("rerun");
  const std::string out_a = dir.str("a");
  const std::string out_b = dir.str("b");
  for (const auto& out : {out_a, out_b}) {
    pipeline::cmd_synth(config, out);
    pipeline::cmd_train(config, out);
    pipeline::cmd_eval(config, out);
  }
  for (const char* relative :
       {"datasets/calm/s000.actv", "datasets/calm/ground_truth.csv",
        "datasets/summary_stats.csv", "models/calm_f0.model.json",
        "models/wild_f1.model.json", "tables/mae.csv", "tables/mae_foldmean.csv"}) {
    CHECK(file_bytes(fs::path(out_a) / relative) == file_bytes(fs::path(out_b) / relative));
  }

  // Rerunning into the same directory rewrites identical bytes.
  const std::string before = file_bytes(fs::path(out_a) / "tables/mae.csv");
  pipeline::cmd_eval(config, out_a);
  CHECK(file_bytes(fs::path(out_a) / "tables/mae.csv") == before);
}

TEST_CASE("missing upstream artifacts point at the producing command") {
  const RunConfig config = tiny_config();
  TempDir dir("missing");

  try {
    pipeline::cmd_train(config, dir.str("fresh"));
    FAIL("expected coverage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::coverage);
    CHECK(std::string(e.what()).find("driftlens synth") != std::string::npos);
  }

  pipeline::cmd_synth(config, dir.str("half"));
  try {
    pipeline::cmd_eval(config, dir.str("half"));
    FAIL("expected coverage error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("driftlens train") != std::string::npos);
  }

  try {
    pipeline::cmd_select(config, dir.str("half"));
    FAIL("expected coverage error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("driftlens metrics") != std::string::npos);
  }
}

TEST_CASE("output directory lock blocks concurrent runs") {
  const RunConfig config = tiny_config();
  TempDir dir("lock");
  const std::string out = dir.str("out");
  fs::create_directories(out);
  std::ofstream(fs::path(out) / ".driftlens.lock") << "held\n";
  try {
    pipeline::cmd_synth(config, out);
    FAIL("expected lock error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find(".driftlens.lock") != std::string::npos);
  }
  // Removing the stale lock unblocks the command.
  fs::remove(fs::path(out) / ".driftlens.lock");
  pipeline::cmd_synth(config, out);
  CHECK(!fs::exists(fs::path(out) / ".driftlens.lock"));
}

TEST_CASE("a 21-domain, 5-fold run yields 105 model files") {
  std::ostringstream doc;
  doc << R"({"seed": 3, "fold_count": 5, "batch_size": 16,
             "arch": [6, 6], "stft": {"window_s": 6.0, "hop_s": 1.0},
             "domains": [)";
  for (int d = 0; d < 21; ++d) {
    if (d > 0) doc << ',';
    doc << R"({"domain_id": "dom)" << d
        << R"(", "subjects": 5, "clip_seconds": 7, "hr_mean": )" << (60 + d * 2)
        << '}';
  }
  doc << "]}";
  const RunConfig config = parse_config(doc.str());
  TempDir dir("many");
  const std::string out = dir.str("out");
  pipeline::cmd_synth(config, out);
  const auto summary = csv::read_file(out + "/datasets/summary_stats.csv");
  CHECK(summary.rows.size() == 21);

  pipeline::cmd_train(config, out);
  int model_files = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(out) / "models")) {
    (void)entry;
    ++model_files;
  }
  CHECK(model_files == 105);
}

TEST_CASE("correlating a table against itself gives unit correlations") {
  TempDir dir("identity");
  const std::string out = dir.str("out");
  fs::create_directories(fs::path(out) / "tables");

  metrics::MetricTable mae(metrics::MetricKind::mae, {"a", "b", "c", "d"}, 2);
  Rng rng(15);
  for (std::size_t x = 0; x < 4; ++x) {
    for (std::size_t y = 0; y < 4; ++y) {
      for (int f = 0; f < 2; ++f) mae.at(x, y, f) = 1.0 + 4.0 * rng.uniform();
    }
  }
  std::vector<metrics::MetricTable> tables;
  {
    std::stringstream buffer;
    mae.write_long_csv(buffer);
    tables.push_back(metrics::MetricTable::read_long_csv(buffer, metrics::MetricKind::ds_diff));
  }
  const auto sets = pipeline::detail::correlate_tables(tables, mae, true);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].report.clamped);
  for (const auto& row : sets[0].report.rows) {
    CHECK(row.r == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(sets[0].report.composite > 0.999);
  CHECK(sets[0].report.composite < 1.0);
}
