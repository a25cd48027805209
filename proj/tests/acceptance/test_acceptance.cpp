// Acceptance suite: one test case per release criterion, each printing a
// PASS/FAIL line so the run reads as a checklist.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/activations.hpp"
#include "core/cka.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/hr.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "core/rng.hpp"
#include "core/selection.hpp"
#include "core/stats.hpp"
#include "core/synth.hpp"
#include "core/toy_model.hpp"

#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace driftlens;
namespace fs = std::filesystem;

namespace {

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("ACCEPTANCE %-3s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double elapsed_s(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
  }
  return m;
}

// Biased CKA straight from the expanded double-sum identity, sharing no code
// with the library path.
double biased_cka_oracle(const Matrix& x, const Matrix& y) {
  auto gram = [](const Matrix& m) {
    const auto n = m.rows();
    Matrix g = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < m.cols(); ++k) g(i, j) += m(i, k) * m(j, k);
    return g;
  };
  auto hsic = [](const Matrix& k, const Matrix& l) {
    const auto n = k.rows();
    double dot = 0.0, sum_k = 0.0, sum_l = 0.0, cross = 0.0;
    std::vector<double> row_k(static_cast<std::size_t>(n), 0.0);
    std::vector<double> row_l(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        dot += k(i, j) * l(i, j);
        sum_k += k(i, j);
        sum_l += l(i, j);
        row_k[static_cast<std::size_t>(i)] += k(i, j);
        row_l[static_cast<std::size_t>(i)] += l(i, j);
      }
    }
    for (std::size_t i = 0; i < row_k.size(); ++i) cross += row_k[i] * row_l[i];
    const double nd = static_cast<double>(n);
    return (dot - 2.0 * cross / nd + sum_k * sum_l / (nd * nd)) /
           ((nd - 1.0) * (nd - 1.0));
  };
  const Matrix kx = gram(x);
  const Matrix ky = gram(y);
  return hsic(kx, ky) / std::sqrt(hsic(kx, kx) * hsic(ky, ky));
}

// Term-by-term evaluation of the unbiased estimator with raw loops.
double unbiased_hsic_oracle(const Matrix& kx, const Matrix& ky) {
  const auto n = kx.rows();
  const double nd = static_cast<double>(n);
  double trace_term = 0.0, sum_k = 0.0, sum_l = 0.0, cross_term = 0.0;
  std::vector<double> row_k(static_cast<std::size_t>(n), 0.0);
  std::vector<double> row_l(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      trace_term += kx(i, j) * ky(j, i);
      sum_k += kx(i, j);
      sum_l += ky(i, j);
      row_k[static_cast<std::size_t>(i)] += kx(i, j);
      row_l[static_cast<std::size_t>(i)] += ky(i, j);
    }
  }
  for (std::size_t i = 0; i < row_k.size(); ++i) cross_term += row_k[i] * row_l[i];
  return (trace_term + sum_k * sum_l / ((nd - 1.0) * (nd - 2.0)) -
          2.0 * cross_term / (nd - 2.0)) /
         (nd * (nd - 3.0));
}

ActivationSet random_set(Eigen::Index n, const std::vector<Eigen::Index>& widths,
                         Rng& rng) {
  ActivationSet set;
  set.model_id = "m";
  set.dataset_id = "d";
  int index = 0;
  for (const auto w : widths) {
    set.layers.push_back(
        {"layer" + std::to_string(index++), random_matrix(n, w, rng)});
  }
  return set;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("driftlens_accept_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<double> ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> out(values.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    out[order[rank]] = static_cast<double>(rank);
  }
  return out;
}

// Spearman rank correlation over the pooled fold-mean grid cells.
double spearman_sign_metric(const metrics::MetricTable& metric,
                            const metrics::MetricTable& mae) {
  const Matrix a = metric.fold_mean();
  const Matrix b = mae.fold_mean();
  std::vector<double> xs, ys;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      xs.push_back(a(i, j));
      ys.push_back(b(i, j));
    }
  }
  return stats::pearson(ranks(xs), ranks(ys)).r;
}

// The synthetic acceptance grid: five domains whose noise level rises
// monotonically and whose heart-rate means are spread apart; illumination
// rises alongside so that transfers degrade in both directions.
RunConfig acceptance_grid(std::uint64_t seed) {
  std::ostringstream doc;
  doc << R"({"seed": )" << seed << R"(, "fold_count": 3, "batch_size": 64,
      "arch": [12, 12, 12, 12, 12, 12], "domains": [)";
  const double noise[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const double illumination[] = {0.0, 1.2, 2.4, 3.6, 4.8};
  const int hr[] = {60, 75, 90, 105, 120};
  for (int d = 0; d < 5; ++d) {
    if (d > 0) doc << ',';
    doc << R"({"domain_id": "grid)" << d << R"(", "subjects": 20,
        "clip_seconds": 30, "hr_mean": )"
        << hr[d] << R"(, "hr_stddev": 3, "noise_level": )" << noise[d]
        << R"(, "illumination_offset": )" << illumination[d] << '}';
  }
  doc << "]}";
  return parse_config(doc.str());
}

}  // namespace

TEST_CASE("criterion 1: Fisher composite fixture") {
  const auto start = std::chrono::steady_clock::now();
  const auto columns = pipeline::detail::load_correlation_fixture(
      DRIFTLENS_FIXTURE_DIR "/rppg_benchmark_correlations.csv");

  double ds_diff_composite = 0.0;
  double model_sim_composite = 0.0;
  for (const auto& column : columns) {
    if (column.kind == metrics::MetricKind::ds_diff) {
      ds_diff_composite = stats::fisher_composite(column.rs);
    }
    if (column.kind == metrics::MetricKind::model_sim) {
      model_sim_composite = stats::fisher_composite(column.rs);
    }
  }
  const double runtime = elapsed_s(start);
  const bool pass = std::abs(ds_diff_composite - 0.781) <= 0.002 &&
                    std::abs(model_sim_composite - (-0.896)) <= 0.002 &&
                    runtime < 1.0;
  report("1", pass,
         "Fisher composites " + std::to_string(ds_diff_composite) + " / " +
             std::to_string(model_sim_composite) + " (targets 0.781 / -0.896), " +
             std::to_string(runtime) + " s");
  CHECK(std::abs(ds_diff_composite - 0.781) <= 0.002);
  CHECK(std::abs(model_sim_composite - (-0.896)) <= 0.002);
  CHECK(runtime < 1.0);
}

TEST_CASE("criterion 2: Bonferroni threshold fixture") {
  const double threshold = stats::bonferroni_threshold(0.05, 21);
  const bool pass = std::abs(threshold - 0.00238) < 5e-6 && threshold < 0.0024;
  report("2", pass, "0.05/21 = " + std::to_string(threshold) + " (< 0.0024)");
  CHECK(std::abs(threshold - 0.00238) < 5e-6);
  CHECK(threshold < 0.0024);
}

TEST_CASE("criterion 3a: per-row percent-improvement reproduction") {
  // The published percent columns are five-fold means of per-fold ratios;
  // recomputing them from the fold-mean MAE columns cannot match every row.
  // Kept as specified; the discrepancy is data-level, not a code defect.
  const auto rows = pipeline::detail::load_selection_fixture(
      DRIFTLENS_FIXTURE_DIR "/rppg_benchmark_selection.csv");
  int failing = 0;
  double worst_deviation = 0.0;
  for (const auto& row : rows) {
    const double rw = selection::percent_improvement(row.worst, row.chosen);
    const double ra = selection::percent_improvement(row.average, row.chosen);
    const double rb = selection::percent_improvement(row.best, row.chosen);
    const double deviation =
        std::max({std::abs(rw - row.pct_worst), std::abs(ra - row.pct_average),
                  std::abs(rb - row.pct_best)});
    worst_deviation = std::max(worst_deviation, deviation);
    if (deviation > 0.005) ++failing;
  }
  const bool pass = failing == 0;
  report("3a", pass,
         std::to_string(failing) + "/21 rows deviate beyond 0.005 (max " +
             std::to_string(worst_deviation) +
             "); published columns are per-fold averages");
  CHECK(failing == 0);
}

TEST_CASE("criterion 3b: selection fixture average row") {
  const auto rows = pipeline::detail::load_selection_fixture(
      DRIFTLENS_FIXTURE_DIR "/rppg_benchmark_selection.csv");
  std::vector<selection::SelectionResult> results;
  std::vector<std::string> domains;
  for (const auto& row : rows) {
    selection::SelectionResult r;
    r.test_domain = row.test_domain;
    r.fold = 0;
    r.chosen_mae = row.chosen;
    r.base = {row.worst, row.average, row.best};
    r.pct_over_worst = row.pct_worst;
    r.pct_over_average = row.pct_average;
    r.pct_over_best = row.pct_best;
    results.push_back(std::move(r));
    domains.push_back(row.test_domain);
  }
  const auto summary = selection::selection_report(results, domains, 1);
  const auto& avg = summary.average_row;
  const bool mae_pass = std::abs(avg.worst.mean - 10.301) <= 0.01 &&
                        std::abs(avg.average.mean - 7.314) <= 0.01 &&
                        std::abs(avg.best.mean - 5.545) <= 0.01 &&
                        std::abs(avg.chosen.mean - 6.888) <= 0.01;
  const bool pct_pass = std::abs(avg.pct_over_worst.mean - 0.412) <= 0.005 &&
                        std::abs(avg.pct_over_average.mean - 0.139) <= 0.005 &&
                        std::abs(avg.pct_over_best.mean - (-0.321)) <= 0.005;
  report("3b", mae_pass && pct_pass,
         "average row MAE " + std::to_string(avg.chosen.mean) +
             ", pct " + std::to_string(avg.pct_over_worst.mean) + "/" +
             std::to_string(avg.pct_over_average.mean) + "/" +
             std::to_string(avg.pct_over_best.mean));
  CHECK(mae_pass);
  CHECK(pct_pass);
}

TEST_CASE("criterion 3c: residual medians") {
  const auto rows = pipeline::detail::load_selection_fixture(
      DRIFTLENS_FIXTURE_DIR "/rppg_benchmark_selection.csv");
  std::vector<selection::DomainResiduals> inputs;
  for (const auto& row : rows) {
    inputs.push_back({row.test_domain, row.chosen, {row.worst, row.average, row.best}});
  }
  const auto medians = selection::residual_medians(inputs);
  const bool pass = std::abs(medians.vs_worst - (-3.2)) <= 0.05 &&
                    std::abs(medians.vs_average - (-0.65)) <= 0.05 &&
                    std::abs(medians.vs_best - 0.96) <= 0.05;
  report("3c", pass,
         "medians " + std::to_string(medians.vs_worst) + " / " +
             std::to_string(medians.vs_average) + " / " +
             std::to_string(medians.vs_best) + " (targets -3.2 / -0.65 / 0.96)");
  CHECK(std::abs(medians.vs_worst - (-3.2)) <= 0.05);
  CHECK(std::abs(medians.vs_average - (-0.65)) <= 0.05);
  CHECK(std::abs(medians.vs_best - 0.96) <= 0.05);
}

TEST_CASE("criterion 4: estimator oracle equivalence") {
  Rng rng(1001);
  double worst_biased = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(4 + rng.next_u64() % 29);  // 4..32
    const auto px = static_cast<Eigen::Index>(1 + rng.next_u64() % 6);
    const auto py = static_cast<Eigen::Index>(1 + rng.next_u64() % 6);
    const Matrix x = random_matrix(n, px, rng);
    const Matrix y = random_matrix(n, py, rng);
    const double library = cka::cka_pair(x, y, cka::Estimator::biased).value;
    worst_biased = std::max(worst_biased, std::abs(library - biased_cka_oracle(x, y)));
  }

  double worst_unbiased = 0.0;
  for (Eigen::Index n = 4; n <= 8; ++n) {
    for (int trial = 0; trial < 40; ++trial) {
      const Matrix kx = cka::gram_linear(random_matrix(n, 3, rng));
      const Matrix ky = cka::gram_linear(random_matrix(n, 2, rng));
      worst_unbiased = std::max(
          worst_unbiased,
          std::abs(cka::hsic_unbiased(kx, ky) - unbiased_hsic_oracle(kx, ky)));
    }
  }
  const bool pass = worst_biased < 1e-10 && worst_unbiased < 1e-10;
  report("4", pass,
         "max |diff| biased " + std::to_string(worst_biased) + ", unbiased " +
             std::to_string(worst_unbiased));
  CHECK(worst_biased < 1e-10);
  CHECK(worst_unbiased < 1e-10);
}

TEST_CASE("criterion 5: CKA invariance suite") {
  bool pass = true;
  std::string detail = "100 seeds";
  for (std::uint64_t seed = 0; seed < 100 && pass; ++seed) {
    Rng rng(7000 + seed);
    const auto n = static_cast<Eigen::Index>(16 + rng.next_u64() % 17);
    const ActivationSet a = random_set(n, {3, 5}, rng);
    const ActivationSet b = random_set(n, {4, 2}, rng);
    const cka::CkaOptions options{cka::Estimator::biased, n};

    const cka::CkaMap self = cka::cka_map(a, a, options);
    for (Eigen::Index i = 0; i < self.values.rows() && pass; ++i) {
      pass = std::abs(self.values(i, i) - 1.0) <= 1e-9;
      if (!pass) detail = "self-CKA violation at seed " + std::to_string(seed);
    }

    ActivationSet transformed = a;
    for (auto& layer : transformed.layers) {
      const Matrix q = Eigen::HouseholderQR<Matrix>(
                           random_matrix(layer.data.cols(), layer.data.cols(), rng))
                           .householderQ();
      layer.data = (layer.data * q * 1.7).eval();
    }
    const cka::CkaMap ab = cka::cka_map(a, b, options);
    const cka::CkaMap tb = cka::cka_map(transformed, b, options);
    if (pass && (ab.values - tb.values).cwiseAbs().maxCoeff() > 1e-9) {
      pass = false;
      detail = "transform invariance violation at seed " + std::to_string(seed);
    }

    const cka::CkaMap ba = cka::cka_map(b, a, options);
    if (pass && (ab.values - ba.values.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      pass = false;
      detail = "transpose symmetry violation at seed " + std::to_string(seed);
    }

    if (pass &&
        (ab.values.minCoeff() < -1e-9 || ab.values.maxCoeff() > 1.0 + 1e-9)) {
      pass = false;
      detail = "biased range violation at seed " + std::to_string(seed);
    }
  }
  report("5", pass, detail);
  CHECK(pass);
}

TEST_CASE("criterion 6: metric identities") {
  synth::DomainSpec spec;
  spec.domain_id = "identity";
  spec.subjects = 8;
  spec.clip_seconds = 12.0;
  spec.hr_mean = 85.0;
  spec.hr_stddev = 4.0;
  spec.seed = 2024;
  const auto dataset = synth::generate_domain(spec);
  const auto ids = dataset.subject_ids();
  const auto model = synth::build_toy_model({10, 10, 10, 10, 10, 10}, 12, 55, "m");
  const auto acts = synth::forward_collect(model, dataset, ids).activations;
  const cka::CkaOptions options{cka::Estimator::unbiased, 64};

  const auto self_map = cka::cka_map(acts, acts, options);
  const double dsdiff_self = metrics::ds_diff(self_map, self_map);
  const double modelsim_self = metrics::model_sim(self_map);
  const double dssim_self = metrics::ds_sim(self_map);

  const bool pass = dsdiff_self == 0.0 && std::abs(modelsim_self - 1.0) <= 1e-6 &&
                    std::abs(dssim_self - 1.0) <= 1e-6;
  report("6", pass,
         "ds_diff(x,x) = " + std::to_string(dsdiff_self) + ", model_sim(m,m) = " +
             std::to_string(modelsim_self) + ", ds_sim(paired) = " +
             std::to_string(dssim_self));
  CHECK(dsdiff_self == 0.0);
  CHECK(std::abs(modelsim_self - 1.0) <= 1e-6);
  CHECK(std::abs(dssim_self - 1.0) <= 1e-6);
}

TEST_CASE("criterion 7: STFT correctness") {
  hr::BvpSeries tone;
  tone.fps = 30.0;
  for (int t = 0; t < 900; ++t) {
    tone.samples.push_back(std::sin(2.0 * M_PI * 1.5 * t / 30.0));
  }
  const auto series = hr::stft_hr(tone);
  const double bin = 60.0 * 30.0 / (hr::kZeroPadFactor * 10.0 * 30.0);
  bool within_bin = !series.hr_bpm.empty();
  for (const double hr_bpm : series.hr_bpm) {
    within_bin = within_bin && std::abs(hr_bpm - 90.0) <= bin;
  }

  auto scaled = tone;
  for (double& v : scaled.samples) v *= 917.3;
  const bool scale_invariant = hr::stft_hr(scaled).hr_bpm == series.hr_bpm;

  report("7", within_bin && scale_invariant,
         "90 BPM within one bin (" + std::to_string(bin) + " BPM) across " +
             std::to_string(series.hr_bpm.size()) +
             " windows; amplitude invariance " + (scale_invariant ? "exact" : "BROKEN"));
  CHECK(within_bin);
  CHECK(scale_invariant);
}

TEST_CASE("criterion 8: synthetic grid statistical property") {
  const auto start = std::chrono::steady_clock::now();
  int ds_diff_positive = 0;
  int model_sim_negative = 0;
  int selection_below_worst = 0;
  int spearman_signs_expected = 0;
  std::string detail;

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunConfig config = acceptance_grid(seed);
    TempDir dir("grid_seed" + std::to_string(seed));
    const std::string out = dir.path.string() + "/run";
    pipeline::cmd_synth(config, out);
    pipeline::cmd_train(config, out);
    pipeline::cmd_eval(config, out);
    pipeline::cmd_metrics(config, out,
                          {metrics::MetricKind::ds_diff, metrics::MetricKind::model_sim});

    const auto mae = pipeline::detail::load_table(out, metrics::MetricKind::mae);
    std::vector<metrics::MetricTable> tables;
    tables.push_back(pipeline::detail::load_table(out, metrics::MetricKind::ds_diff));
    tables.push_back(pipeline::detail::load_table(out, metrics::MetricKind::model_sim));
    const auto correlations =
        pipeline::detail::correlate_tables(tables, mae, config.include_self_pairs);

    double ds_diff_composite = 0.0;
    double model_sim_composite = 0.0;
    for (const auto& set : correlations) {
      if (set.kind == metrics::MetricKind::ds_diff) {
        ds_diff_composite = set.report.composite;
      } else if (set.kind == metrics::MetricKind::model_sim) {
        model_sim_composite = set.report.composite;
      }
    }
    if (ds_diff_composite > 0.0) ++ds_diff_positive;
    if (model_sim_composite < 0.0) ++model_sim_negative;
    if (spearman_sign_metric(tables[0], mae) > 0.0 &&
        spearman_sign_metric(tables[1], mae) < 0.0) {
      ++spearman_signs_expected;
    }

    const auto outcome = pipeline::detail::run_selection(
        tables.front(), mae, config.include_self_candidates);
    const double chosen = outcome.report.average_row.chosen.mean;
    const double worst = outcome.report.average_row.worst.mean;
    if (chosen < worst) ++selection_below_worst;

    detail += "s" + std::to_string(seed) + "(" +
              std::to_string(ds_diff_composite).substr(0, 6) + "," +
              std::to_string(model_sim_composite).substr(0, 6) + ") ";
  }

  const double runtime = elapsed_s(start);
  const bool pass = ds_diff_positive >= 4 && model_sim_negative >= 4 &&
                    selection_below_worst == 5 && spearman_signs_expected >= 4 &&
                    runtime < 300.0;
  report("8", pass,
         "ds_diff>0 in " + std::to_string(ds_diff_positive) + "/5, model_sim<0 in " +
             std::to_string(model_sim_negative) + "/5, selection<worst in " +
             std::to_string(selection_below_worst) + "/5, spearman signs in " +
             std::to_string(spearman_signs_expected) + "/5, " +
             std::to_string(runtime) + " s; " + detail);
  CHECK(ds_diff_positive >= 4);
  CHECK(model_sim_negative >= 4);
  CHECK(selection_below_worst == 5);
  CHECK(spearman_signs_expected >= 4);
  CHECK(runtime < 300.0);
}

TEST_CASE("criterion 9: dump format robustness") {
  Rng rng(31337);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto layer_count = 1 + rng.next_u64() % 4;
    const auto n = static_cast<Eigen::Index>(1 + rng.next_u64() % 10);
    ActivationSet set;
    set.model_id = "model" + std::to_string(trial);
    set.dataset_id = "ds";
    for (std::uint64_t l = 0; l < layer_count; ++l) {
      set.layers.push_back(
          {"layer" + std::to_string(l),
           random_matrix(n, static_cast<Eigen::Index>(1 + rng.next_u64() % 8), rng)});
    }
    std::stringstream stream(std::ios::in | std::ios::out | std::ios::binary);
    write_activation_dump(set, stream);
    const ActivationSet back = read_activation_dump(stream);
    bool ok = back.layers.size() == set.layers.size();
    for (std::size_t l = 0; ok && l < set.layers.size(); ++l) {
      ok = back.layers[l].name == set.layers[l].name &&
           back.layers[l].data == set.layers[l].data.cast<float>().cast<double>();
    }
    if (!ok) ++failures;
  }

  // Declared error classes for corrupted streams.
  Rng crng(99);
  ActivationSet sample;
  sample.model_id = "m";
  sample.dataset_id = "d";
  sample.layers.push_back({"a", random_matrix(4, 3, crng)});
  sample.layers.push_back({"b", random_matrix(4, 2, crng)});
  std::ostringstream dump(std::ios::binary);
  write_activation_dump(sample, dump);
  const std::string bytes = dump.str();

  auto code_of_read = [](std::string data) {
    std::istringstream in(data, std::ios::binary);
    try {
      (void)read_activation_dump(in);
      return std::string("none");
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::format: return std::string("format");
        case ErrorCode::unsupported_version: return std::string("version");
        case ErrorCode::corrupt: return std::string("corrupt");
        case ErrorCode::validation: return std::string("validation");
        default: return std::string("other");
      }
    }
  };

  std::string magic = bytes;
  magic[0] = 'Z';
  std::string version = bytes;
  version[4] = 9;
  std::string truncated = bytes.substr(0, bytes.size() - 5);
  std::string nan_payload = bytes;
  const std::size_t first_value = 4 + 4 + 3 + 3 + 4 + (2 + 1) + 4 + 4;
  nan_payload[first_value + 0] = '\x00';
  nan_payload[first_value + 1] = '\x00';
  nan_payload[first_value + 2] = '\xc0';
  nan_payload[first_value + 3] = '\x7f';

  const bool classes_ok = code_of_read(magic) == "format" &&
                          code_of_read(version) == "version" &&
                          code_of_read(truncated) == "corrupt" &&
                          code_of_read(nan_payload) == "validation";

  const bool pass = failures == 0 && classes_ok;
  report("9", pass,
         std::to_string(failures) + "/1000 round-trip failures; error classes " +
             (classes_ok ? "as declared" : "WRONG"));
  CHECK(failures == 0);
  CHECK(classes_ok);
}
