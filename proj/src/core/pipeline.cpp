#include "core/pipeline.hpp"

#include "core/csv.hpp"
#include "core/errors.hpp"
#include "core/hr.hpp"
#include "core/parallel.hpp"
#include "core/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace driftlens::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fold_tag(int fold) { return "f" + std::to_string(fold); }

fs::path dataset_dir(const fs::path& out, const std::string& domain) {
  return out / "datasets" / domain;
}

fs::path model_path(const fs::path& out, const std::string& domain, int fold) {
  return out / "models" / (domain + "_" + fold_tag(fold) + ".model.json");
}

fs::path table_path(const fs::path& out, metrics::MetricKind kind) {
  return out / "tables" / (std::string(metrics::metric_name(kind)) + ".csv");
}

fs::path fold_mean_path(const fs::path& out, metrics::MetricKind kind) {
  return out / "tables" / (std::string(metrics::metric_name(kind)) + "_foldmean.csv");
}

void require_file(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    raise(ErrorCode::coverage, "missing '" + path.string() + "'; run 'driftlens " +
                                   producer + "' first");
  }
}

void write_table_files(const fs::path& out, const metrics::MetricTable& table) {
  std::ostringstream long_csv;
  table.write_long_csv(long_csv);
  detail::atomic_write(table_path(out, table.kind()), long_csv.str());
  std::ostringstream mean_csv;
  table.write_fold_mean_csv(mean_csv);
  detail::atomic_write(fold_mean_path(out, table.kind()), mean_csv.str());
}

// Activation sets for one (model, dataset, fold-test-subjects) triple.
ActivationSet collect_test_activations(const synth::ToyModel& model,
                                       const synth::SyntheticDataset& dataset,
                                       const std::vector<std::string>& subjects) {
  return synth::forward_collect(model, dataset, subjects).activations;
}

ActivationSet truncate_samples(const ActivationSet& set, Eigen::Index n) {
  ActivationSet out;
  out.model_id = set.model_id;
  out.dataset_id = set.dataset_id;
  for (const auto& layer : set.layers) {
    out.layers.push_back({layer.name, layer.data.topRows(n)});
  }
  return out;
}

struct LoadedDomain {
  synth::SyntheticDataset dataset;
  synth::FoldPlan folds;
};

std::map<std::string, LoadedDomain> load_domains(const RunConfig& config,
                                                 const fs::path& out) {
  std::map<std::string, LoadedDomain> loaded;
  for (const auto& spec : config.domains) {
    require_file(dataset_dir(out, spec.domain_id) / "ground_truth.csv", "synth");
    LoadedDomain entry{detail::load_dataset(out, spec.domain_id), {}};
    entry.folds = synth::make_fold_plan(entry.dataset.subject_ids(), config.fold_count,
                                        config.fold_seed(spec.domain_id));
    loaded.emplace(spec.domain_id, std::move(entry));
  }
  return loaded;
}

double evaluate_mae(const synth::ToyModel& model,
                    const synth::SyntheticDataset& dataset,
                    const std::vector<std::string>& subjects,
                    const hr::StftParams& stft) {
  const auto forward = synth::forward_collect(model, dataset, subjects);
  double acc = 0.0;
  for (const auto& subject_id : subjects) {
    const auto& record = dataset.subject(subject_id);
    hr::BvpSeries predicted;
    predicted.subject_id = subject_id;
    predicted.fps = dataset.fps;
    predicted.samples = forward.predicted_bvp.at(subject_id);
    const hr::HrSeries estimated = hr::stft_hr(predicted, stft);
    const hr::HrSeries truth = hr::window_mean_hr(record.hr_bpm, dataset.fps, stft);
    acc += hr::mae(estimated, truth);
  }
  return acc / static_cast<double>(subjects.size());
}

std::string format_bool(bool v) { return v ? "true" : "false"; }

std::string mean_ci_cell(const selection::ReportCell& cell) {
  return hr::format_mean_ci(cell.mean, cell.ci);
}

void write_selection_csv(const fs::path& path, const selection::SelectionReport& report) {
  std::ostringstream out;
  out << "test_domain,worst,average,best,ds_diff,pct_over_worst,pct_over_average,pct_over_best\n";
  auto row_line = [&out](const selection::ReportRow& row) {
    out << row.test_domain << ',' << mean_ci_cell(row.worst) << ','
        << mean_ci_cell(row.average) << ',' << mean_ci_cell(row.best) << ','
        << mean_ci_cell(row.chosen) << ',' << mean_ci_cell(row.pct_over_worst) << ','
        << mean_ci_cell(row.pct_over_average) << ',' << mean_ci_cell(row.pct_over_best)
        << '\n';
  };
  for (const auto& row : report.rows) row_line(row);
  row_line(report.average_row);
  detail::atomic_write(path, out.str());
}

void write_residuals_csv(const fs::path& path, const selection::ResidualMedians& medians) {
  std::ostringstream out;
  out << "vs_worst,vs_average,vs_best\n";
  out << csv::format_value(medians.vs_worst) << ',' << csv::format_value(medians.vs_average)
      << ',' << csv::format_value(medians.vs_best) << '\n';
  detail::atomic_write(path, out.str());
}

void write_correlation_csv(const fs::path& path,
                           const std::vector<detail::CorrelationSet>& sets,
                           const std::vector<std::string>& domains) {
  std::ostringstream out;
  out << "train_domain";
  for (const auto& set : sets) {
    const std::string name = metrics::metric_name(set.kind);
    out << ',' << name << "_r," << name << "_significant";
  }
  out << '\n';
  for (std::size_t d = 0; d < domains.size(); ++d) {
    out << domains[d];
    for (const auto& set : sets) {
      const auto& row = set.report.rows[d];
      out << ',' << csv::format_value(row.r) << ',' << format_bool(row.significant);
    }
    out << '\n';
  }
  out << "Composite";
  for (const auto& set : sets) {
    out << ',' << csv::format_value(set.report.composite) << ',';
  }
  out << '\n';
  out << "bonferroni_threshold";
  for (const auto& set : sets) {
    out << ',' << csv::format_value(set.report.threshold) << ',';
  }
  out << '\n';
  detail::atomic_write(path, out.str());
}

}  // namespace

OutputLock::OutputLock(const fs::path& out_dir) {
  fs::create_directories(out_dir);
  lock_path_ = out_dir / ".driftlens.lock";
  std::FILE* f = std::fopen(lock_path_.c_str(), "wx");
  if (f == nullptr) {
    raise(ErrorCode::io, "output directory '" + out_dir.string() +
                             "' is locked by another run (delete " +
                             lock_path_.string() + " if stale)");
  }
  std::fprintf(f, "driftlens\n");
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(lock_path_, ec);
}

namespace detail {

void atomic_write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::io, "cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out) raise(ErrorCode::io, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

synth::SyntheticDataset load_dataset(const fs::path& out_dir,
                                     const std::string& domain_id) {
  const fs::path dir = dataset_dir(out_dir, domain_id);
  require_file(dir / "ground_truth.csv", "synth");

  synth::SyntheticDataset dataset;
  dataset.domain_id = domain_id;

  std::map<std::string, synth::SubjectRecord> records;
  const csv::Table gt = csv::read_file((dir / "ground_truth.csv").string());
  const std::size_t col_subject = gt.column("subject_id");
  const std::size_t col_bvp = gt.column("bvp");
  const std::size_t col_hr = gt.column("hr_bpm");
  for (const auto& row : gt.rows) {
    auto& record = records[row[col_subject]];
    record.subject_id = row[col_subject];
    record.bvp.push_back(csv::to_double(row[col_bvp]));
    record.hr_bpm.push_back(csv::to_double(row[col_hr]));
  }

  // Feature dumps carry no timing; the sampling rate rides alongside.
  std::ifstream fps_in(dir / "fps.txt");
  if (!fps_in || !(fps_in >> dataset.fps)) {
    raise(ErrorCode::corrupt, "dataset '" + domain_id + "': missing fps.txt");
  }

  for (auto& [subject_id, record] : records) {
    const fs::path dump = dir / (subject_id + ".actv");
    require_file(dump, "synth");
    ActivationSet set = read_activation_dump(dump.string());
    if (set.layers.size() != 1 ||
        set.layers.front().data.rows() != static_cast<Eigen::Index>(record.bvp.size())) {
      raise(ErrorCode::corrupt, "dataset '" + domain_id + "': dump and ground truth " +
                                    "disagree for subject '" + subject_id + "'");
    }
    record.features = std::move(set.layers.front().data);
    dataset.subjects.push_back(std::move(record));
  }
  std::sort(dataset.subjects.begin(), dataset.subjects.end(),
            [](const auto& a, const auto& b) { return a.subject_id < b.subject_id; });
  return dataset;
}

synth::ToyModel load_model(const fs::path& out_dir, const std::string& domain_id,
                           int fold) {
  const fs::path path = model_path(out_dir, domain_id, fold);
  require_file(path, "train");
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(ErrorCode::corrupt, "model file '" + path.string() + "': " + e.what());
  }
  synth::ToyModel model = synth::build_toy_model(
      j.at("arch").get<std::vector<int>>(), j.at("feature_dim").get<int>(),
      j.at("seed").get<std::uint64_t>(), j.at("model_id").get<std::string>(),
      j.at("context_frames").get<int>());
  const auto readout = j.at("readout").get<std::vector<double>>();
  model.readout = Eigen::Map<const Eigen::VectorXd>(
      readout.data(), static_cast<Eigen::Index>(readout.size()));
  model.train_domain_id = j.at("train_domain_id").get<std::string>();
  return model;
}

metrics::MetricTable load_table(const fs::path& out_dir, metrics::MetricKind kind) {
  const fs::path path = table_path(out_dir, kind);
  const std::string producer =
      kind == metrics::MetricKind::mae ? "eval" : "metrics";
  require_file(path, producer);
  std::ifstream in(path);
  return metrics::MetricTable::read_long_csv(in, kind);
}

std::vector<CorrelationSet> correlate_tables(
    const std::vector<metrics::MetricTable>& metric_tables,
    const metrics::MetricTable& mae_table, bool include_self_pairs) {
  if (metric_tables.empty()) {
    raise(ErrorCode::invalid_argument, "correlate: no metric tables");
  }
  const auto& domains = mae_table.domains();
  const Matrix mae_means = mae_table.fold_mean();

  std::vector<CorrelationSet> sets;
  for (const auto& table : metric_tables) {
    if (table.domains() != domains || table.fold_count() != mae_table.fold_count()) {
      raise(ErrorCode::coverage,
            std::string("correlate: grid mismatch between mae and ") +
                metrics::metric_name(table.kind()));
    }
    const Matrix metric_means = table.fold_mean();
    std::vector<stats::CorrelationRow> rows;
    for (std::size_t x = 0; x < domains.size(); ++x) {
      std::vector<double> xs, ys;
      for (std::size_t y = 0; y < domains.size(); ++y) {
        if (!include_self_pairs && x == y) continue;
        xs.push_back(metric_means(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
        ys.push_back(mae_means(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
      }
      const auto result = stats::pearson(xs, ys);
      rows.push_back({domains[x], result.r, result.p, result.n, false});
    }
    sets.push_back({table.kind(), stats::make_correlation_report(std::move(rows))});
  }
  return sets;
}

SelectionOutcome run_selection(const metrics::MetricTable& dsdiff,
                               const metrics::MetricTable& mae,
                               bool include_self_candidates, bool per_fold) {
  if (dsdiff.domains() != mae.domains() || dsdiff.fold_count() != mae.fold_count()) {
    raise(ErrorCode::coverage, "select: ds_diff and mae grids do not match");
  }
  const auto& domains = dsdiff.domains();
  const Matrix dsdiff_means = dsdiff.fold_mean();
  SelectionOutcome outcome;
  for (std::size_t y = 0; y < domains.size(); ++y) {
    for (int f = 0; f < dsdiff.fold_count(); ++f) {
      std::vector<std::size_t> candidates;
      std::vector<double> metric_values, mae_values;
      for (std::size_t x = 0; x < domains.size(); ++x) {
        if (!include_self_candidates && x == y) continue;
        candidates.push_back(x);
        metric_values.push_back(per_fold
                                    ? dsdiff.at(x, y, f)
                                    : dsdiff_means(static_cast<Eigen::Index>(x),
                                                   static_cast<Eigen::Index>(y)));
        mae_values.push_back(mae.at(x, y, f));
      }
      if (candidates.empty()) {
        raise(ErrorCode::invalid_argument,
              "select: no candidate models for domain '" + domains[y] + "'");
      }
      const std::size_t chosen = selection::select_model_dsdiff(metric_values);
      selection::SelectionResult result;
      result.test_domain = domains[y];
      result.fold = f;
      result.chosen_train_domain = domains[candidates[chosen]];
      result.chosen_mae = mae_values[chosen];
      result.base = selection::baselines(mae_values);
      result.pct_over_worst =
          selection::percent_improvement(result.base.worst, result.chosen_mae);
      result.pct_over_average =
          selection::percent_improvement(result.base.average, result.chosen_mae);
      result.pct_over_best =
          selection::percent_improvement(result.base.best, result.chosen_mae);
      outcome.results.push_back(std::move(result));
    }
  }
  outcome.report =
      selection::selection_report(outcome.results, domains, dsdiff.fold_count());
  return outcome;
}

std::vector<FixtureSelectionRow> load_selection_fixture(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t col_domain = table.column("test_domain");
  const std::size_t col_worst = table.column("worst");
  const std::size_t col_average = table.column("average");
  const std::size_t col_best = table.column("best");
  const std::size_t col_chosen = table.column("ds_diff");
  const std::size_t col_pw = table.column("pct_over_worst");
  const std::size_t col_pa = table.column("pct_over_average");
  const std::size_t col_pb = table.column("pct_over_best");
  std::vector<FixtureSelectionRow> rows;
  for (const auto& row : table.rows) {
    FixtureSelectionRow out;
    out.test_domain = row[col_domain];
    out.worst = csv::to_double(row[col_worst]);
    out.average = csv::to_double(row[col_average]);
    out.best = csv::to_double(row[col_best]);
    out.chosen = csv::to_double(row[col_chosen]);
    out.pct_worst = csv::to_double(row[col_pw]);
    out.pct_average = csv::to_double(row[col_pa]);
    out.pct_best = csv::to_double(row[col_pb]);
    rows.push_back(std::move(out));
  }
  if (rows.empty()) raise(ErrorCode::format, "selection fixture: no rows");
  return rows;
}

std::vector<FixtureCorrelationColumn> load_correlation_fixture(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t col_domain = table.column("train_domain");
  std::vector<FixtureCorrelationColumn> columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == col_domain) continue;
    FixtureCorrelationColumn column;
    column.kind = metrics::parse_metric(table.header[c]);
    for (const auto& row : table.rows) column.rs.push_back(csv::to_double(row[c]));
    columns.push_back(std::move(column));
  }
  if (columns.empty() || columns.front().rs.empty()) {
    raise(ErrorCode::format, "correlation fixture: no metric columns");
  }
  return columns;
}

}  // namespace detail

void cmd_synth(const RunConfig& config, const std::string& out_dir) {
  const fs::path out(out_dir);
  OutputLock lock(out);

  std::vector<hr::SummaryStats> summaries(config.domains.size());
  std::vector<synth::SyntheticDataset> datasets(config.domains.size());
  parallel_for(config.domains.size(), [&](std::size_t i) {
    datasets[i] = synth::generate_domain(config.domains[i]);
    summaries[i] = synth::summarize(datasets[i]);
  });

  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const auto& dataset = datasets[i];
    const fs::path dir = dataset_dir(out, dataset.domain_id);
    fs::create_directories(dir);

    std::ostringstream gt;
    gt << "subject_id,frame,bvp,hr_bpm\n";
    for (const auto& record : dataset.subjects) {
      ActivationSet feature_set;
      feature_set.model_id = "raw";
      feature_set.dataset_id = dataset.domain_id;
      feature_set.layers.push_back({"features", record.features});
      std::ostringstream dump;
      write_activation_dump(feature_set, dump);
      detail::atomic_write(dir / (record.subject_id + ".actv"), dump.str());

      for (std::size_t t = 0; t < record.bvp.size(); ++t) {
        gt << record.subject_id << ',' << t << ',' << csv::format_value(record.bvp[t])
           << ',' << csv::format_value(record.hr_bpm[t]) << '\n';
      }
    }
    detail::atomic_write(dir / "ground_truth.csv", gt.str());
    detail::atomic_write(dir / "fps.txt", csv::format_value(dataset.fps) + "\n");
  }

  std::ostringstream stats_csv;
  stats_csv << "dataset,time_s,avg_hr_bpm,avg_hr_stddev_bpm\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    stats_csv << config.domains[i].domain_id << ','
              << hr::format_mean_ci(s.time_s.mean, s.time_s.ci95_halfwidth) << ','
              << hr::format_mean_ci(s.avg_hr_bpm.mean, s.avg_hr_bpm.ci95_halfwidth) << ','
              << hr::format_mean_ci(s.hr_stddev_bpm.mean, s.hr_stddev_bpm.ci95_halfwidth)
              << '\n';
  }
  detail::atomic_write(out / "datasets" / "summary_stats.csv", stats_csv.str());
}

void cmd_train(const RunConfig& config, const std::string& out_dir) {
  const fs::path out(out_dir);
  OutputLock lock(out);
  const auto loaded = load_domains(config, out);

  struct Job {
    const LoadedDomain* domain;
    const synth::DomainSpec* spec;
    int fold;
  };
  std::vector<Job> jobs;
  for (const auto& spec : config.domains) {
    for (int f = 0; f < config.fold_count; ++f) {
      jobs.push_back({&loaded.at(spec.domain_id), &spec, f});
    }
  }

  std::vector<std::string> payloads(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::string model_id = job.spec->domain_id + "_" + fold_tag(job.fold);
    synth::ToyModel model = synth::build_toy_model(
        config.arch, job.spec->feature_dim,
        config.model_seed(job.spec->domain_id, job.fold), model_id,
        config.context_frames);
    model = synth::fit_readout(model, job.domain->dataset,
                               job.domain->folds.train_subjects[static_cast<std::size_t>(job.fold)],
                               config.ridge_lambda);
    json j;
    j["model_id"] = model.model_id;
    j["arch"] = model.layer_widths;
    j["feature_dim"] = model.feature_dim;
    j["context_frames"] = model.context_frames;
    j["seed"] = model.seed;
    j["train_domain_id"] = model.train_domain_id;
    j["ridge_lambda"] = config.ridge_lambda;
    j["readout"] = std::vector<double>(model.readout.data(),
                                       model.readout.data() + model.readout.size());
    payloads[i] = j.dump(2) + "\n";
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    detail::atomic_write(model_path(out, jobs[i].spec->domain_id, jobs[i].fold),
                         payloads[i]);
  }
}

void cmd_eval(const RunConfig& config, const std::string& out_dir) {
  const fs::path out(out_dir);
  OutputLock lock(out);
  const auto loaded = load_domains(config, out);
  const auto domains = config.domain_ids();

  std::vector<synth::ToyModel> models;
  for (const auto& x : domains) {
    for (int f = 0; f < config.fold_count; ++f) {
      models.push_back(detail::load_model(out, x, f));
    }
  }

  metrics::MetricTable table(metrics::MetricKind::mae, domains, config.fold_count);
  struct Cell {
    std::size_t x, y;
    int fold;
  };
  std::vector<Cell> cells;
  for (std::size_t x = 0; x < domains.size(); ++x) {
    for (std::size_t y = 0; y < domains.size(); ++y) {
      for (int f = 0; f < config.fold_count; ++f) cells.push_back({x, y, f});
    }
  }
  std::vector<double> values(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    const auto& model =
        models[cell.x * static_cast<std::size_t>(config.fold_count) +
               static_cast<std::size_t>(cell.fold)];
    const auto& target = loaded.at(domains[cell.y]);
    values[i] = evaluate_mae(
        model, target.dataset,
        target.folds.test_subjects[static_cast<std::size_t>(cell.fold)], config.stft);
  });
  for (std::size_t i = 0; i < cells.size(); ++i) {
    table.at(cells[i].x, cells[i].y, cells[i].fold) = values[i];
  }
  write_table_files(out, table);
}

void cmd_metrics(const RunConfig& config, const std::string& out_dir,
                 const std::vector<metrics::MetricKind>& kinds) {
  const fs::path out(out_dir);
  OutputLock lock(out);
  for (const auto kind : kinds) {
    if (kind == metrics::MetricKind::mae) {
      raise(ErrorCode::invalid_argument, "metrics: mae is produced by 'driftlens eval'");
    }
  }
  const bool want_dsdiff =
      std::find(kinds.begin(), kinds.end(), metrics::MetricKind::ds_diff) != kinds.end();
  const bool want_dssim =
      std::find(kinds.begin(), kinds.end(), metrics::MetricKind::ds_sim) != kinds.end();
  const bool want_modelsim =
      std::find(kinds.begin(), kinds.end(), metrics::MetricKind::model_sim) != kinds.end();
  if (!want_dsdiff && !want_dssim && !want_modelsim) {
    raise(ErrorCode::invalid_argument, "metrics: no metric kinds requested");
  }

  const auto loaded = load_domains(config, out);
  const auto domains = config.domain_ids();
  const cka::CkaOptions cka_options{config.estimator, config.batch_size};

  std::vector<synth::ToyModel> models;
  for (const auto& x : domains) {
    for (int f = 0; f < config.fold_count; ++f) {
      models.push_back(detail::load_model(out, x, f));
    }
  }
  auto model_at = [&](std::size_t x, int f) -> const synth::ToyModel& {
    return models[x * static_cast<std::size_t>(config.fold_count) +
                  static_cast<std::size_t>(f)];
  };

  // Per (train domain, fold): the model's activations over its own domain's
  // fold-test subjects, reused across every test domain.
  const std::size_t home_count = domains.size() * static_cast<std::size_t>(config.fold_count);
  std::vector<ActivationSet> home_acts(home_count);
  std::vector<cka::CkaMap> home_self_maps(home_count);
  parallel_for(home_count, [&](std::size_t i) {
    const std::size_t x = i / static_cast<std::size_t>(config.fold_count);
    const int f = static_cast<int>(i % static_cast<std::size_t>(config.fold_count));
    const auto& home = loaded.at(domains[x]);
    home_acts[i] = collect_test_activations(
        model_at(x, f), home.dataset,
        home.folds.test_subjects[static_cast<std::size_t>(f)]);
    if (want_dsdiff) {
      home_self_maps[i] = cka::cka_map(home_acts[i], home_acts[i], cka_options);
    }
  });

  metrics::MetricTable dsdiff_table(metrics::MetricKind::ds_diff, domains, config.fold_count);
  metrics::MetricTable dssim_table(metrics::MetricKind::ds_sim, domains, config.fold_count);
  metrics::MetricTable modelsim_table(metrics::MetricKind::model_sim, domains,
                                      config.fold_count);

  struct Cell {
    std::size_t x, y;
    int fold;
  };
  std::vector<Cell> cells;
  for (std::size_t x = 0; x < domains.size(); ++x) {
    for (std::size_t y = 0; y < domains.size(); ++y) {
      for (int f = 0; f < config.fold_count; ++f) cells.push_back({x, y, f});
    }
  }
  struct CellValues {
    double dsdiff = 0.0, dssim = 0.0, modelsim = 0.0;
  };
  std::vector<CellValues> values(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const auto& [x, y, f] = cells[i];
    const std::size_t home_index =
        x * static_cast<std::size_t>(config.fold_count) + static_cast<std::size_t>(f);
    const auto& target = loaded.at(domains[y]);
    const auto& test_subjects = target.folds.test_subjects[static_cast<std::size_t>(f)];
    const ActivationSet away =
        collect_test_activations(model_at(x, f), target.dataset, test_subjects);

    if (want_dsdiff) {
      const cka::CkaMap away_self = cka::cka_map(away, away, cka_options);
      values[i].dsdiff = metrics::ds_diff(home_self_maps[home_index], away_self);
    }
    if (want_dssim) {
      const ActivationSet& home = home_acts[home_index];
      const Eigen::Index n = std::min(home.sample_count(), away.sample_count());
      const cka::CkaMap cross =
          cka::cka_map(truncate_samples(home, n), truncate_samples(away, n), cka_options);
      values[i].dssim = metrics::ds_sim(cross);
    }
    if (want_modelsim) {
      const ActivationSet other =
          collect_test_activations(model_at(y, f), target.dataset, test_subjects);
      const cka::CkaMap pair = cka::cka_map(away, other, cka_options);
      values[i].modelsim = metrics::model_sim(pair);
    }
  });

  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& [x, y, f] = cells[i];
    if (want_dsdiff) dsdiff_table.at(x, y, f) = values[i].dsdiff;
    if (want_dssim) dssim_table.at(x, y, f) = values[i].dssim;
    if (want_modelsim) modelsim_table.at(x, y, f) = values[i].modelsim;
  }
  if (want_dsdiff) write_table_files(out, dsdiff_table);
  if (want_dssim) write_table_files(out, dssim_table);
  if (want_modelsim) write_table_files(out, modelsim_table);
}

void cmd_correlate(const RunConfig& config, const std::string& out_dir) {
  const fs::path out(out_dir);
  OutputLock lock(out);
  const metrics::MetricTable mae_table = detail::load_table(out, metrics::MetricKind::mae);
  std::vector<metrics::MetricTable> metric_tables;
  for (const auto kind : {metrics::MetricKind::ds_diff, metrics::MetricKind::ds_sim,
                          metrics::MetricKind::model_sim}) {
    if (fs::exists(table_path(out, kind))) {
      metric_tables.push_back(detail::load_table(out, kind));
    }
  }
  if (metric_tables.empty()) {
    raise(ErrorCode::coverage,
          "correlate: no metric tables found; run 'driftlens metrics' first");
  }
  const auto sets =
      detail::correlate_tables(metric_tables, mae_table, config.include_self_pairs);
  write_correlation_csv(out / "tables" / "correlation.csv", sets, mae_table.domains());
}

void cmd_select(const RunConfig& config, const std::string& out_dir) {
  const fs::path out(out_dir);
  OutputLock lock(out);
  const auto dsdiff = detail::load_table(out, metrics::MetricKind::ds_diff);
  const auto mae_table = detail::load_table(out, metrics::MetricKind::mae);
  const auto outcome =
      detail::run_selection(dsdiff, mae_table, config.include_self_candidates,
                            config.selection_per_fold);
  write_selection_csv(out / "tables" / "selection.csv", outcome.report);
  write_residuals_csv(out / "tables" / "selection_residuals.csv", outcome.report.medians);
}

void cmd_report(const RunConfig& config, const std::string& out_dir, bool svg) {
  (void)config;
  const fs::path out(out_dir);
  OutputLock lock(out);
  bool any = false;
  for (const auto kind : {metrics::MetricKind::mae, metrics::MetricKind::ds_diff,
                          metrics::MetricKind::ds_sim, metrics::MetricKind::model_sim}) {
    if (!fs::exists(table_path(out, kind))) continue;
    any = true;
    const auto table = detail::load_table(out, kind);
    std::ostringstream mean_csv;
    table.write_fold_mean_csv(mean_csv);
    const std::string name = metrics::metric_name(kind);
    detail::atomic_write(out / "report" / ("heatmap_" + name + ".csv"), mean_csv.str());
    if (svg) {
      // Similarity metrics use the inverted ramp so hue tracks shift severity
      // in every panel.
      const bool inverted = kind == metrics::MetricKind::ds_sim ||
                            kind == metrics::MetricKind::model_sim;
      std::ostringstream svg_out;
      report::write_heatmap_svg(table.fold_mean(), table.domains(), table.domains(),
                                name, inverted, svg_out);
      detail::atomic_write(out / "report" / ("heatmap_" + name + ".svg"), svg_out.str());
    }
  }
  if (!any) {
    raise(ErrorCode::coverage,
          "report: no tables found; run 'driftlens eval' and 'driftlens metrics' first");
  }
}

void cmd_correlate_fixture(const std::string& fixture_csv, const std::string& out_dir) {
  const fs::path out(out_dir);
  OutputLock lock(out);
  const auto columns = detail::load_correlation_fixture(fixture_csv);
  const std::size_t n = columns.front().rs.size();
  std::vector<detail::CorrelationSet> sets;
  for (const auto& column : columns) {
    std::vector<stats::CorrelationRow> rows;
    for (std::size_t i = 0; i < column.rs.size(); ++i) {
      const double r = column.rs[i];
      stats::CorrelationRow row;
      row.train_domain = "row" + std::to_string(i);
      row.r = r;
      row.n = n;
      const double dof = static_cast<double>(n - 2);
      const double denom = 1.0 - r * r;
      row.p = denom <= 0.0
                  ? 0.0
                  : stats::student_t_two_tailed_p(r * std::sqrt(dof / denom), dof);
      rows.push_back(std::move(row));
    }
    sets.push_back({column.kind, stats::make_correlation_report(std::move(rows))});
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(sets.front().report.rows[i].train_domain);
  write_correlation_csv(out / "tables" / "correlation_fixture.csv", sets, labels);
}

void cmd_select_fixture(const std::string& fixture_csv, const std::string& out_dir) {
  const fs::path out(out_dir);
  OutputLock lock(out);
  const auto rows = detail::load_selection_fixture(fixture_csv);

  // The published rows are already fold means; treat each as a single-fold
  // result so the report machinery aggregates across domains.
  std::vector<selection::SelectionResult> results;
  std::vector<std::string> domains;
  for (const auto& row : rows) {
    selection::SelectionResult result;
    result.test_domain = row.test_domain;
    result.fold = 0;
    result.chosen_mae = row.chosen;
    result.base = {row.worst, row.average, row.best};
    result.pct_over_worst = row.pct_worst;
    result.pct_over_average = row.pct_average;
    result.pct_over_best = row.pct_best;
    results.push_back(std::move(result));
    domains.push_back(row.test_domain);
  }
  const auto report = selection::selection_report(results, domains, 1);

  std::ostringstream csv_out;
  csv_out << "test_domain,worst,average,best,ds_diff,pct_over_worst,pct_over_average,"
             "pct_over_best,pct_recomputed_worst,pct_recomputed_average,pct_recomputed_best\n";
  double rw_sum = 0.0, ra_sum = 0.0, rb_sum = 0.0;
  for (const auto& row : rows) {
    const double rw = selection::percent_improvement(row.worst, row.chosen);
    const double ra = selection::percent_improvement(row.average, row.chosen);
    const double rb = selection::percent_improvement(row.best, row.chosen);
    rw_sum += rw;
    ra_sum += ra;
    rb_sum += rb;
    csv_out << row.test_domain << ',' << csv::format_value(row.worst) << ','
            << csv::format_value(row.average) << ',' << csv::format_value(row.best) << ','
            << csv::format_value(row.chosen) << ',' << csv::format_value(row.pct_worst)
            << ',' << csv::format_value(row.pct_average) << ','
            << csv::format_value(row.pct_best) << ',' << csv::format_value(rw) << ','
            << csv::format_value(ra) << ',' << csv::format_value(rb) << '\n';
  }
  const double count = static_cast<double>(rows.size());
  csv_out << "Average," << csv::format_value(report.average_row.worst.mean) << ','
          << csv::format_value(report.average_row.average.mean) << ','
          << csv::format_value(report.average_row.best.mean) << ','
          << csv::format_value(report.average_row.chosen.mean) << ','
          << csv::format_value(report.average_row.pct_over_worst.mean) << ','
          << csv::format_value(report.average_row.pct_over_average.mean) << ','
          << csv::format_value(report.average_row.pct_over_best.mean) << ','
          << csv::format_value(rw_sum / count) << ',' << csv::format_value(ra_sum / count)
          << ',' << csv::format_value(rb_sum / count) << '\n';
  detail::atomic_write(out / "tables" / "selection_fixture.csv", csv_out.str());
  write_residuals_csv(out / "tables" / "selection_fixture_residuals.csv", report.medians);
}

}  // namespace driftlens::pipeline
