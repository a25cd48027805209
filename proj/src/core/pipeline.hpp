#pragma once

#include "core/config.hpp"
#include "core/metrics.hpp"
#include "core/selection.hpp"
#include "core/stats.hpp"
#include "core/synth.hpp"
#include "core/toy_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace driftlens::pipeline {

// Batch commands with file-based handoffs. Every command is deterministic:
// identical config and inputs produce byte-identical outputs. Layout under
// the output directory:
//   datasets/<domain>/<subject>.actv     raw feature dumps
//   datasets/<domain>/ground_truth.csv   subject_id,frame,bvp,hr_bpm
//   datasets/summary_stats.csv
//   models/<domain>_f<fold>.model.json
//   tables/*.csv                         mae / metric / correlation / selection
//   report/*.csv, report/*.svg

void cmd_synth(const RunConfig& config, const std::string& out_dir);
void cmd_train(const RunConfig& config, const std::string& out_dir);
void cmd_eval(const RunConfig& config, const std::string& out_dir);
void cmd_metrics(const RunConfig& config, const std::string& out_dir,
                 const std::vector<metrics::MetricKind>& kinds = {
                     metrics::MetricKind::ds_diff, metrics::MetricKind::ds_sim,
                     metrics::MetricKind::model_sim});
void cmd_correlate(const RunConfig& config, const std::string& out_dir);
void cmd_select(const RunConfig& config, const std::string& out_dir);
void cmd_report(const RunConfig& config, const std::string& out_dir, bool svg);

// Fixture reproduction: statistical machinery applied to published benchmark
// tables, independent of the synthetic pipeline.
void cmd_correlate_fixture(const std::string& fixture_csv, const std::string& out_dir);
void cmd_select_fixture(const std::string& fixture_csv, const std::string& out_dir);

// Exclusive advisory lock on an output directory; concurrent commands on the
// same directory are unsupported.
class OutputLock {
public:
  explicit OutputLock(const std::filesystem::path& out_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

private:
  std::filesystem::path lock_path_;
};

// Pieces reused by tests and the acceptance suite.
namespace detail {

synth::SyntheticDataset load_dataset(const std::filesystem::path& out_dir,
                                     const std::string& domain_id);
synth::ToyModel load_model(const std::filesystem::path& out_dir,
                           const std::string& domain_id, int fold);
metrics::MetricTable load_table(const std::filesystem::path& out_dir,
                                metrics::MetricKind kind);

struct CorrelationSet {
  metrics::MetricKind kind;
  stats::CorrelationReport report;
};
std::vector<CorrelationSet> correlate_tables(
    const std::vector<metrics::MetricTable>& metric_tables,
    const metrics::MetricTable& mae_table, bool include_self_pairs);

struct SelectionOutcome {
  std::vector<selection::SelectionResult> results;
  selection::SelectionReport report;
};
// per_fold: choose a model independently in every fold from that fold's
// DS-diff values; otherwise choose once per domain from fold-mean DS-diff
// and reuse the choice across folds.
SelectionOutcome run_selection(const metrics::MetricTable& dsdiff,
                               const metrics::MetricTable& mae,
                               bool include_self_candidates, bool per_fold = true);

// Published-table fixture rows (fold-mean values).
struct FixtureSelectionRow {
  std::string test_domain;
  double worst = 0.0, average = 0.0, best = 0.0, chosen = 0.0;
  double pct_worst = 0.0, pct_average = 0.0, pct_best = 0.0;
};
std::vector<FixtureSelectionRow> load_selection_fixture(const std::string& path);

struct FixtureCorrelationColumn {
  metrics::MetricKind kind;
  std::vector<double> rs;  // one per train domain
};
std::vector<FixtureCorrelationColumn> load_correlation_fixture(const std::string& path);

void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace detail

}  // namespace driftlens::pipeline
