#pragma once

#include "core/stats.hpp"

#include <string>
#include <vector>

namespace driftlens::selection {

struct Baselines {
  double worst = 0.0;    // max over candidates
  double average = 0.0;  // mean
  double best = 0.0;     // min
};

// Requires >= 1 value.
Baselines baselines(const std::vector<double>& candidate_maes);

// Argmin of the metric; ties go to the lowest index. Requires >= 1 candidate.
std::size_t select_model_dsdiff(const std::vector<double>& dsdiff_values);

// (baseline - achieved) / baseline; negative means degradation.
// Requires baseline > 0.
double percent_improvement(double baseline_mae, double achieved_mae);

// One model choice for one (test domain, fold) cell.
struct SelectionResult {
  std::string test_domain;
  int fold = 0;
  std::string chosen_train_domain;
  double chosen_mae = 0.0;
  Baselines base;
  double pct_over_worst = 0.0;
  double pct_over_average = 0.0;
  double pct_over_best = 0.0;
};

struct ResidualMedians {
  double vs_worst = 0.0;
  double vs_average = 0.0;
  double vs_best = 0.0;
};

// Medians across domains of (achieved - baseline), computed on fold-mean
// values per domain.
struct DomainResiduals {
  std::string test_domain;
  double achieved = 0.0;
  Baselines base;
};
ResidualMedians residual_medians(const std::vector<DomainResiduals>& domains);

// Per-domain rows and overall row, each column a fold mean with a 95% CI.
struct ReportCell {
  double mean = 0.0;
  double ci = 0.0;
};

struct ReportRow {
  std::string test_domain;
  ReportCell worst, average, best, chosen;
  ReportCell pct_over_worst, pct_over_average, pct_over_best;
};

struct SelectionReport {
  std::vector<ReportRow> rows;      // one per test domain
  ReportRow average_row;            // aggregated across domains, CI across folds
  ResidualMedians medians;          // from fold-mean values per domain
};

// Requires a complete (domain x fold) grid of results.
SelectionReport selection_report(const std::vector<SelectionResult>& results,
                                 const std::vector<std::string>& domains,
                                 int fold_count);

}  // namespace driftlens::selection
