#include "core/selection.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftlens::selection {

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Fold values -> mean with CI; a single fold degenerates to (value, 0).
ReportCell cell_from_folds(const std::vector<double>& fold_values) {
  if (fold_values.size() < 2) return {fold_values.at(0), 0.0};
  const auto ci = stats::ci95(fold_values);
  return {ci.mean, ci.halfwidth};
}

}  // namespace

Baselines baselines(const std::vector<double>& candidate_maes) {
  if (candidate_maes.empty()) {
    raise(ErrorCode::invalid_argument, "baselines: empty candidate list");
  }
  Baselines out;
  out.worst = *std::max_element(candidate_maes.begin(), candidate_maes.end());
  out.best = *std::min_element(candidate_maes.begin(), candidate_maes.end());
  out.average = std::accumulate(candidate_maes.begin(), candidate_maes.end(), 0.0) /
                static_cast<double>(candidate_maes.size());
  return out;
}

std::size_t select_model_dsdiff(const std::vector<double>& dsdiff_values) {
  if (dsdiff_values.empty()) {
    raise(ErrorCode::invalid_argument, "model selection: no candidates");
  }
  std::size_t chosen = 0;
  for (std::size_t i = 1; i < dsdiff_values.size(); ++i) {
    if (dsdiff_values[i] < dsdiff_values[chosen]) chosen = i;
  }
  return chosen;
}

double percent_improvement(double baseline_mae, double achieved_mae) {
  if (!(baseline_mae > 0.0)) {
    raise(ErrorCode::math_domain, "percent_improvement: baseline must be > 0");
  }
  return (baseline_mae - achieved_mae) / baseline_mae;
}

ResidualMedians residual_medians(const std::vector<DomainResiduals>& domains) {
  if (domains.empty()) {
    raise(ErrorCode::invalid_argument, "residual_medians: no domains");
  }
  std::vector<double> vs_worst, vs_average, vs_best;
  for (const auto& d : domains) {
    vs_worst.push_back(d.achieved - d.base.worst);
    vs_average.push_back(d.achieved - d.base.average);
    vs_best.push_back(d.achieved - d.base.best);
  }
  return {median(std::move(vs_worst)), median(std::move(vs_average)),
          median(std::move(vs_best))};
}

SelectionReport selection_report(const std::vector<SelectionResult>& results,
                                 const std::vector<std::string>& domains,
                                 int fold_count) {
  if (domains.empty() || fold_count < 1) {
    raise(ErrorCode::invalid_argument, "selection_report: needs domains and folds");
  }
  // results indexed by (domain, fold); verify coverage.
  std::vector<std::vector<const SelectionResult*>> grid(
      domains.size(), std::vector<const SelectionResult*>(static_cast<std::size_t>(fold_count), nullptr));
  auto domain_index = [&domains](const std::string& id) -> std::size_t {
    const auto it = std::find(domains.begin(), domains.end(), id);
    if (it == domains.end()) {
      raise(ErrorCode::lookup, "selection_report: unexpected domain '" + id + "'");
    }
    return static_cast<std::size_t>(it - domains.begin());
  };
  for (const auto& result : results) {
    if (result.fold < 0 || result.fold >= fold_count) {
      raise(ErrorCode::invalid_argument, "selection_report: fold index out of range");
    }
    grid[domain_index(result.test_domain)][static_cast<std::size_t>(result.fold)] = &result;
  }
  for (std::size_t d = 0; d < domains.size(); ++d) {
    for (int f = 0; f < fold_count; ++f) {
      if (grid[d][static_cast<std::size_t>(f)] == nullptr) {
        raise(ErrorCode::coverage, "selection_report: missing result for (" +
                                       domains[d] + ", fold " + std::to_string(f) + ")");
      }
    }
  }

  SelectionReport report;
  std::vector<DomainResiduals> residual_inputs;
  // Per-fold averages across domains feed the overall row's CI.
  std::vector<double> overall_worst(static_cast<std::size_t>(fold_count), 0.0);
  std::vector<double> overall_average(static_cast<std::size_t>(fold_count), 0.0);
  std::vector<double> overall_best(static_cast<std::size_t>(fold_count), 0.0);
  std::vector<double> overall_chosen(static_cast<std::size_t>(fold_count), 0.0);
  std::vector<double> overall_pw(static_cast<std::size_t>(fold_count), 0.0);
  std::vector<double> overall_pa(static_cast<std::size_t>(fold_count), 0.0);
  std::vector<double> overall_pb(static_cast<std::size_t>(fold_count), 0.0);

  for (std::size_t d = 0; d < domains.size(); ++d) {
    std::vector<double> worst, average, best, chosen, pw, pa, pb;
    for (int f = 0; f < fold_count; ++f) {
      const auto& r = *grid[d][static_cast<std::size_t>(f)];
      worst.push_back(r.base.worst);
      average.push_back(r.base.average);
      best.push_back(r.base.best);
      chosen.push_back(r.chosen_mae);
      pw.push_back(r.pct_over_worst);
      pa.push_back(r.pct_over_average);
      pb.push_back(r.pct_over_best);
      const auto fi = static_cast<std::size_t>(f);
      overall_worst[fi] += r.base.worst;
      overall_average[fi] += r.base.average;
      overall_best[fi] += r.base.best;
      overall_chosen[fi] += r.chosen_mae;
      overall_pw[fi] += r.pct_over_worst;
      overall_pa[fi] += r.pct_over_average;
      overall_pb[fi] += r.pct_over_best;
    }
    ReportRow row;
    row.test_domain = domains[d];
    row.worst = cell_from_folds(worst);
    row.average = cell_from_folds(average);
    row.best = cell_from_folds(best);
    row.chosen = cell_from_folds(chosen);
    row.pct_over_worst = cell_from_folds(pw);
    row.pct_over_average = cell_from_folds(pa);
    row.pct_over_best = cell_from_folds(pb);
    report.rows.push_back(row);

    DomainResiduals residual;
    residual.test_domain = domains[d];
    residual.achieved = row.chosen.mean;
    residual.base = {row.worst.mean, row.average.mean, row.best.mean};
    residual_inputs.push_back(residual);
  }

  const double domain_count = static_cast<double>(domains.size());
  for (auto* fold_sums : {&overall_worst, &overall_average, &overall_best,
                          &overall_chosen, &overall_pw, &overall_pa, &overall_pb}) {
    for (double& v : *fold_sums) v /= domain_count;
  }
  report.average_row.test_domain = "Average";
  report.average_row.worst = cell_from_folds(overall_worst);
  report.average_row.average = cell_from_folds(overall_average);
  report.average_row.best = cell_from_folds(overall_best);
  report.average_row.chosen = cell_from_folds(overall_chosen);
  report.average_row.pct_over_worst = cell_from_folds(overall_pw);
  report.average_row.pct_over_average = cell_from_folds(overall_pa);
  report.average_row.pct_over_best = cell_from_folds(overall_pb);
  report.medians = residual_medians(residual_inputs);
  return report;
}

}  // namespace driftlens::selection
