#pragma once

#include <span>
#include <string>
#include <vector>

namespace driftlens::stats {

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;  // two-tailed, from t with n-2 degrees of freedom
  std::size_t n = 0;
};

// Requires equal lengths, n >= 3 and non-constant inputs.
PearsonResult pearson(std::span<const double> xs, std::span<const double> ys);

// tanh(mean(atanh(r_i))). Requires every |r| < 1.
double fisher_composite(const std::vector<double>& rs);

// alpha / m.
double bonferroni_threshold(double alpha, std::size_t m);

struct MeanHalfwidth {
  double mean = 0.0;
  double halfwidth = 0.0;
};

// mean +- t(0.975, k-1) * s / sqrt(k) over k >= 2 fold values.
MeanHalfwidth ci95(const std::vector<double>& values);

// Student-t distribution helpers (two-sided machinery for the above).
double student_t_cdf(double t, double dof);
double student_t_two_tailed_p(double t, double dof);
double student_t_quantile(double probability, double dof);

struct CorrelationRow {
  std::string train_domain;
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  bool significant = false;
};

struct CorrelationReport {
  std::vector<CorrelationRow> rows;
  double composite = 0.0;
  double alpha = 0.05;
  double threshold = 0.0;  // Bonferroni-corrected per-test threshold
  bool clamped = false;    // some |r| >= 1 was clamped before the Fisher mean
};

// Builds the composite over per-row r values; rows with |r| >= 1 are clamped
// to +-(1 - 1e-6) and flagged rather than aborting the pipeline.
CorrelationReport make_correlation_report(std::vector<CorrelationRow> rows,
                                          double alpha = 0.05);

inline constexpr double kFisherClamp = 1.0 - 1e-6;

}  // namespace driftlens::stats
