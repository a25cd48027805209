#include "core/stats.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace driftlens::stats {

namespace {

// Continued fraction for the regularized incomplete beta function
// (modified Lentz method).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double t, double dof) {
  if (dof <= 0.0) raise(ErrorCode::math_domain, "student_t_cdf: dof must be > 0");
  const double x = dof / (dof + t * t);
  const double half_tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_two_tailed_p(double t, double dof) {
  if (dof <= 0.0) raise(ErrorCode::math_domain, "student_t_two_tailed_p: dof must be > 0");
  const double x = dof / (dof + t * t);
  return std::min(1.0, incomplete_beta(0.5 * dof, 0.5, x));
}

double student_t_quantile(double probability, double dof) {
  if (dof <= 0.0 || probability <= 0.0 || probability >= 1.0) {
    raise(ErrorCode::math_domain, "student_t_quantile: need dof > 0 and p in (0,1)");
  }
  if (probability == 0.5) return 0.0;
  double lo = -1.0;
  double hi = 1.0;
  while (student_t_cdf(lo, dof) > probability) lo *= 2.0;
  while (student_t_cdf(hi, dof) < probability) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < probability) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

PearsonResult pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    raise(ErrorCode::size_mismatch, "pearson: input lengths differ");
  }
  const std::size_t n = xs.size();
  if (n < 3) {
    raise(ErrorCode::invalid_argument, "pearson: needs n >= 3 points");
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    raise(ErrorCode::math_domain, "pearson: correlation undefined for constant input");
  }
  PearsonResult out;
  out.n = n;
  out.r = sxy / std::sqrt(sxx * syy);
  out.r = std::clamp(out.r, -1.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  const double denom = 1.0 - out.r * out.r;
  if (denom <= 0.0) {
    out.p = 0.0;
  } else {
    const double t = out.r * std::sqrt(dof / denom);
    out.p = student_t_two_tailed_p(t, dof);
  }
  return out;
}

double fisher_composite(const std::vector<double>& rs) {
  if (rs.empty()) {
    raise(ErrorCode::invalid_argument, "fisher_composite: empty input");
  }
  double acc = 0.0;
  for (const double r : rs) {
    if (!(std::abs(r) < 1.0)) {
      raise(ErrorCode::math_domain,
            "fisher_composite: |r| >= 1 is outside the transform domain");
    }
    acc += std::atanh(r);
  }
  return std::tanh(acc / static_cast<double>(rs.size()));
}

double bonferroni_threshold(double alpha, std::size_t m) {
  if (alpha <= 0.0 || alpha >= 1.0) {
    raise(ErrorCode::invalid_argument, "bonferroni_threshold: alpha must be in (0,1)");
  }
  if (m == 0) {
    raise(ErrorCode::math_domain, "bonferroni_threshold: test count must be >= 1");
  }
  return alpha / static_cast<double>(m);
}

MeanHalfwidth ci95(const std::vector<double>& values) {
  const std::size_t k = values.size();
  if (k < 2) {
    raise(ErrorCode::math_domain, "ci95: needs at least 2 values");
  }
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(k);
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double stddev = std::sqrt(ss / static_cast<double>(k - 1));
  const double t = student_t_quantile(0.975, static_cast<double>(k - 1));
  return {mean, t * stddev / std::sqrt(static_cast<double>(k))};
}

CorrelationReport make_correlation_report(std::vector<CorrelationRow> rows,
                                          double alpha) {
  if (rows.empty()) {
    raise(ErrorCode::invalid_argument, "correlation report: no rows");
  }
  CorrelationReport report;
  report.alpha = alpha;
  report.threshold = bonferroni_threshold(alpha, rows.size());
  std::vector<double> rs;
  rs.reserve(rows.size());
  for (auto& row : rows) {
    row.significant = row.p < report.threshold;
    double r = row.r;
    if (!(std::abs(r) < 1.0)) {
      report.clamped = true;
      r = std::copysign(kFisherClamp, r);
    }
    rs.push_back(r);
  }
  report.composite = fisher_composite(rs);
  report.rows = std::move(rows);
  return report;
}

}  // namespace driftlens::stats
