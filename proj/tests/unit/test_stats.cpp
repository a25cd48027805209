#include <doctest.h>

#include "core/errors.hpp"
#include "core/stats.hpp"

#include <cmath>
#include <vector>

using namespace driftlens;

TEST_CASE("pearson on textbook inputs") {
  SUBCASE("perfect linearity") {
    const std::vector<double> xs{1, 2, 3, 4, 5};
    std::vector<double> ys;
    for (const double x : xs) ys.push_back(2.0 * x + 1.0);
    const auto result = stats::pearson(xs, ys);
    CHECK(result.r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.p < 1e-9);
  }

  SUBCASE("perfect anticorrelation") {
    const std::vector<double> xs{1, 2, 3, 4};
    std::vector<double> ys;
    for (const double x : xs) ys.push_back(-x);
    CHECK(stats::pearson(xs, ys).r == doctest::Approx(-1.0).epsilon(1e-12));
  }

  SUBCASE("hand-computed r and t-distributed p") {
    const std::vector<double> xs{1, 2, 3, 4};
    const std::vector<double> ys{2, 1, 4, 3};
    const auto result = stats::pearson(xs, ys);
    CHECK(result.r == doctest::Approx(0.6).epsilon(1e-12));
    // t = 0.6 sqrt(2/0.64), two-tailed with 2 dof gives exactly 0.4.
    CHECK(result.p == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(result.n == 4);
  }

  SUBCASE("symmetry and affine invariance") {
    const std::vector<double> xs{0.3, 1.9, -0.7, 2.4, 0.1};
    const std::vector<double> ys{1.2, -0.4, 0.8, 2.2, -1.5};
    const double base = stats::pearson(xs, ys).r;
    CHECK(stats::pearson(ys, xs).r == base);
    std::vector<double> scaled;
    for (const double x : xs) scaled.push_back(4.5 * x + 17.0);
    CHECK(stats::pearson(scaled, ys).r == doctest::Approx(base).epsilon(1e-12));
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS((void)stats::pearson(std::vector<double>{1, 2},
                                         std::vector<double>{3, 4}),
                    Error);
    try {
      (void)stats::pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
      FAIL("expected undefined-correlation error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::math_domain);
    }
  }
}

TEST_CASE("fisher composite") {
  CHECK(stats::fisher_composite({0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(stats::fisher_composite({-0.3}) == doctest::Approx(-0.3).epsilon(1e-12));

  // Published benchmark columns reproduce their composite rows.
  const std::vector<double> ds_diff{0.769, 0.857, 0.805, 0.715, 0.825, 0.719, 0.639,
                                    0.816, 0.845, 0.758, 0.936, -0.037, 0.889, 0.811,
                                    0.886, 0.824, 0.774, 0.805, 0.761, 0.422, 0.798};
  CHECK(std::abs(stats::fisher_composite(ds_diff) - 0.781) < 0.002);
  const std::vector<double> model_sim{-0.933, -0.911, -0.881, -0.792, -0.919, -0.899,
                                      -0.912, -0.918, -0.920, -0.911, -0.904, -0.818,
                                      -0.913, -0.910, -0.923, -0.889, -0.881, -0.868,
                                      -0.868, -0.807, -0.933};
  CHECK(std::abs(stats::fisher_composite(model_sim) - (-0.896)) < 0.002);

  CHECK_THROWS_AS((void)stats::fisher_composite({0.2, 1.0}), Error);
  CHECK_THROWS_AS((void)stats::fisher_composite({}), Error);

  // Output is strictly inside (-1, 1) even for extreme inputs.
  const double extreme = stats::fisher_composite({0.999999, 0.999999, 0.999999});
  CHECK(extreme < 1.0);
  CHECK(extreme > 0.99);
}

TEST_CASE("bonferroni threshold") {
  const double t21 = stats::bonferroni_threshold(0.05, 21);
  CHECK(t21 == doctest::Approx(0.05 / 21.0).epsilon(1e-15));
  CHECK(t21 < 0.0024);
  CHECK(t21 > 0.0023);
  CHECK(stats::bonferroni_threshold(0.05, 1) == doctest::Approx(0.05));
  CHECK(stats::bonferroni_threshold(0.01, 4) == doctest::Approx(0.0025));
  CHECK_THROWS_AS((void)stats::bonferroni_threshold(0.05, 0), Error);
  CHECK_THROWS_AS((void)stats::bonferroni_threshold(1.5, 3), Error);
}

TEST_CASE("ci95 against t-table values") {
  const auto zero = stats::ci95({2.5, 2.5, 2.5});
  CHECK(zero.mean == doctest::Approx(2.5));
  CHECK(zero.halfwidth == doctest::Approx(0.0));

  // s = sqrt(2.5), k = 5, t(0.975, 4) = 2.776.
  const auto five = stats::ci95({1, 2, 3, 4, 5});
  CHECK(five.mean == doctest::Approx(3.0));
  CHECK(std::abs(five.halfwidth - 1.963) < 1e-3);

  // k = 2, t(0.975, 1) = 12.706.
  const auto two = stats::ci95({0.0, 2.0});
  CHECK(two.mean == doctest::Approx(1.0));
  CHECK(std::abs(two.halfwidth - 12.706) < 1e-2);

  CHECK_THROWS_AS((void)stats::ci95({1.0}), Error);
}

TEST_CASE("student t machinery") {
  CHECK(stats::student_t_cdf(1.0606601717798212, 2.0) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(stats::student_t_quantile(0.975, 4.0) == doctest::Approx(2.7764).epsilon(1e-4));
  CHECK(stats::student_t_quantile(0.975, 1.0) == doctest::Approx(12.7062).epsilon(1e-4));
  CHECK(stats::student_t_quantile(0.5, 7.0) == doctest::Approx(0.0));
  CHECK(stats::student_t_two_tailed_p(0.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("correlation report clamps unit correlations with a warning") {
  std::vector<stats::CorrelationRow> rows;
  for (int i = 0; i < 4; ++i) {
    rows.push_back({"d" + std::to_string(i), -1.0, 1e-12, 5, false});
  }
  const auto report = stats::make_correlation_report(rows);
  CHECK(report.clamped);
  CHECK(report.composite < -0.999);
  CHECK(report.composite > -1.0);
  CHECK(report.threshold == doctest::Approx(0.05 / 4.0));
  for (const auto& row : report.rows) CHECK(row.significant);
}
