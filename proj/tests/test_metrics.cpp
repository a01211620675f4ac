#include <doctest.h>

#include <cmath>
#include <random>

#include "edmlp/metrics.hpp"

using namespace edmlp;

namespace {

// cos(45deg - theta) expanded: (ppv + npv) / (sqrt(2) * |(ppv, npv)|).
double oracle_d(double ppv, double npv) {
  const double r = std::hypot(ppv, npv);
  const double d1 = r / std::sqrt(2.0);
  const double d2 = (ppv + npv) / (std::sqrt(2.0) * r);
  return (std::abs(d1) + std::abs(d2)) / 2.0;
}

}  // namespace

TEST_CASE("rates from a confusion matrix") {
  const ConfusionMatrix cm{13, 14, 1, 3};
  const auto r = rates(cm);
  CHECK(r.sensitivity == doctest::Approx(0.8125).epsilon(1e-12));
  CHECK(r.specificity == doctest::Approx(14.0 / 15.0).epsilon(1e-12));
  CHECK(r.accuracy == doctest::Approx(27.0 / 31.0).epsilon(1e-12));
  CHECK(cm.total() == 31);
}

TEST_CASE("undefined rates are reported by name") {
  CHECK_THROWS_AS(rates(ConfusionMatrix{0, 5, 1, 0}), MetricError);
  CHECK_THROWS_AS(rates(ConfusionMatrix{5, 0, 0, 1}), MetricError);
  try {
    rates(ConfusionMatrix{});
    FAIL("expected MetricError");
  } catch (const MetricError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sensitivity") != std::string::npos);
    CHECK(msg.find("specificity") != std::string::npos);
  }
}

TEST_CASE("confusion matrix accumulation") {
  ConfusionMatrix cm;
  cm.add(Label::Dysplastic, Label::Dysplastic);
  cm.add(Label::Dysplastic, Label::NonDysplastic);
  cm.add(Label::NonDysplastic, Label::Dysplastic);
  cm.add(Label::NonDysplastic, Label::NonDysplastic);
  cm.add(Label::NonDysplastic, Label::NonDysplastic);
  CHECK(cm == ConfusionMatrix{1, 2, 1, 1});
}

TEST_CASE("published D values") {
  struct Row {
    double se, sp, d;
  };
  // Frozen from an independent double-precision evaluation of the formula.
  const Row rows[] = {{0.8125, 0.80, 0.903122}, {0.8125, 0.9333, 0.936301}, {0.9375, 0.8667, 0.951013},
                      {1.0, 0.80, 0.949711},    {1.0, 0.2667, 0.798632},    {1.0, 0.7334, 0.932635}};
  for (const auto& r : rows) {
    CAPTURE(r.se);
    CAPTURE(r.sp);
    CHECK(figure_of_merit_d(r.se, r.sp).d == doctest::Approx(r.d).epsilon(1e-6));
  }
}

TEST_CASE("D matches the closed form on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    const auto m = figure_of_merit_d(a, b);
    REQUIRE(std::abs(m.d - oracle_d(a, b)) < 1e-12);
    REQUIRE(m.d >= 0.0);
    REQUIRE(m.d <= 1.0 + 1e-15);
    REQUIRE(m.theta_deg >= 0.0);
    REQUIRE(m.theta_deg <= 90.0);
  }
}

TEST_CASE("D is symmetric in its two inputs and perfect at (1, 1)") {
  CHECK(figure_of_merit_d(0.3, 0.9).d == doctest::Approx(figure_of_merit_d(0.9, 0.3).d).epsilon(1e-14));
  const auto p = figure_of_merit_d(1.0, 1.0);
  CHECK(p.d == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.theta_deg == doctest::Approx(45.0));
}

TEST_CASE("D edge cases") {
  const auto m = figure_of_merit_d(0.0, 1.0);
  CHECK(m.theta_deg == 90.0);
  CHECK(m.d == doctest::Approx(oracle_d(0.0, 1.0)));
  CHECK_THROWS_AS(figure_of_merit_d(0.0, 0.0), MetricError);
  CHECK_THROWS_AS(figure_of_merit_d(1.1, 0.5), MetricError);
  CHECK_THROWS_AS(figure_of_merit_d(0.5, -0.1), MetricError);
  CHECK_THROWS_AS(figure_of_merit_d(std::nan(""), 0.5), MetricError);
}

TEST_CASE("D axes") {
  const ConfusionMatrix cm{8, 6, 4, 2};
  const auto ss = figure_of_merit_d(cm);
  CHECK(ss.ppv == doctest::Approx(0.8));
  CHECK(ss.npv == doctest::Approx(0.6));
  const auto pv = figure_of_merit_d(cm, DAxes::PredictiveValues);
  CHECK(pv.ppv == doctest::Approx(8.0 / 12.0));
  CHECK(pv.npv == doctest::Approx(6.0 / 8.0));
  CHECK_THROWS_AS(figure_of_merit_d(ConfusionMatrix{0, 5, 0, 3}, DAxes::PredictiveValues), MetricError);
}

TEST_CASE("summarize bundles rates and D") {
  const ConfusionMatrix cm{13, 14, 1, 3};
  const auto row = summarize(cm);
  CHECK(row.cm == cm);
  CHECK(row.rates.accuracy == doctest::Approx(27.0 / 31.0));
  CHECK(row.merit.d == doctest::Approx(oracle_d(13.0 / 16.0, 14.0 / 15.0)).epsilon(1e-12));
}
