#include "edmlp/metrics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace edmlp {

void ConfusionMatrix::add(Label truth, Label predicted) {
  if (truth == Label::Dysplastic) {
    (predicted == Label::Dysplastic ? tp : fn) += 1;
  } else {
    (predicted == Label::NonDysplastic ? tn : fp) += 1;
  }
}

RateMetrics rates(const ConfusionMatrix& cm) {
  std::string undefined;
  auto note = [&](const char* name) { undefined += undefined.empty() ? name : std::string(", ") + name; };
  if (cm.tp + cm.fn == 0) note("sensitivity (TP + FN = 0)");
  if (cm.tn + cm.fp == 0) note("specificity (TN + FP = 0)");
  if (cm.total() == 0) note("accuracy (n = 0)");
  if (!undefined.empty()) throw MetricError("undefined rate: " + undefined);

  RateMetrics r;
  r.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  r.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  return r;
}

FigureOfMeritD figure_of_merit_d(double ppv, double npv) {
  if (!(ppv >= 0.0 && ppv <= 1.0 && npv >= 0.0 && npv <= 1.0)) {
    throw MetricError("figure of merit inputs must lie in [0, 1]");
  }
  if (ppv == 0.0 && npv == 0.0) throw MetricError("figure of merit undefined at (0, 0): angle has no direction");

  constexpr double kDeg = 180.0 / std::numbers::pi;
  FigureOfMeritD m;
  m.ppv = ppv;
  m.npv = npv;
  m.d1 = std::sqrt(ppv * ppv + npv * npv) / std::numbers::sqrt2;
  m.theta_deg = ppv == 0.0 ? 90.0 : std::atan(npv / ppv) * kDeg;
  m.d2 = std::cos((45.0 - m.theta_deg) / kDeg);
  m.d = (std::abs(m.d1) + std::abs(m.d2)) / 2.0;
  return m;
}

FigureOfMeritD figure_of_merit_d(const ConfusionMatrix& cm, DAxes axes) {
  if (axes == DAxes::SensitivitySpecificity) {
    const auto r = rates(cm);
    return figure_of_merit_d(r.sensitivity, r.specificity);
  }
  if (cm.tp + cm.fp == 0 || cm.tn + cm.fn == 0) throw MetricError("undefined predictive value (no predictions in a class)");
  return figure_of_merit_d(static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp),
                           static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fn));
}

MetricsRow summarize(const ConfusionMatrix& cm, DAxes axes) {
  return {cm, rates(cm), figure_of_merit_d(cm, axes)};
}

}  // namespace edmlp
