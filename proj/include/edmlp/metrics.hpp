#pragma once

#include <cstddef>

#include "edmlp/types.hpp"

namespace edmlp {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  void add(Label truth, Label predicted);

  bool operator==(const ConfusionMatrix&) const = default;
};

struct RateMetrics {
  double sensitivity = 0.0;  // TP / (TP + FN)
  double specificity = 0.0;  // TN / (TN + FP)
  double accuracy = 0.0;     // (TP + TN) / n
};

/// Throws MetricError naming every rate whose denominator is zero.
RateMetrics rates(const ConfusionMatrix& cm);

// Figure of merit D for the vector (ppv, npv):
//   D1 = |(ppv, npv)| / sqrt(2)         magnitude relative to the ideal (1, 1)
//   theta = atan(npv / ppv)             in degrees
//   D2 = cos(45 deg - theta)            alignment with the 45 deg diagonal
//   D  = (|D1| + |D2|) / 2
struct FigureOfMeritD {
  double ppv = 0.0;
  double npv = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double theta_deg = 0.0;
  double d = 0.0;
};

/// ppv and npv in [0, 1], not both zero (MetricError otherwise).
FigureOfMeritD figure_of_merit_d(double ppv, double npv);

// Which pair of rates feeds D. The published tables are reproduced only by
// the sensitivity/specificity pair, so that is the default; the predictive
// value variant uses TP/(TP+FP) and TN/(TN+FN).
enum class DAxes { SensitivitySpecificity, PredictiveValues };

FigureOfMeritD figure_of_merit_d(const ConfusionMatrix& cm, DAxes axes = DAxes::SensitivitySpecificity);

struct MetricsRow {
  ConfusionMatrix cm;
  RateMetrics rates;
  FigureOfMeritD merit;
};

MetricsRow summarize(const ConfusionMatrix& cm, DAxes axes = DAxes::SensitivitySpecificity);

}  // namespace edmlp
