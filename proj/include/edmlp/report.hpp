#pragma once

#include <iosfwd>
#include <map>
#include <span>

#include "edmlp/evaluation.hpp"
#include "edmlp/metrics.hpp"

namespace edmlp {

// CSV writers. Rates and D use fixed 6-decimal formatting with '.' as the
// decimal separator so reports diff cleanly between runs.

/// realization,case_id,truth,prediction,votes_for,votes_against,tie_broken
void write_decisions_csv(std::ostream& out, std::span<const RealizationResult> results);

/// tp,tn,fp,fn,se,sp,acc,d1,d2,theta_deg,d
void write_metrics_header(std::ostream& out, bool with_realization);
void write_metrics_row(std::ostream& out, const MetricsRow& row);
void write_metrics_row(std::ostream& out, std::size_t realization, const MetricsRow& row);

/// One metrics row per realization, prefixed with its index.
void write_realizations_csv(std::ostream& out, std::span<const RealizationResult> results);

/// n_realizations,mean_accuracy,sd_accuracy,max_accuracy,mean_se,mean_sp,mean_d
void write_aggregate_csv(std::ostream& out, const AggregateReport& report);

/// Per-realization cutout-level metrics followed by a "mean" row built from
/// the averaged confusion matrix.
void write_holdout_csv(std::ostream& out, const CutoutHoldoutResult& result);

/// Rebuilds per-realization confusion matrices from a decisions CSV.
std::map<std::size_t, ConfusionMatrix> read_decisions_csv(std::istream& in);

}  // namespace edmlp
