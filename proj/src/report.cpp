#include "edmlp/report.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace edmlp {
namespace {

std::string metrics_fields(const MetricsRow& m) {
  return fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}", m.cm.tp, m.cm.tn, m.cm.fp, m.cm.fn,
                     m.rates.sensitivity, m.rates.specificity, m.rates.accuracy, m.merit.d1, m.merit.d2,
                     m.merit.theta_deg, m.merit.d);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

void write_decisions_csv(std::ostream& out, std::span<const RealizationResult> results) {
  out << "realization,case_id,truth,prediction,votes_for,votes_against,tie_broken\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.diagnoses.size(); ++i) {
      const auto& d = r.diagnoses[i];
      out << fmt::format("{},{},{},{},{},{},{}\n", r.realization_index, d.case_id, to_string(r.truth[i]),
                         to_string(d.predicted), d.votes_for, d.votes_against, d.tie_broken ? 1 : 0);
    }
  }
}

void write_metrics_header(std::ostream& out, bool with_realization) {
  if (with_realization) out << "realization,";
  out << "tp,tn,fp,fn,se,sp,acc,d1,d2,theta_deg,d\n";
}

void write_metrics_row(std::ostream& out, const MetricsRow& row) { out << metrics_fields(row) << '\n'; }

void write_metrics_row(std::ostream& out, std::size_t realization, const MetricsRow& row) {
  out << realization << ',' << metrics_fields(row) << '\n';
}

void write_realizations_csv(std::ostream& out, std::span<const RealizationResult> results) {
  write_metrics_header(out, true);
  for (const auto& r : results) write_metrics_row(out, r.realization_index, {r.cm, r.rates, r.merit});
}

void write_aggregate_csv(std::ostream& out, const AggregateReport& a) {
  out << "n_realizations,mean_accuracy,sd_accuracy,max_accuracy,mean_se,mean_sp,mean_d\n";
  out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", a.n_realizations, a.mean_accuracy,
                     a.sd_accuracy, a.max_accuracy, a.mean_sensitivity, a.mean_specificity, a.mean_d);
}

void write_holdout_csv(std::ostream& out, const CutoutHoldoutResult& result) {
  out << "realization,tp,tn,fp,fn,se,sp,acc\n";
  for (std::size_t r = 0; r < result.confusions.size(); ++r) {
    const auto& cm = result.confusions[r];
    const auto& rt = result.rates[r];
    out << fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.6f}\n", r, cm.tp, cm.tn, cm.fp, cm.fn, rt.sensitivity,
                       rt.specificity, rt.accuracy);
  }
  const auto& m = result.mean_confusion;
  const auto& rt = result.rates_of_mean;
  out << fmt::format("mean,{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", m.tp, m.tn, m.fp, m.fn,
                     rt.sensitivity, rt.specificity, rt.accuracy);
}

std::map<std::size_t, ConfusionMatrix> read_decisions_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty decisions file");
  const auto header = split_csv_line(line);
  auto column = [&](const char* name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError(std::string("decisions file lacks column ") + name);
  };
  const auto c_real = column("realization");
  const auto c_truth = column("truth");
  const auto c_pred = column("prediction");

  std::map<std::size_t, ConfusionMatrix> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw DataError(fmt::format("decisions line {}: wrong field count", line_no));
    std::size_t realization = 0;
    try {
      realization = std::stoul(cells[c_real]);
    } catch (const std::exception&) {
      throw DataError(fmt::format("decisions line {}: bad realization index", line_no));
    }
    out[realization].add(parse_label(cells[c_truth]), parse_label(cells[c_pred]));
  }
  return out;
}

}  // namespace edmlp
