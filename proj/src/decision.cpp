#include "edmlp/decision.hpp"

#include <algorithm>
#include <cmath>

namespace edmlp {

void LossPair::validate() const {
  if (!(lambda_12 >= 0.0) || !(lambda_21 >= 0.0) || !std::isfinite(lambda_12) || !std::isfinite(lambda_21)) {
    throw ConfigError("losses must be finite and non-negative");
  }
  if (lambda_21 == 0.0) throw ConfigError("lambda_21 must be positive (the decision threshold is undefined)");
}

Label classify_cutout(const Posterior& p, const LossPair& losses) {
  losses.validate();
  if (p.non_dysplastic == 0.0) return p.dysplastic > 0.0 ? Label::Dysplastic : Label::NonDysplastic;
  return p.dysplastic / p.non_dysplastic >= losses.lambda_12 / losses.lambda_21 ? Label::Dysplastic
                                                                               : Label::NonDysplastic;
}

CaseDiagnosis classify_case(std::span<const Label> cutout_classes, std::string case_id) {
  if (cutout_classes.empty()) throw DataError("case " + case_id + " has no classified cutouts");
  CaseDiagnosis d;
  d.case_id = std::move(case_id);
  d.votes_for = static_cast<std::size_t>(std::count(cutout_classes.begin(), cutout_classes.end(), Label::Dysplastic));
  d.votes_against = cutout_classes.size() - d.votes_for;
  d.tie_broken = d.votes_for == d.votes_against;
  d.predicted = d.votes_for >= d.votes_against ? Label::Dysplastic : Label::NonDysplastic;
  return d;
}

}  // namespace edmlp
