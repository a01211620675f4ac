#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "edmlp/nnet.hpp"
#include "edmlp/types.hpp"

namespace edmlp {

// Bayes risk losses. lambda_12 is the loss of assigning a non-dysplastic
// cutout to the dysplastic class (false positive), lambda_21 the loss of the
// opposite error (false negative).
struct LossPair {
  double lambda_12 = 1.0;
  double lambda_21 = 1.0;

  void validate() const;
};

/// Dysplastic iff P(w1|x) / P(w2|x) >= lambda_12 / lambda_21. Equality goes
/// to the dysplastic class. Throws ConfigError if lambda_21 is zero.
Label classify_cutout(const Posterior& p, const LossPair& losses);

struct CaseDiagnosis {
  std::string case_id;
  Label predicted = Label::NonDysplastic;
  std::size_t votes_for = 0;      // cutouts voted dysplastic
  std::size_t votes_against = 0;  // cutouts voted non-dysplastic
  bool tie_broken = false;        // exact tie, resolved to dysplastic
};

/// Majority vote over the cutout decisions of one case. Throws DataError on
/// an empty list.
CaseDiagnosis classify_case(std::span<const Label> cutout_classes, std::string case_id);

}  // namespace edmlp
