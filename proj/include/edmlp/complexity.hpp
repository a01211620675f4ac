#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>

#include "edmlp/nnet.hpp"

namespace edmlp {

// Operation count of one forward pass. Each weight costs a multiply and an
// add, each bias one add; activation functions are not counted.
struct CostEstimate {
  std::size_t flops = 0;
  std::size_t weights = 0;
  std::size_t biases = 0;
};

CostEstimate estimate_flops(const MlpStructure& structure);

/// Two-column table ("Structures", "Computational cost (FLOPs)") with costs
/// in millions, e.g. "2/50/CE (65536 inputs)  6.56 M".
void print_flops_table(std::ostream& out, std::span<const MlpStructure> structures);

}  // namespace edmlp
