#include "edmlp/complexity.hpp"

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace edmlp {

CostEstimate estimate_flops(const MlpStructure& structure) {
  structure.validate();
  CostEstimate e;
  const auto widths = structure.layer_widths();
  for (std::size_t k = 1; k < widths.size(); ++k) {
    e.weights += widths[k - 1] * widths[k];
    e.biases += widths[k];
  }
  e.flops = 2 * e.weights + e.biases;
  return e;
}

void print_flops_table(std::ostream& out, std::span<const MlpStructure> structures) {
  std::vector<std::string> names;
  std::size_t name_width = 10;
  for (const auto& s : structures) {
    names.push_back(fmt::format("{} ({} inputs)", s.describe(), s.input_width));
    name_width = std::max(name_width, names.back().size());
  }
  out << fmt::format("{:<{}}  {}\n", "Structures", name_width, "Computational cost (FLOPs)");
  for (std::size_t i = 0; i < structures.size(); ++i) {
    const auto e = estimate_flops(structures[i]);
    out << fmt::format("{:<{}}  {:.2f} M\n", names[i], name_width, static_cast<double>(e.flops) / 1e6);
  }
}

}  // namespace edmlp
