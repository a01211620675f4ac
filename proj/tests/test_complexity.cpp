#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "edmlp/complexity.hpp"

using namespace edmlp;

namespace {

// Counts the operations of an explicit forward pass in which every neuron
// accumulates acc += w * x over its inputs and then adds its bias.
std::size_t instrumented_count(const MlpStructure& s) {
  std::size_t ops = 0;
  const auto w = s.layer_widths();
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    for (std::size_t o = 0; o < w[k + 1]; ++o) {
      for (std::size_t i = 0; i < w[k]; ++i) ops += 2;
      ops += 1;
    }
  }
  return ops;
}

}  // namespace

TEST_CASE("estimate agrees with an instrumented count") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> width(1, 300), depth(1, 5);
  for (int i = 0; i < 200; ++i) {
    MlpStructure s{width(rng), {}, 2, CostFunction::CrossEntropy};
    for (std::size_t k = depth(rng); k > 0; --k) s.hidden_layers.push_back(width(rng));
    const auto e = estimate_flops(s);
    REQUIRE(e.flops == instrumented_count(s));
    REQUIRE(e.weights + e.biases == s.parameter_count());
    REQUIRE(e.flops == 2 * e.weights + e.biases);
  }
}

TEST_CASE("reference structures") {
  CHECK(estimate_flops({1, {1}, 2, CostFunction::CrossEntropy}).flops == 9);
  CHECK(estimate_flops({65536, {50, 50}, 2, CostFunction::CrossEntropy}).flops == 6558902);
  CHECK(estimate_flops({65536, {100, 100, 100, 100}, 2, CostFunction::MeanSquaredError}).flops == 13168002);
  CHECK(estimate_flops({65536, {150, 150, 150}, 2, CostFunction::CrossEntropy}).flops == 19751852);
  const double published[] = {6.58e6, 13.20e6, 19.79e6};
  const MlpStructure s[] = {{65536, {50, 50}, 2, CostFunction::CrossEntropy},
                            {65536, {100, 100, 100, 100}, 2, CostFunction::MeanSquaredError},
                            {65536, {150, 150, 150}, 2, CostFunction::CrossEntropy}};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(double(estimate_flops(s[i]).flops) / published[i] - 1.0) < 0.005);
  }
}

TEST_CASE("cost grows with every dimension") {
  const MlpStructure base{100, {10, 10}, 2, CostFunction::CrossEntropy};
  auto wider = base;
  wider.hidden_layers[1] = 11;
  auto deeper = base;
  deeper.hidden_layers.push_back(10);
  auto bigger_input = base;
  bigger_input.input_width = 101;
  const auto f = estimate_flops(base).flops;
  CHECK(estimate_flops(wider).flops > f);
  CHECK(estimate_flops(deeper).flops > f);
  CHECK(estimate_flops(bigger_input).flops > f);
  auto mse = base;
  mse.cost = CostFunction::MeanSquaredError;
  CHECK(estimate_flops(mse).flops == f);
}

TEST_CASE("table output") {
  const MlpStructure s[] = {{65536, {50, 50}, 2, CostFunction::CrossEntropy}};
  std::ostringstream out;
  print_flops_table(out, s);
  CHECK(out.str().find("2/50/CE (65536 inputs)") != std::string::npos);
  CHECK(out.str().find("6.56 M") != std::string::npos);
}
