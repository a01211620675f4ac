#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "edmlp/types.hpp"

namespace edmlp {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class CostFunction : std::uint8_t { MeanSquaredError = 0, CrossEntropy = 1 };

std::string_view to_string(CostFunction cost);
/// Accepts "mse" and "cross_entropy" (also "ce").
CostFunction parse_cost(std::string_view text);

/// Probabilities below this are clamped before taking the log in the
/// cross-entropy cost.
inline constexpr double kProbabilityFloor = 1e-12;

struct MlpStructure {
  std::size_t input_width = 0;
  std::vector<std::size_t> hidden_layers;
  std::size_t output_width = 2;
  CostFunction cost = CostFunction::CrossEntropy;

  /// Throws DimensionError unless there is at least one hidden layer, all
  /// widths are positive and the output has exactly two units.
  void validate() const;

  /// input, hidden..., output
  std::vector<std::size_t> layer_widths() const;
  std::size_t parameter_count() const;

  /// "NHL/NNPHL/cost" when all hidden layers share a width, otherwise the
  /// widths joined with 'x', e.g. "2/50/CE" or "3/100x50x20/MSE".
  std::string describe() const;

  bool operator==(const MlpStructure&) const = default;
};

// Location of one layer inside the flat parameter vector. Layers are stored
// in order; each contributes its weight matrix (fan_out x fan_in, row-major)
// followed by its bias vector.
struct LayerSpan {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

std::vector<LayerSpan> layer_spans(const MlpStructure& structure);

struct Posterior {
  double dysplastic = 0.5;      // P(omega_1 | x)
  double non_dysplastic = 0.5;  // P(omega_2 | x)
};

// Inputs one sample per row; targets one-hot, column 0 is the dysplastic class.
struct Batch {
  RowMatrix inputs;
  RowMatrix targets;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
};

/// Numerically stable softmax over one row of logits (max subtracted).
void softmax_inplace(std::span<double> logits);

// Stateless evaluation on an explicit parameter vector. The trainer works on
// raw parameter vectors; MlpModel wraps these for everyday use.
RowMatrix forward_batch(const MlpStructure& structure, std::span<const double> params, const RowMatrix& inputs);
double batch_cost(const MlpStructure& structure, std::span<const double> params, const Batch& batch);
/// Cost and its exact gradient (written to `grad`, laid out like `params`).
/// Both are means over the batch.
double cost_and_gradient(const MlpStructure& structure, std::span<const double> params, const Batch& batch,
                         std::span<double> grad);

class MlpModel {
public:
  MlpModel() = default;
  MlpModel(MlpStructure structure, std::vector<double> params, std::uint64_t seed = 0);

  const MlpStructure& structure() const { return structure_; }
  std::span<const double> parameters() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  Posterior forward(std::span<const double> x) const;
  std::vector<Posterior> forward(const RowMatrix& inputs) const;
  double cost(const Batch& batch) const;
  std::vector<double> gradient(const Batch& batch) const;

  MlpModel with_parameters(std::vector<double> params) const;

  bool operator==(const MlpModel&) const = default;

private:
  MlpStructure structure_;
  std::vector<double> params_;
  std::uint64_t seed_ = 0;
};

/// Glorot-uniform weights, U[-r, r] with r = sqrt(6 / (fan_in + fan_out)),
/// zero biases. Bit-identical for equal (structure, seed).
MlpModel init_model(const MlpStructure& structure, std::uint64_t seed);

}  // namespace edmlp
