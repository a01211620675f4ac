#include "edmlp/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "edmlp/types.hpp"

namespace edmlp {
namespace {

using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

ConstMatrixMap weights_of(std::span<const double> params, const LayerSpan& l) {
  return {params.data() + l.weight_offset, static_cast<Eigen::Index>(l.fan_out), static_cast<Eigen::Index>(l.fan_in)};
}

ConstVectorMap bias_of(std::span<const double> params, const LayerSpan& l) {
  return {params.data() + l.bias_offset, static_cast<Eigen::Index>(l.fan_out)};
}

void check_params(const MlpStructure& s, std::span<const double> params) {
  if (params.size() != s.parameter_count()) {
    throw DimensionError("parameter vector has " + std::to_string(params.size()) + " entries, structure needs " +
                         std::to_string(s.parameter_count()));
  }
}

void check_inputs(const MlpStructure& s, const RowMatrix& inputs) {
  if (static_cast<std::size_t>(inputs.cols()) != s.input_width) {
    throw DimensionError("input width " + std::to_string(inputs.cols()) + " does not match network input width " +
                         std::to_string(s.input_width));
  }
}

void softmax_rows(RowMatrix& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) softmax_inplace({z.row(i).data(), static_cast<std::size_t>(z.cols())});
}

// Outputs of every layer; acts.back() holds the posteriors.
std::vector<RowMatrix> forward_all(std::span<const double> params, const RowMatrix& inputs,
                                   const std::vector<LayerSpan>& layers) {
  std::vector<RowMatrix> acts;
  acts.reserve(layers.size());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const RowMatrix& in = k == 0 ? inputs : acts.back();
    RowMatrix z = in * weights_of(params, layers[k]).transpose();
    z.rowwise() += bias_of(params, layers[k]).transpose();
    if (k + 1 < layers.size()) {
      z = z.array().tanh();
    } else {
      softmax_rows(z);
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

double cost_of(CostFunction cost, const RowMatrix& p, const RowMatrix& t) {
  const double n = static_cast<double>(p.rows());
  if (cost == CostFunction::MeanSquaredError) {
    return (p - t).squaredNorm() / (n * static_cast<double>(p.cols()));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index k = 0; k < p.cols(); ++k) {
      if (t(i, k) != 0.0) sum += t(i, k) * std::log(std::max(p(i, k), kProbabilityFloor));
    }
  }
  return -sum / n;
}

}  // namespace

std::string_view to_string(CostFunction cost) {
  return cost == CostFunction::MeanSquaredError ? "mse" : "cross_entropy";
}

CostFunction parse_cost(std::string_view text) {
  if (text == "mse" || text == "MSE") return CostFunction::MeanSquaredError;
  if (text == "cross_entropy" || text == "ce" || text == "CE") return CostFunction::CrossEntropy;
  throw ConfigError("unknown cost function '" + std::string(text) + "' (expected mse or cross_entropy)");
}

// ------------------------------------------------------------ MlpStructure

void MlpStructure::validate() const {
  if (input_width == 0) throw DimensionError("input width must be positive");
  if (hidden_layers.empty()) throw DimensionError("at least one hidden layer is required");
  for (auto w : hidden_layers) {
    if (w == 0) throw DimensionError("hidden layer widths must be positive");
  }
  if (output_width != 2) throw DimensionError("output width must be 2");
}

std::vector<std::size_t> MlpStructure::layer_widths() const {
  std::vector<std::size_t> w;
  w.push_back(input_width);
  w.insert(w.end(), hidden_layers.begin(), hidden_layers.end());
  w.push_back(output_width);
  return w;
}

std::size_t MlpStructure::parameter_count() const {
  const auto w = layer_widths();
  std::size_t n = 0;
  for (std::size_t k = 1; k < w.size(); ++k) n += w[k] * w[k - 1] + w[k];
  return n;
}

std::string MlpStructure::describe() const {
  std::string widths;
  const bool uniform = std::all_of(hidden_layers.begin(), hidden_layers.end(),
                                   [&](std::size_t w) { return w == hidden_layers.front(); });
  if (uniform && !hidden_layers.empty()) {
    widths = std::to_string(hidden_layers.front());
  } else {
    for (std::size_t k = 0; k < hidden_layers.size(); ++k) {
      if (k) widths += 'x';
      widths += std::to_string(hidden_layers[k]);
    }
  }
  return std::to_string(hidden_layers.size()) + "/" + widths + "/" +
         (cost == CostFunction::MeanSquaredError ? "MSE" : "CE");
}

std::vector<LayerSpan> layer_spans(const MlpStructure& structure) {
  const auto w = structure.layer_widths();
  std::vector<LayerSpan> out;
  std::size_t offset = 0;
  for (std::size_t k = 1; k < w.size(); ++k) {
    LayerSpan l{w[k - 1], w[k], offset, offset + w[k] * w[k - 1]};
    offset = l.bias_offset + l.fan_out;
    out.push_back(l);
  }
  return out;
}

// ----------------------------------------------------------------- kernels

void softmax_inplace(std::span<double> logits) {
  if (logits.empty()) return;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - m);
    sum += z;
  }
  for (double& z : logits) z /= sum;
}

RowMatrix forward_batch(const MlpStructure& structure, std::span<const double> params, const RowMatrix& inputs) {
  check_params(structure, params);
  check_inputs(structure, inputs);
  auto acts = forward_all(params, inputs, layer_spans(structure));
  return std::move(acts.back());
}

double batch_cost(const MlpStructure& structure, std::span<const double> params, const Batch& batch) {
  if (batch.size() == 0) throw DimensionError("cost of an empty batch");
  return cost_of(structure.cost, forward_batch(structure, params, batch.inputs), batch.targets);
}

double cost_and_gradient(const MlpStructure& structure, std::span<const double> params, const Batch& batch,
                         std::span<double> grad) {
  check_params(structure, params);
  check_inputs(structure, batch.inputs);
  if (batch.size() == 0) throw DimensionError("gradient of an empty batch");
  if (grad.size() != params.size()) throw DimensionError("gradient buffer size mismatch");

  const auto layers = layer_spans(structure);
  const auto acts = forward_all(params, batch.inputs, layers);
  const RowMatrix& p = acts.back();
  const RowMatrix& t = batch.targets;
  const double n = static_cast<double>(batch.size());

  // dC/dp for each output, then through the softmax Jacobian:
  // dC/dz_j = p_j * (g_j - sum_k g_k p_k).
  RowMatrix g(p.rows(), p.cols());
  if (structure.cost == CostFunction::MeanSquaredError) {
    g = (p - t) * (2.0 / (n * static_cast<double>(p.cols())));
  } else {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index k = 0; k < p.cols(); ++k) {
        g(i, k) = (t(i, k) != 0.0 && p(i, k) >= kProbabilityFloor) ? -t(i, k) / (p(i, k) * n) : 0.0;
      }
    }
  }
  RowMatrix delta(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double dot = g.row(i).dot(p.row(i));
    delta.row(i) = p.row(i).array() * (g.row(i).array() - dot);
  }

  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& l = layers[k];
    MatrixMap dw(grad.data() + l.weight_offset, static_cast<Eigen::Index>(l.fan_out),
                 static_cast<Eigen::Index>(l.fan_in));
    VectorMap db(grad.data() + l.bias_offset, static_cast<Eigen::Index>(l.fan_out));
    const RowMatrix& in = k == 0 ? batch.inputs : acts[k - 1];
    dw.noalias() = delta.transpose() * in;
    db = delta.colwise().sum().transpose();
    if (k > 0) {
      RowMatrix back = delta * weights_of(params, l);
      delta = back.array() * (1.0 - in.array().square());
    }
  }
  return cost_of(structure.cost, p, t);
}

// ---------------------------------------------------------------- MlpModel

MlpModel::MlpModel(MlpStructure structure, std::vector<double> params, std::uint64_t seed)
    : structure_(std::move(structure)), params_(std::move(params)), seed_(seed) {
  structure_.validate();
  check_params(structure_, params_);
  for (double v : params_) {
    if (!std::isfinite(v)) throw DimensionError("model parameters must be finite");
  }
}

Posterior MlpModel::forward(std::span<const double> x) const {
  if (x.size() != structure_.input_width) {
    throw DimensionError("input has " + std::to_string(x.size()) + " values, network expects " +
                         std::to_string(structure_.input_width));
  }
  RowMatrix in = ConstMatrixMap(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  const RowMatrix p = forward_batch(structure_, params_, in);
  return {p(0, 0), p(0, 1)};
}

std::vector<Posterior> MlpModel::forward(const RowMatrix& inputs) const {
  const RowMatrix p = forward_batch(structure_, params_, inputs);
  std::vector<Posterior> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = {p(i, 0), p(i, 1)};
  return out;
}

double MlpModel::cost(const Batch& batch) const { return batch_cost(structure_, params_, batch); }

std::vector<double> MlpModel::gradient(const Batch& batch) const {
  std::vector<double> g(params_.size());
  cost_and_gradient(structure_, params_, batch, g);
  return g;
}

MlpModel MlpModel::with_parameters(std::vector<double> params) const {
  return MlpModel(structure_, std::move(params), seed_);
}

MlpModel init_model(const MlpStructure& structure, std::uint64_t seed) {
  structure.validate();
  std::vector<double> params(structure.parameter_count(), 0.0);
  std::mt19937_64 rng(seed);
  for (const auto& l : layer_spans(structure)) {
    const double r = std::sqrt(6.0 / static_cast<double>(l.fan_in + l.fan_out));
    for (std::size_t i = 0; i < l.fan_in * l.fan_out; ++i) {
      // 53 random bits -> [0, 1); avoids implementation-defined distributions.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      params[l.weight_offset + i] = r * (2.0 * u - 1.0);
    }
  }
  return MlpModel(structure, std::move(params), seed);
}

}  // namespace edmlp
