#include "edmlp/scg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "edmlp/random.hpp"
#include "edmlp/types.hpp"

namespace edmlp {
namespace {

using Vector = Eigen::VectorXd;

std::size_t floor_share(double fraction, std::size_t n) {
  // The epsilon absorbs representation error, e.g. 0.7 * 100 -> 69.999...
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

struct Evaluator {
  const MlpStructure& structure;
  const Batch& batch;

  double cost(const Vector& w) const { return batch_cost(structure, {w.data(), static_cast<std::size_t>(w.size())}, batch); }
  double cost_and_grad(const Vector& w, Vector& g) const {
    g.resize(w.size());
    return cost_and_gradient(structure, {w.data(), static_cast<std::size_t>(w.size())}, batch,
                             {g.data(), static_cast<std::size_t>(g.size())});
  }
};

void require_finite(double v, const char* what, std::size_t epoch) {
  if (!std::isfinite(v)) throw TrainingError(fmt::format("non-finite {} at epoch {}", what, epoch));
}

void require_finite(const Vector& v, const char* what, std::size_t epoch) {
  if (!v.allFinite()) throw TrainingError(fmt::format("non-finite {} at epoch {}", what, epoch));
}

}  // namespace

void TrainOptions::validate() const {
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (val_patience < 1) throw ConfigError("val_patience must be at least 1");
  if (!(grad_tol >= 0.0)) throw ConfigError("grad_tol must be non-negative");
  const double sum = split.train + split.val + split.test;
  if (split.train <= 0.0 || split.val <= 0.0 || split.test < 0.0 || std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be positive and sum to 1");
  }
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxEpochs: return "max_epochs";
    case StopReason::ZeroError: return "zero_error";
    case StopReason::GradientTol: return "gradient_tol";
    case StopReason::ValidationPatience: return "validation_patience";
  }
  return "?";
}

// -------------------------------------------------------------- splitting

SplitIndices split_indices(std::span<const Label> labels, const SplitFractions& fractions, std::uint64_t seed) {
  const std::size_t n = labels.size();
  const std::size_t n_train = floor_share(fractions.train, n);
  const std::size_t n_val = floor_share(fractions.val, n);
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw DataError(fmt::format("{} samples are too few for a train/validation/test split", n));
  }

  Rng rng(seed);
  struct Keyed {
    double key;
    int cls;
    std::size_t index;
  };
  std::vector<Keyed> order;
  order.reserve(n);
  for (Label cls : {Label::Dysplastic, Label::NonDysplastic}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    shuffle(std::span(members), rng);
    const double m = static_cast<double>(members.size());
    for (std::size_t j = 0; j < members.size(); ++j) {
      order.push_back({(static_cast<double>(j) + 0.5) / m, static_cast<int>(cls), members[j]});
    }
  }
  std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
    return a.key != b.key ? a.key < b.key : a.cls < b.cls;
  });

  SplitIndices out;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_train ? out.train : (i < n_train + n_val ? out.val : out.test);
    dst.push_back(order[i].index);
  }
  return out;
}

Batch make_batch(std::span<const Cutout> cutouts, std::span<const std::size_t> indices) {
  if (indices.empty()) return {};
  const std::size_t width = cutouts[indices.front()].pixels.size();
  Batch b{RowMatrix(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(width)),
          RowMatrix::Zero(static_cast<Eigen::Index>(indices.size()), 2)};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& c = cutouts[indices[r]];
    if (c.pixels.size() != width) throw DimensionError("cutouts in one batch must share a size");
    const auto row = static_cast<Eigen::Index>(r);
    b.inputs.row(row) = Eigen::Map<const Eigen::RowVectorXd>(c.pixels.data(), static_cast<Eigen::Index>(width));
    b.targets(row, c.label == Label::Dysplastic ? 0 : 1) = 1.0;
  }
  return b;
}

Batch make_batch(std::span<const Cutout> cutouts) {
  std::vector<std::size_t> all(cutouts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return make_batch(cutouts, all);
}

TrainingData split_data(std::span<const Cutout> cutouts, const SplitFractions& fractions, std::uint64_t seed) {
  std::vector<Label> labels;
  labels.reserve(cutouts.size());
  for (const auto& c : cutouts) labels.push_back(c.label);
  const auto idx = split_indices(labels, fractions, seed);
  return {make_batch(cutouts, idx.train), make_batch(cutouts, idx.val), make_batch(cutouts, idx.test)};
}

// ---------------------------------------------------------------- training

TrainResult train(const MlpModel& model, const TrainingData& data, const TrainOptions& opts) {
  opts.validate();
  const auto& structure = model.structure();
  if (data.train.size() == 0 || data.val.size() == 0) throw TrainingError("training and validation sets must be nonempty");
  for (const Batch* b : {&data.train, &data.val}) {
    if (static_cast<std::size_t>(b->inputs.cols()) != structure.input_width) {
      throw DimensionError(fmt::format("data has {} inputs per sample, network expects {}", b->inputs.cols(),
                                       structure.input_width));
    }
  }

  const Evaluator train_eval{structure, data.train};
  const Evaluator val_eval{structure, data.val};
  const auto n_params = static_cast<std::size_t>(structure.parameter_count());

  Vector w = Eigen::Map<const Vector>(model.parameters().data(), static_cast<Eigen::Index>(n_params));
  Vector g;
  double cost = train_eval.cost_and_grad(w, g);
  require_finite(cost, "training cost", 0);
  require_finite(g, "gradient", 0);

  Vector r = -g;
  Vector p = r;
  Vector s(w.size());
  Vector w_trial;
  Vector g_trial;
  bool success = true;
  double lambda = kScgLambdaInit;
  double lambda_bar = 0.0;
  double delta = 0.0;
  std::size_t iteration = 1;

  TrainHistory history;
  history.initial_val_cost = val_eval.cost(w);
  require_finite(history.initial_val_cost, "validation cost", 0);
  double prev_val = history.initial_val_cost;
  double val = prev_val;
  std::size_t rising = 0;
  Vector best_w = w;
  history.best_val_cost = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1;; ++epoch) {
    bool accepted = false;
    if (cost != 0.0 && g.norm() > opts.grad_tol) {
      double p_sq = p.squaredNorm();
      double mu = p.dot(r);
      if (mu <= 0.0) {
        // Lost conjugacy; fall back to steepest descent.
        p = r;
        p_sq = p.squaredNorm();
        mu = p_sq;
        success = true;
      }
      if (success) {
        const double sigma_k = kScgSigma / std::sqrt(p_sq);
        w_trial = w + sigma_k * p;
        train_eval.cost_and_grad(w_trial, g_trial);
        require_finite(g_trial, "gradient", epoch);
        s = (g_trial - g) / sigma_k;
        delta = p.dot(s);
      }
      delta += (lambda - lambda_bar) * p_sq;
      if (delta <= 0.0) {
        // Force the local Hessian approximation positive definite.
        lambda_bar = 2.0 * (lambda - delta / p_sq);
        delta = -delta + lambda * p_sq;
        lambda = lambda_bar;
      }
      const double alpha = mu / delta;
      w_trial = w + alpha * p;
      const double cost_trial = train_eval.cost_and_grad(w_trial, g_trial);
      require_finite(cost_trial, "training cost", epoch);
      const double comparison = 2.0 * delta * (cost - cost_trial) / (mu * mu);

      if (comparison >= 0.0) {
        require_finite(g_trial, "gradient", epoch);
        const Vector r_new = -g_trial;
        w.swap(w_trial);
        g.swap(g_trial);
        cost = cost_trial;
        lambda_bar = 0.0;
        success = true;
        if (iteration % n_params == 0) {
          p = r_new;
        } else {
          const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
          p = r_new + beta * p;
        }
        r = r_new;
        if (comparison >= 0.75) lambda *= 0.25;
        accepted = true;
      } else {
        lambda_bar = lambda;
        success = false;
      }
      if (comparison < 0.25) lambda += delta * (1.0 - comparison) / p_sq;
      if (!std::isfinite(lambda)) throw TrainingError(fmt::format("scaling parameter diverged at epoch {}", epoch));
      ++iteration;
    }

    if (accepted) {
      val = val_eval.cost(w);
      require_finite(val, "validation cost", epoch);
    }
    const double grad_norm = g.norm();
    history.epochs.push_back({epoch, cost, val, grad_norm, accepted});

    if (val < history.best_val_cost) {
      history.best_val_cost = val;
      history.best_epoch = epoch;
      best_w = w;
    }
    rising = val > prev_val ? rising + 1 : 0;
    prev_val = val;

    if (epoch >= opts.max_epochs) {
      history.stop_reason = StopReason::MaxEpochs;
    } else if (cost == 0.0) {
      history.stop_reason = StopReason::ZeroError;
    } else if (grad_norm <= opts.grad_tol) {
      history.stop_reason = StopReason::GradientTol;
    } else if (rising >= opts.val_patience) {
      history.stop_reason = StopReason::ValidationPatience;
    } else {
      continue;
    }
    break;
  }

  std::vector<double> params(best_w.data(), best_w.data() + best_w.size());
  return {model.with_parameters(std::move(params)), std::move(history)};
}

void write_training_log(std::ostream& out, const TrainHistory& history) {
  out << "epoch,train_cost,val_cost,grad_norm\n";
  for (const auto& e : history.epochs) {
    out << fmt::format("{},{:.10e},{:.10e},{:.10e}\n", e.epoch, e.train_cost, e.val_cost, e.grad_norm);
  }
  out << "stop_reason," << to_string(history.stop_reason) << '\n';
}

}  // namespace edmlp
