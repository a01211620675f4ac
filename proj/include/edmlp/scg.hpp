#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "edmlp/dataset.hpp"
#include "edmlp/nnet.hpp"

namespace edmlp {

struct SplitFractions {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

struct TrainOptions {
  std::size_t max_epochs = 1000;
  double grad_tol = 1e-6;
  std::size_t val_patience = 6;
  SplitFractions split;
  std::uint64_t seed = 0;

  /// Throws ConfigError when fractions do not sum to 1 or counts are zero.
  void validate() const;
};

// Scaled conjugate gradient constants (Moller's defaults).
inline constexpr double kScgSigma = 5e-5;
inline constexpr double kScgLambdaInit = 5e-7;

enum class StopReason : std::uint8_t { MaxEpochs, ZeroError, GradientTol, ValidationPatience };

std::string_view to_string(StopReason reason);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_cost = 0.0;
  double val_cost = 0.0;
  double grad_norm = 0.0;
  bool step_accepted = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  StopReason stop_reason = StopReason::MaxEpochs;
  double initial_val_cost = 0.0;
  std::size_t best_epoch = 0;  // 1-based epoch whose weights were returned
  double best_val_cost = 0.0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Random stratified partition of n = labels.size() items into
/// floor(train * n) / floor(val * n) / remainder. Items are shuffled within
/// each class and interleaved in proportion, so every split keeps the overall
/// class ratio to within one item. Throws DataError if any split would be
/// empty.
SplitIndices split_indices(std::span<const Label> labels, const SplitFractions& fractions, std::uint64_t seed);

/// One-hot targets, column 0 = dysplastic.
Batch make_batch(std::span<const Cutout> cutouts);
Batch make_batch(std::span<const Cutout> cutouts, std::span<const std::size_t> indices);

struct TrainingData {
  Batch train;
  Batch val;
  Batch test;  // held aside; the trainer never reads it
};

/// Splits cutouts with split_indices and packs each part into a Batch.
TrainingData split_data(std::span<const Cutout> cutouts, const SplitFractions& fractions, std::uint64_t seed);

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

/// Full-batch scaled conjugate gradient on data.train. After every epoch the
/// validation cost is recorded; training stops at the first of
///   (a) max_epochs reached, (b) train cost exactly 0,
///   (c) gradient 2-norm <= grad_tol,
///   (d) validation cost strictly increased val_patience epochs in a row.
/// The returned model carries the weights of the epoch with the lowest
/// validation cost. Throws TrainingError on a non-finite cost or gradient.
TrainResult train(const MlpModel& model, const TrainingData& data, const TrainOptions& opts);

/// CSV: header "epoch,train_cost,val_cost,grad_norm", one row per epoch and a
/// final "stop_reason,<reason>" line.
void write_training_log(std::ostream& out, const TrainHistory& history);

}  // namespace edmlp
