#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edmlp/dataset.hpp"
#include "edmlp/decision.hpp"
#include "edmlp/metrics.hpp"
#include "edmlp/nnet.hpp"
#include "edmlp/scg.hpp"

namespace edmlp {

struct ExperimentOptions {
  TrainOptions train;          // train.seed is ignored; seeds derive from master_seed
  LossPair losses;
  std::size_t n_realizations = 1;
  std::uint64_t master_seed = 0;
  std::size_t jobs = 1;
  DAxes axes = DAxes::SensitivitySpecificity;

  void validate() const;
};

// Seeds of one training run, derived from (master, realization, fold).
struct RunSeeds {
  std::uint64_t init = 0;
  std::uint64_t balance = 0;
  std::uint64_t split = 0;
};

RunSeeds fold_seeds(std::uint64_t master, std::size_t realization, std::size_t fold);

/// Undersamples the larger class's cutout pool to the size of the smaller
/// one. Selected cutouts keep their original order, dysplastic first.
/// Throws DataError if either class has no cutouts.
std::vector<Cutout> balance_cutouts(const CaseSet& cases, std::uint64_t seed);

/// Balance, augment with the four rotations, split 70/15/15 and train a
/// freshly initialized network.
TrainResult train_on_cases(const CaseSet& cases, const MlpStructure& structure, const TrainOptions& opts,
                           const RunSeeds& seeds);

struct FoldRecord {
  std::string held_out_case;
  std::vector<std::string> training_cutout_ids;  // pre-augmentation ids used for training
  std::size_t training_vectors = 0;              // after augmentation, before splitting
  std::vector<Posterior> posteriors;             // held-out cutouts, in case order
  StopReason stop_reason = StopReason::MaxEpochs;
  std::size_t epochs = 0;
};

struct RealizationResult {
  std::size_t realization_index = 0;
  std::vector<Label> truth;               // per evaluated case
  std::vector<CaseDiagnosis> diagnoses;   // per evaluated case
  std::vector<std::vector<Posterior>> posteriors;  // per case, per cutout
  ConfusionMatrix cm;
  RateMetrics rates;
  FigureOfMeritD merit;
  std::vector<FoldRecord> folds;          // LOOCV only
};

/// Applies the decision rule and majority vote to stored posteriors and fills
/// diagnoses, confusion matrix, rates and D. With sensitivity and
/// specificity both zero D is undefined; it is then reported as 0.
void decide(RealizationResult& result, const LossPair& losses, DAxes axes = DAxes::SensitivitySpecificity);

/// Classifies every cutout of every case (no augmentation) and decides.
RealizationResult evaluate_cases(const MlpModel& model, const CaseSet& cases, const LossPair& losses,
                                 std::size_t realization_index, DAxes axes = DAxes::SensitivitySpecificity);

struct AggregateReport {
  std::size_t n_realizations = 0;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;  // sample SD (n - 1); 0 for a single realization
  double max_accuracy = 0.0;
  double mean_sensitivity = 0.0;
  double mean_specificity = 0.0;
  double mean_d = 0.0;
};

AggregateReport aggregate(std::span<const RealizationResult> results);

struct LoocvResult {
  std::vector<RealizationResult> realizations;
  AggregateReport aggregate;
};

/// Leave-one-case-out cross-validation repeated over n_realizations
/// independently seeded initializations.
LoocvResult loocv(const CaseSet& cases, const MlpStructure& structure, const ExperimentOptions& opts);

struct BestModelResult {
  MlpModel model;
  std::size_t best_index = 0;
  std::vector<RealizationResult> realizations;
  AggregateReport aggregate;

  const RealizationResult& best() const { return realizations[best_index]; }
};

/// Trains n_realizations networks on all training cases and keeps the one
/// with the highest D on the test cases (ties -> lowest index).
BestModelResult best_by_d(const CaseSet& train_cases, const CaseSet& test_cases, const MlpStructure& structure,
                          const ExperimentOptions& opts);

struct MeanConfusion {
  double tp = 0.0;
  double tn = 0.0;
  double fp = 0.0;
  double fn = 0.0;
};

struct CutoutHoldoutResult {
  std::vector<ConfusionMatrix> confusions;  // per realization, cutout level
  std::vector<RateMetrics> rates;           // per realization
  MeanConfusion mean_confusion;
  RateMetrics rates_of_mean;                // from mean_confusion
  AggregateReport aggregate;
};

/// Cutout-level holdout: each realization draws per_class_train cutouts of
/// each class from train_pool (augmented for training) and per_class_test of
/// each class from test_pool, and classifies test cutouts one by one. Pools
/// must be disjoint by cutout id.
CutoutHoldoutResult cutout_holdout_eval(std::span<const Cutout> train_pool, std::span<const Cutout> test_pool,
                                        const MlpStructure& structure, const ExperimentOptions& opts,
                                        std::size_t per_class_train = 720, std::size_t per_class_test = 50);

}  // namespace edmlp
