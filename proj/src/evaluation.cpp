#include "edmlp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "edmlp/parallel.hpp"
#include "edmlp/random.hpp"
#include "edmlp/seeds.hpp"

namespace edmlp {
namespace {

// Welford accumulator for mean and sample variance.
class RunningStats {
public:
  void push(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
    max_ = n_ == 1 ? x : std::max(max_, x);
  }
  double mean() const { return mean_; }
  double sd() const { return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0; }
  double max() const { return max_; }

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double max_ = 0.0;
};

struct RealizationStats {
  double accuracy;
  double sensitivity;
  double specificity;
  double d;
};

AggregateReport aggregate_stats(std::span<const RealizationStats> rows) {
  RunningStats acc, se, sp, d;
  for (const auto& r : rows) {
    acc.push(r.accuracy);
    se.push(r.sensitivity);
    sp.push(r.specificity);
    d.push(r.d);
  }
  return {rows.size(), acc.mean(), acc.sd(), acc.max(), se.mean(), sp.mean(), d.mean()};
}

void check_structure(const MlpStructure& structure, std::size_t input_width) {
  structure.validate();
  if (structure.input_width != input_width) {
    throw DimensionError(fmt::format("structure expects {} inputs but cutouts provide {}", structure.input_width,
                                     input_width));
  }
}

void require_both_classes(const CaseSet& cases, const char* what) {
  if (cases.count_cases(Label::Dysplastic) == 0 || cases.count_cases(Label::NonDysplastic) == 0) {
    throw DataError(fmt::format("{} must contain cases of both classes", what));
  }
}

std::vector<Posterior> classify_all(const MlpModel& model, std::span<const Cutout> cutouts) {
  return model.forward(make_batch(cutouts).inputs);
}

// Draws `count` distinct items of one class from a pool.
std::vector<Cutout> sample_class(std::span<const Cutout> pool, Label label, std::size_t count, Rng& rng,
                                 const char* pool_name) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].label == label) members.push_back(i);
  }
  if (members.size() < count) {
    throw DataError(fmt::format("{} pool has {} {} cutouts, {} requested", pool_name, members.size(),
                                to_string(label), count));
  }
  shuffle(std::span(members), rng);
  members.resize(count);
  std::sort(members.begin(), members.end());
  std::vector<Cutout> out;
  out.reserve(count);
  for (auto i : members) out.push_back(pool[i]);
  return out;
}

// Re-raises the active exception with a location prefix, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& where) {
  try {
    throw;
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(where + ": " + e.what());
  } catch (const MetricError& e) {
    throw MetricError(where + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(where + ": " + e.what());
  } catch (const Error& e) {
    throw TrainingError(where + ": " + e.what());
  }
}

// D is undefined when both of its axes are zero (or, for predictive values,
// when a class is never predicted). Such a classifier scores 0.
FigureOfMeritD merit_or_zero(const ConfusionMatrix& cm, DAxes axes) {
  try {
    return figure_of_merit_d(cm, axes);
  } catch (const MetricError&) {
    return {};
  }
}

}  // namespace

void ExperimentOptions::validate() const {
  train.validate();
  losses.validate();
  if (n_realizations < 1) throw ConfigError("n_realizations must be at least 1");
}

RunSeeds fold_seeds(std::uint64_t master, std::size_t realization, std::size_t fold) {
  return {derive_seed(master, {realization, fold, stream::kInit}),
          derive_seed(master, {realization, fold, stream::kBalance}),
          derive_seed(master, {realization, fold, stream::kSplit})};
}

std::vector<Cutout> balance_cutouts(const CaseSet& cases, std::uint64_t seed) {
  std::vector<const Cutout*> pools[2];
  for (const auto& c : cases.cases()) {
    for (const auto& cut : c.cutouts) pools[c.label == Label::Dysplastic ? 0 : 1].push_back(&cut);
  }
  if (pools[0].empty() || pools[1].empty()) {
    throw DataError("cannot balance training cutouts: a class has zero cutouts");
  }
  const std::size_t keep = std::min(pools[0].size(), pools[1].size());
  Rng rng(seed);
  std::vector<Cutout> out;
  out.reserve(2 * keep);
  for (auto& pool : pools) {
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (pool.size() > keep) {
      shuffle(std::span(idx), rng);
      idx.resize(keep);
      std::sort(idx.begin(), idx.end());
    }
    for (auto i : idx) out.push_back(*pool[i]);
  }
  return out;
}

TrainResult train_on_cases(const CaseSet& cases, const MlpStructure& structure, const TrainOptions& opts,
                           const RunSeeds& seeds) {
  check_structure(structure, cases.input_width());
  const auto vectors = augment_all(balance_cutouts(cases, seeds.balance));
  const auto data = split_data(vectors, opts.split, seeds.split);
  return train(init_model(structure, seeds.init), data, opts);
}

void decide(RealizationResult& result, const LossPair& losses, DAxes axes) {
  result.cm = {};
  for (std::size_t i = 0; i < result.diagnoses.size(); ++i) {
    std::vector<Label> votes;
    votes.reserve(result.posteriors[i].size());
    for (const auto& p : result.posteriors[i]) votes.push_back(classify_cutout(p, losses));
    result.diagnoses[i] = classify_case(votes, result.diagnoses[i].case_id);
    result.cm.add(result.truth[i], result.diagnoses[i].predicted);
  }
  result.rates = rates(result.cm);
  result.merit = merit_or_zero(result.cm, axes);
}

RealizationResult evaluate_cases(const MlpModel& model, const CaseSet& cases, const LossPair& losses,
                                 std::size_t realization_index, DAxes axes) {
  RealizationResult r;
  r.realization_index = realization_index;
  for (const auto& c : cases.cases()) {
    r.truth.push_back(c.label);
    r.diagnoses.push_back({c.case_id, Label::NonDysplastic, 0, 0, false});
    r.posteriors.push_back(classify_all(model, c.cutouts));
  }
  decide(r, losses, axes);
  return r;
}

AggregateReport aggregate(std::span<const RealizationResult> results) {
  std::vector<RealizationStats> rows;
  rows.reserve(results.size());
  for (const auto& r : results) rows.push_back({r.rates.accuracy, r.rates.sensitivity, r.rates.specificity, r.merit.d});
  return aggregate_stats(rows);
}

// -------------------------------------------------------------------- LOOCV

LoocvResult loocv(const CaseSet& cases, const MlpStructure& structure, const ExperimentOptions& opts) {
  opts.validate();
  if (cases.size() < 2) throw DataError("leave-one-out needs at least two cases");
  require_both_classes(cases, "the LOOCV case set");
  check_structure(structure, cases.input_width());

  const std::size_t n_cases = cases.size();
  const std::size_t n_tasks = opts.n_realizations * n_cases;
  std::vector<FoldRecord> folds(n_tasks);

  parallel_for(n_tasks, opts.jobs, [&](std::size_t task) {
    const std::size_t r = task / n_cases;
    const std::size_t i = task % n_cases;
    const Case& held_out = cases[i];
    try {
      const std::string excluded[] = {held_out.case_id};
      const CaseSet training = cases.without(excluded);
      const auto seeds = fold_seeds(opts.master_seed, r, i);
      const auto selected = balance_cutouts(training, seeds.balance);
      const auto vectors = augment_all(selected);
      const auto data = split_data(vectors, opts.train.split, seeds.split);
      const auto result = train(init_model(structure, seeds.init), data, opts.train);

      FoldRecord& fold = folds[task];
      fold.held_out_case = held_out.case_id;
      fold.training_cutout_ids.reserve(selected.size());
      for (const auto& c : selected) fold.training_cutout_ids.push_back(c.cutout_id);
      fold.training_vectors = vectors.size();
      fold.posteriors = classify_all(result.model, held_out.cutouts);
      fold.stop_reason = result.history.stop_reason;
      fold.epochs = result.history.epochs.size();
    } catch (const Error&) {
      rethrow_with_context(fmt::format("realization {}, held-out case {}", r, held_out.case_id));
    }
  });

  LoocvResult out;
  out.realizations.resize(opts.n_realizations);
  for (std::size_t r = 0; r < opts.n_realizations; ++r) {
    auto& rr = out.realizations[r];
    rr.realization_index = r;
    for (std::size_t i = 0; i < n_cases; ++i) {
      auto& fold = folds[r * n_cases + i];
      rr.truth.push_back(cases[i].label);
      rr.diagnoses.push_back({cases[i].case_id, Label::NonDysplastic, 0, 0, false});
      rr.posteriors.push_back(fold.posteriors);
      rr.folds.push_back(std::move(fold));
    }
    decide(rr, opts.losses, opts.axes);
  }
  out.aggregate = aggregate(out.realizations);
  return out;
}

// --------------------------------------------------------------- best by D

BestModelResult best_by_d(const CaseSet& train_cases, const CaseSet& test_cases, const MlpStructure& structure,
                          const ExperimentOptions& opts) {
  opts.validate();
  std::unordered_set<std::string> train_ids;
  for (const auto& c : train_cases.cases()) train_ids.insert(c.case_id);
  for (const auto& c : test_cases.cases()) {
    if (train_ids.count(c.case_id)) throw DataError("case " + c.case_id + " appears in both training and test sets");
  }
  require_both_classes(test_cases, "the test case set");
  check_structure(structure, train_cases.input_width());
  check_structure(structure, test_cases.input_width());

  std::vector<MlpModel> models(opts.n_realizations);
  std::vector<RealizationResult> results(opts.n_realizations);
  parallel_for(opts.n_realizations, opts.jobs, [&](std::size_t r) {
    try {
      auto trained = train_on_cases(train_cases, structure, opts.train, fold_seeds(opts.master_seed, r, 0));
      results[r] = evaluate_cases(trained.model, test_cases, opts.losses, r, opts.axes);
      models[r] = std::move(trained.model);
    } catch (const Error&) {
      rethrow_with_context(fmt::format("realization {}", r));
    }
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].merit.d > results[best].merit.d) best = r;
  }
  BestModelResult out;
  out.model = std::move(models[best]);
  out.best_index = best;
  out.aggregate = aggregate(results);
  out.realizations = std::move(results);
  return out;
}

// ------------------------------------------------------ cutout-level holdout

CutoutHoldoutResult cutout_holdout_eval(std::span<const Cutout> train_pool, std::span<const Cutout> test_pool,
                                        const MlpStructure& structure, const ExperimentOptions& opts,
                                        std::size_t per_class_train, std::size_t per_class_test) {
  opts.validate();
  if (per_class_train == 0 || per_class_test == 0) throw ConfigError("per-class sample counts must be positive");
  std::unordered_set<std::string> train_ids;
  for (const auto& c : train_pool) train_ids.insert(c.cutout_id);
  for (const auto& c : test_pool) {
    if (train_ids.count(c.cutout_id)) throw DataError("cutout " + c.cutout_id + " is in both training and test pools");
  }
  if (train_pool.empty() || test_pool.empty()) throw DataError("cutout pools must be nonempty");
  check_structure(structure, train_pool.front().pixels.size());

  const std::size_t n = opts.n_realizations;
  CutoutHoldoutResult out;
  out.confusions.resize(n);
  out.rates.resize(n);
  parallel_for(n, opts.jobs, [&](std::size_t r) {
    try {
      Rng rng(derive_seed(opts.master_seed, {r, 0, stream::kSample}));
      auto train_set = sample_class(train_pool, Label::Dysplastic, per_class_train, rng, "training");
      auto more = sample_class(train_pool, Label::NonDysplastic, per_class_train, rng, "training");
      train_set.insert(train_set.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
      auto test_set = sample_class(test_pool, Label::Dysplastic, per_class_test, rng, "test");
      more = sample_class(test_pool, Label::NonDysplastic, per_class_test, rng, "test");
      test_set.insert(test_set.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));

      const auto seeds = fold_seeds(opts.master_seed, r, 0);
      const auto data = split_data(augment_all(train_set), opts.train.split, seeds.split);
      const auto trained = train(init_model(structure, seeds.init), data, opts.train);
      const auto posteriors = classify_all(trained.model, test_set);
      ConfusionMatrix cm;
      for (std::size_t k = 0; k < test_set.size(); ++k) cm.add(test_set[k].label, classify_cutout(posteriors[k], opts.losses));
      out.confusions[r] = cm;
      out.rates[r] = rates(cm);
    } catch (const Error&) {
      rethrow_with_context(fmt::format("realization {}", r));
    }
  });

  std::vector<RealizationStats> rows;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& cm = out.confusions[r];
    out.mean_confusion.tp += static_cast<double>(cm.tp) / static_cast<double>(n);
    out.mean_confusion.tn += static_cast<double>(cm.tn) / static_cast<double>(n);
    out.mean_confusion.fp += static_cast<double>(cm.fp) / static_cast<double>(n);
    out.mean_confusion.fn += static_cast<double>(cm.fn) / static_cast<double>(n);
    const auto& rt = out.rates[r];
    rows.push_back({rt.accuracy, rt.sensitivity, rt.specificity, merit_or_zero(cm, opts.axes).d});
  }
  const auto& m = out.mean_confusion;
  out.rates_of_mean = {m.tp / (m.tp + m.fn), m.tn / (m.tn + m.fp), (m.tp + m.tn) / (m.tp + m.tn + m.fp + m.fn)};
  out.aggregate = aggregate_stats(rows);
  return out;
}

}  // namespace edmlp
