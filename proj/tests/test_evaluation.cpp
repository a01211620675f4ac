#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "edmlp/evaluation.hpp"
#include "test_util.hpp"

using namespace edmlp;

namespace {

ExperimentOptions quick_options(std::size_t realizations, std::size_t jobs = 1) {
  ExperimentOptions o;
  o.train.max_epochs = 15;
  o.n_realizations = realizations;
  o.master_seed = 77;
  o.jobs = jobs;
  return o;
}

const MlpStructure kSmall{4096, {3}, 2, CostFunction::CrossEntropy};

RealizationResult with_rates(double acc, double se, double sp, double d) {
  RealizationResult r;
  r.rates = {se, sp, acc};
  r.merit.d = d;
  return r;
}

}  // namespace

TEST_CASE("fold seeds differ across realizations, folds and streams") {
  std::set<std::uint64_t> seen;
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t f = 0; f < 20; ++f) {
      const auto s = fold_seeds(1, r, f);
      seen.insert({s.init, s.balance, s.split});
    }
  }
  CHECK(seen.size() == 300);
  CHECK(fold_seeds(1, 2, 3).init == fold_seeds(1, 2, 3).init);
  CHECK(fold_seeds(1, 2, 3).init != fold_seeds(2, 2, 3).init);
}

TEST_CASE("balancing undersamples the larger class") {
  const auto set = generate(test::tiny_synth(3));
  std::size_t n[2] = {0, 0};
  for (const auto& c : set.cases()) n[c.label == Label::Dysplastic ? 0 : 1] += c.cutouts.size();
  const auto out = balance_cutouts(set, 5);
  const auto keep = std::min(n[0], n[1]);
  REQUIRE(out.size() == 2 * keep);
  for (std::size_t i = 0; i < keep; ++i) CHECK(out[i].label == Label::Dysplastic);
  for (std::size_t i = keep; i < out.size(); ++i) CHECK(out[i].label == Label::NonDysplastic);
  std::set<std::string> ids;
  for (const auto& c : out) ids.insert(c.cutout_id);
  CHECK(ids.size() == out.size());
  CHECK(balance_cutouts(set, 5).front().cutout_id == out.front().cutout_id);

  const std::string drop[] = {"case_000", "case_002", "case_004"};
  CHECK_THROWS_AS(balance_cutouts(set.without(drop), 1), DataError);
}

TEST_CASE("aggregate matches a two-pass computation") {
  const std::vector<RealizationResult> rs{with_rates(0.8, 0.7, 0.9, 0.85), with_rates(0.9, 1.0, 0.8, 0.93),
                                          with_rates(0.75, 0.6, 0.9, 0.8), with_rates(0.95, 0.9, 1.0, 0.97)};
  const auto a = aggregate(rs);
  double mean = 0.0;
  for (const auto& r : rs) mean += r.rates.accuracy;
  mean /= 4.0;
  double ss = 0.0;
  for (const auto& r : rs) ss += (r.rates.accuracy - mean) * (r.rates.accuracy - mean);
  CHECK(a.n_realizations == 4);
  CHECK(std::abs(a.mean_accuracy - mean) < 1e-12);
  CHECK(std::abs(a.sd_accuracy - std::sqrt(ss / 3.0)) < 1e-12);
  CHECK(a.max_accuracy == 0.95);
  CHECK(a.mean_d == doctest::Approx((0.85 + 0.93 + 0.8 + 0.97) / 4.0));
  const std::vector<RealizationResult> one{with_rates(0.5, 0.5, 0.5, 0.5)};
  CHECK(aggregate(one).sd_accuracy == 0.0);
}

TEST_CASE("decide re-applies the rule to stored posteriors") {
  RealizationResult r;
  r.truth = {Label::Dysplastic, Label::NonDysplastic};
  r.diagnoses = {{"a"}, {"b"}};
  r.posteriors = {{{0.4, 0.6}, {0.45, 0.55}}, {{0.2, 0.8}, {0.3, 0.7}}};
  decide(r, {});
  CHECK(r.cm == ConfusionMatrix{0, 1, 0, 1});
  CHECK(r.merit.d == doctest::Approx(std::sqrt(0.5)));  // Se = 0, Sp = 1
  decide(r, {1.0, 2.0});  // dysplastic iff P1/P2 >= 0.5
  CHECK(r.cm == ConfusionMatrix{1, 1, 0, 0});
  CHECK(r.merit.d == doctest::Approx(1.0));
  decide(r, {1.0, 8.0});
  CHECK(r.cm == ConfusionMatrix{1, 0, 1, 0});
  CHECK(r.diagnoses[1].votes_for == 2);
  CHECK(r.diagnoses[0].case_id == "a");
}

TEST_CASE("loocv excludes the held-out case and does not depend on jobs") {
  const auto set = generate(test::tiny_synth(4));
  const auto a = loocv(set, kSmall, quick_options(2, 1));
  const auto b = loocv(set, kSmall, quick_options(2, 2));
  REQUIRE(a.realizations.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto& ra = a.realizations[r];
    CHECK(ra.realization_index == r);
    CHECK(ra.cm == b.realizations[r].cm);
    CHECK(ra.cm.total() == set.size());
    REQUIRE(ra.folds.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto& f = ra.folds[i];
      CHECK(f.held_out_case == set[i].case_id);
      CHECK(f.posteriors.size() == set[i].cutouts.size());
      CHECK(f.training_vectors == 4 * f.training_cutout_ids.size());
      for (const auto& id : f.training_cutout_ids) REQUIRE(id.rfind(set[i].case_id + "/", 0) != 0);
      for (std::size_t k = 0; k < f.posteriors.size(); ++k) {
        CHECK(f.posteriors[k].dysplastic == b.realizations[r].folds[i].posteriors[k].dysplastic);
      }
    }
  }
  CHECK(a.aggregate.n_realizations == 2);
}

TEST_CASE("loocv input checks") {
  const auto set = generate(test::tiny_synth(4));
  CHECK_THROWS_AS(loocv(set, {100, {3}, 2, CostFunction::CrossEntropy}, quick_options(1)), DimensionError);
  const std::string drop[] = {"case_001", "case_003", "case_005"};
  CHECK_THROWS_AS(loocv(set.without(drop), kSmall, quick_options(1)), DataError);
  auto bad = quick_options(1);
  bad.n_realizations = 0;
  CHECK_THROWS_AS(loocv(set, kSmall, bad), ConfigError);
}

TEST_CASE("best model by D") {
  const auto train_set = generate(test::tiny_synth(10));
  auto test_params = test::tiny_synth(11);
  const auto raw_test = generate(test_params);
  std::vector<Case> renamed;
  for (auto c : raw_test.cases()) {
    c.case_id = "t" + c.case_id;
    for (auto& cut : c.cutouts) {
      cut.case_id = c.case_id;
      cut.cutout_id = "t" + cut.cutout_id;
    }
    renamed.push_back(std::move(c));
  }
  const CaseSet test_set(std::move(renamed));
  const auto best = best_by_d(train_set, test_set, kSmall, quick_options(3));
  REQUIRE(best.realizations.size() == 3);
  for (const auto& r : best.realizations) CHECK(r.merit.d <= best.best().merit.d);
  for (std::size_t i = 0; i < best.best_index; ++i) CHECK(best.realizations[i].merit.d < best.best().merit.d);
  const auto again = evaluate_cases(best.model, test_set, {}, best.best_index);
  CHECK(again.cm == best.best().cm);
  CHECK_THROWS_AS(best_by_d(train_set, train_set, kSmall, quick_options(1)), DataError);
}

TEST_CASE("cutout-level holdout") {
  const auto pool_set = generate(test::tiny_synth(12));
  std::vector<Cutout> train_pool, test_pool;
  for (std::size_t i = 0; i < pool_set.size(); ++i) {
    for (const auto& c : pool_set[i].cutouts) (i < 4 ? train_pool : test_pool).push_back(c);
  }
  auto opts = quick_options(2);
  const auto r = cutout_holdout_eval(train_pool, test_pool, kSmall, opts, 2, 2);
  REQUIRE(r.confusions.size() == 2);
  for (const auto& cm : r.confusions) CHECK(cm.total() == 4);
  CHECK(r.mean_confusion.tp + r.mean_confusion.fn == doctest::Approx(2.0));
  CHECK_THROWS_AS(cutout_holdout_eval(train_pool, train_pool, kSmall, opts, 2, 2), DataError);
  CHECK_THROWS_AS(cutout_holdout_eval(train_pool, test_pool, kSmall, opts, 100, 2), DataError);
}

TEST_CASE("undefined D is reported as zero") {
  RealizationResult r;
  r.truth = {Label::Dysplastic, Label::NonDysplastic};
  r.diagnoses = {{"a"}, {"b"}};
  r.posteriors = {{{0.1, 0.9}}, {{0.9, 0.1}}};
  decide(r, {});
  CHECK(r.cm == ConfusionMatrix{0, 0, 1, 1});
  CHECK(r.merit.d == 0.0);
}
