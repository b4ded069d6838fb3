#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "bailab/harness.hpp"
#include "bailab/model.hpp"
#include "bailab/policy.hpp"

using namespace bailab;

namespace {

TsEbaConfig ts_config(std::int64_t budget, int num_arms,
                      double split_ratio = 0.2) {
  TsEbaConfig cfg;
  cfg.budget = budget;
  cfg.split_ratio = split_ratio;
  cfg.num_arms = num_arms;
  return cfg;
}

bool stats_identical(const AggregateStats& a, const AggregateStats& b) {
  return a.mean_regret == b.mean_regret && a.regret_se == b.regret_se &&
         a.misid_rate == b.misid_rate && a.misid_se == b.misid_se &&
         a.scaled_regret == b.scaled_regret && a.mean_counts == b.mean_counts &&
         a.choice_freq == b.choice_freq &&
         a.early_stop_rate == b.early_stop_rate;
}

}  // namespace

TEST_CASE("policy spec accessors cover all three designs") {
  CHECK(policy_budget(PolicySpec{ts_config(2000, 2)}) == 2000);
  CHECK(policy_num_arms(PolicySpec{ts_config(2000, 2)}) == 2);
  CHECK(policy_budget(PolicySpec{UniformEbaConfig{1500, 3}}) == 1500);
  CHECK(policy_num_arms(PolicySpec{UniformEbaConfig{1500, 3}}) == 3);
  CHECK(policy_budget(PolicySpec{OracleNeymanEbaConfig{999, 4}}) == 999);
  CHECK(policy_num_arms(PolicySpec{OracleNeymanEbaConfig{999, 4}}) == 4);
}

TEST_CASE("zero-gap instances produce exactly zero mean regret") {
  auto instance = make_gaussian_instance({0.4, 0.4, 0.4}, {1.0, 2.0, 0.5});
  for (PolicySpec policy :
       {PolicySpec{ts_config(600, 3)}, PolicySpec{UniformEbaConfig{600, 3}},
        PolicySpec{OracleNeymanEbaConfig{600, 3}}}) {
    SimPlan plan{policy, instance, 500, 12345};
    AggregateStats stats = simulate(plan);
    CHECK(stats.mean_regret == 0.0);
    CHECK(stats.scaled_regret == 0.0);
    CHECK(stats.misid_rate == 0.0);
  }
}

TEST_CASE("a single replication reports zero standard errors") {
  auto instance = make_gaussian_instance({0.5, 0.0}, {1.0, 1.0});
  SimPlan plan{PolicySpec{ts_config(500, 2)}, instance, 1, 777};
  AggregateStats stats = simulate(plan);
  CHECK(stats.regret_se == 0.0);
  CHECK(stats.misid_se == 0.0);
  CHECK((stats.misid_rate == 0.0 || stats.misid_rate == 1.0));
  CHECK((stats.choice_freq[0] == 1.0 || stats.choice_freq[1] == 1.0));
  // Counts of a single run are integers.
  for (double c : stats.mean_counts) CHECK(c == std::floor(c));
  CHECK(stats_identical(stats, simulate(plan)));
}

TEST_CASE("aggregates are bit-identical for any worker count") {
  auto instance = make_gaussian_instance({0.3, 0.25, 0.0}, {1.0, 2.0, 0.7});
  SimPlan plan{PolicySpec{ts_config(600, 3)}, instance, 5000, 20260819};
  AggregateStats one = simulate(plan, 1);
  AggregateStats two = simulate(plan, 2);
  AggregateStats four = simulate(plan, 4);
  CHECK(stats_identical(one, two));
  CHECK(stats_identical(one, four));
}

TEST_CASE("two-arm mean regret is the gap times the misidentification rate") {
  auto instance = make_gaussian_instance({0.3, 0.0}, {1.0, 1.0});
  SimPlan plan{PolicySpec{ts_config(400, 2)}, instance, 20000, 8888};
  AggregateStats stats = simulate(plan);
  CHECK(stats.misid_rate > 0.0);  // the gap is small enough to miss sometimes
  CHECK(std::abs(stats.mean_regret - 0.3 * stats.misid_rate) <= 1e-12);
  CHECK(stats.scaled_regret == std::sqrt(400.0) * stats.mean_regret);
}

TEST_CASE("choice frequencies close the regret decomposition") {
  auto instance = make_gaussian_instance({0.5, 0.2, 0.0}, {1.0, 1.5, 0.5});
  SimPlan plan{PolicySpec{ts_config(300, 3)}, instance, 20000, 31415};
  AggregateStats stats = simulate(plan);
  CHECK(regret_decomposition_check(stats, instance, stats.choice_freq) <=
        1e-12);

  // Hand-checkable case: gaps (0, 0.5), frequencies (0.9, 0.1) and a mean
  // regret of 0.05 close the identity with zero residual.
  auto two = make_gaussian_instance({0.5, 0.0}, {1.0, 1.0});
  AggregateStats hand;
  hand.mean_regret = 0.05;
  CHECK(regret_decomposition_check(hand, two, {0.9, 0.1}) == 0.0);

  CHECK_THROWS_AS(regret_decomposition_check(hand, two, {0.8, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(regret_decomposition_check(hand, two, {0.9, 0.1, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(regret_decomposition_check(hand, two, {1.1, -0.1}),
                  std::invalid_argument);
}

TEST_CASE("simulate validates the plan") {
  auto instance = make_gaussian_instance({0.5, 0.0}, {1.0, 1.0});
  SimPlan bad_reps{PolicySpec{ts_config(400, 2)}, instance, 0, 1};
  CHECK_THROWS_AS(simulate(bad_reps), std::invalid_argument);

  SimPlan mismatch{PolicySpec{ts_config(600, 3)}, instance, 10, 1};
  CHECK_THROWS_AS(simulate(mismatch), std::invalid_argument);

  // rT/K = 83.33... is not an integer pilot size.
  auto three = make_gaussian_instance({0.5, 0.2, 0.0}, {1.0, 1.0, 1.0});
  SimPlan ragged{PolicySpec{ts_config(1000, 3, 0.25)}, three, 10, 1};
  CHECK_THROWS_AS(simulate(ragged), std::invalid_argument);
}

TEST_CASE("worst-case scan spans tiny and dominant gaps") {
  const std::int64_t budget = 2500;
  const double tiny = 1e-6;
  ScanReport report = worst_case_scan(
      PolicySpec{ts_config(budget, 2)}, Family::kGaussianKnownVar, {1.0, 1.0},
      {tiny, 0.06, 5.0}, 2000, 6060);

  REQUIRE(report.grid.size() == 3);
  CHECK(report.grid[0].gap == tiny);

  // At a vanishing gap the recommendation is a fair coin, so the scaled
  // regret is sqrt(T) * gap * (about 1/2).
  const double coin = report.grid[0].stats.scaled_regret /
                      (std::sqrt(static_cast<double>(budget)) * tiny);
  CHECK(coin > 0.45);
  CHECK(coin < 0.55);

  // A dominant gap is separated in the pilot: early stop, no mistakes.
  CHECK(report.grid[2].stats.early_stop_rate > 0.99);
  CHECK(report.grid[2].stats.misid_rate == 0.0);
  CHECK(report.grid[2].stats.scaled_regret == 0.0);

  // The supremum and its argmax are read off the grid rows.
  double sup = 0.0;
  double arg = 0.0;
  double max_se = 0.0;
  for (const ScanRow& row : report.grid) {
    if (row.stats.scaled_regret > sup) {
      sup = row.stats.scaled_regret;
      arg = row.gap;
    }
    max_se = std::max(max_se, std::sqrt(static_cast<double>(budget)) *
                                  row.stats.regret_se);
  }
  CHECK(report.sup_scaled_regret == sup);
  CHECK(report.argmax_gap == arg);
  CHECK(report.bound_constant ==
        minimax_constant(2, std::vector<double>{1.0, 1.0}));
  CHECK(report.within_bound ==
        (sup <= report.bound_constant + 3.0 * max_se));
  // This intermediate-gap sweep sits well inside the worst-case bound.
  CHECK(report.within_bound);
}

TEST_CASE("bernoulli scans pin the bound at the half-point dispersion") {
  ScanReport report = worst_case_scan(PolicySpec{ts_config(1000, 2)},
                                      Family::kBernoulli, {}, {0.1}, 200, 99);
  CHECK(report.bound_constant ==
        minimax_constant(2, std::vector<double>{0.5, 0.5}));
}

TEST_CASE("worst-case scan validates the grid") {
  PolicySpec policy{ts_config(1000, 2)};
  CHECK_THROWS_AS(worst_case_scan(policy, Family::kGaussianKnownVar,
                                  {1.0, 1.0}, {}, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(worst_case_scan(policy, Family::kGaussianKnownVar,
                                  {1.0, 1.0}, {0.1, -0.2}, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(worst_case_scan(policy, Family::kGaussianKnownVar, {1.0},
                                  {0.1}, 100, 1),
                  std::invalid_argument);
}

TEST_CASE("scaled regret at matched gap coefficients is budget-invariant") {
  // The adversarial gap c/sqrt(T) puts the design in its sqrt(T) regime:
  // quadrupling the budget while keeping c fixed must not move the scaled
  // regret beyond combined Monte Carlo noise.
  const double c = 1.5;
  double scaled[2];
  double se[2];
  int i = 0;
  for (std::int64_t budget : {std::int64_t{2500}, std::int64_t{10000}}) {
    const double gap = c / std::sqrt(static_cast<double>(budget));
    auto instance = make_gaussian_instance({gap, 0.0}, {1.0, 1.0});
    SimPlan plan{PolicySpec{ts_config(budget, 2)}, instance, 20000, 5150};
    AggregateStats stats = simulate(plan);
    scaled[i] = stats.scaled_regret;
    se[i] = std::sqrt(static_cast<double>(budget)) * stats.regret_se;
    ++i;
  }
  const double combined = std::sqrt(se[0] * se[0] + se[1] * se[1]);
  CHECK(std::abs(scaled[0] - scaled[1]) <= 3.0 * combined);
}

TEST_CASE("a point-mass prior reproduces plain simulation exactly") {
  const double mass = 0.37;
  PolicySpec policy{ts_config(500, 2)};
  BayesEvalResult bayes =
      bayes_eval(policy, Family::kGaussianKnownVar, {1.0, 2.0},
                 PriorSpec{mass, mass}, 10, 50, 424242);

  auto instance = make_gaussian_instance({mass, mass}, {1.0, 2.0});
  SimPlan plan{policy, instance, 500, 424242};
  AggregateStats stats = simulate(plan);
  CHECK(bayes.t_scaled_mean == 500.0 * stats.mean_regret);
}

TEST_CASE("doubling prior draws shrinks the bayes standard error") {
  PolicySpec policy{ts_config(400, 2)};
  BayesEvalResult coarse =
      bayes_eval(policy, Family::kGaussianKnownVar, {1.0, 1.0},
                 PriorSpec{0.0, 1.0}, 400, 50, 1001);
  BayesEvalResult fine =
      bayes_eval(policy, Family::kGaussianKnownVar, {1.0, 1.0},
                 PriorSpec{0.0, 1.0}, 800, 50, 1001);
  REQUIRE(coarse.t_scaled_se > 0.0);
  const double ratio = fine.t_scaled_se / coarse.t_scaled_se;
  CHECK(ratio > 0.6);
  CHECK(ratio < 0.85);
}

TEST_CASE("bayes evaluation validates its inputs") {
  PolicySpec policy{ts_config(400, 2)};
  CHECK_THROWS_AS(bayes_eval(policy, Family::kGaussianKnownVar, {1.0, 1.0},
                             PriorSpec{1.0, 0.0}, 10, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bayes_eval(policy, Family::kGaussianKnownVar, {1.0, 1.0},
                             PriorSpec{0.0, 1.0}, 0, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bayes_eval(policy, Family::kGaussianKnownVar, {1.0, 1.0},
                             PriorSpec{0.0, 1.0}, 10, 0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bayes_eval(policy, Family::kGaussianKnownVar, {1.0},
                             PriorSpec{0.0, 1.0}, 10, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bayes_eval(policy, Family::kBernoulli, {},
                             PriorSpec{0.0, 1.0}, 10, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("dispersion caps follow the family") {
  auto gauss = make_gaussian_instance({0.1, 0.2}, {1.5, 0.5});
  CHECK(sup_sigmas(gauss) == std::vector<double>{1.5, 0.5});

  // For Bernoulli arms the largest dispersion over the default space sits
  // at the admissible mean closest to 1/2, i.e. exactly 1/2 here.
  auto bern = make_bernoulli_instance({0.3, 0.7});
  CHECK(sup_sigmas(bern) == std::vector<double>{0.5, 0.5});

  // A space bounded away from 1/2 pins the cap at its nearest edge.
  auto shifted = make_bernoulli_instance({0.7, 0.8}, ParamSpace{0.6, 0.9});
  const double edge = std::sqrt(0.6 * 0.4);
  CHECK(sup_sigmas(shifted)[0] == doctest::Approx(edge).epsilon(1e-15));
}

TEST_CASE("worker resolution: explicit, environment, default") {
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(1) == 1);

  setenv("BAILAB_WORKERS", "7", 1);
  CHECK(resolve_workers(0) == 7);
  setenv("BAILAB_WORKERS", "0", 1);
  CHECK_THROWS_AS(resolve_workers(0), std::invalid_argument);
  setenv("BAILAB_WORKERS", "abc", 1);
  CHECK_THROWS_AS(resolve_workers(0), std::invalid_argument);
  setenv("BAILAB_WORKERS", "9999", 1);
  CHECK_THROWS_AS(resolve_workers(0), std::invalid_argument);
  unsetenv("BAILAB_WORKERS");
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("baseline plans report their deterministic allocations") {
  auto instance = make_gaussian_instance({1.0, 0.0}, {1.0, 1.0});
  SimPlan plan{PolicySpec{UniformEbaConfig{2000, 2}}, instance, 2000, 9090};
  AggregateStats stats = simulate(plan);
  CHECK(stats.mean_counts == std::vector<double>{1000.0, 1000.0});
  CHECK(stats.early_stop_rate == 0.0);
  CHECK(stats.misid_rate < 1e-3);

  auto skew = make_gaussian_instance({1.0, 0.0}, {1.0, 3.0});
  SimPlan neyman{PolicySpec{OracleNeymanEbaConfig{1000, 2}}, skew, 500, 9091};
  AggregateStats ns = simulate(neyman);
  CHECK(ns.mean_counts == std::vector<double>{250.0, 750.0});
}
