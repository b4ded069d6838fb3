#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "bailab/bounds.hpp"
#include "bailab/model.hpp"
#include "bailab/policy.hpp"

namespace bailab {

// Non-adaptive reference designs need only a budget and an arm count.
struct UniformEbaConfig {
  std::int64_t budget = 0;
  int num_arms = 0;
};

struct OracleNeymanEbaConfig {
  std::int64_t budget = 0;
  int num_arms = 0;
};

using PolicySpec =
    std::variant<TsEbaConfig, UniformEbaConfig, OracleNeymanEbaConfig>;

std::int64_t policy_budget(const PolicySpec& policy);
int policy_num_arms(const PolicySpec& policy);

// One Monte Carlo experiment: a policy, an instance, a replication count,
// and the base seed from which every replication's stream is derived.
struct SimPlan {
  PolicySpec policy;
  BanditInstance instance;
  std::int64_t reps = 0;
  std::uint64_t base_seed = 0;
};

// Aggregates over the replications of one plan. scaled_regret is exactly
// sqrt(T) * mean_regret. choice_freq[a] is the fraction of replications that
// recommended arm a (it feeds the regret-decomposition identity), and
// early_stop_rate the fraction whose candidate set collapsed to one arm.
struct AggregateStats {
  double mean_regret = 0.0;
  double regret_se = 0.0;
  double misid_rate = 0.0;
  double misid_se = 0.0;
  double scaled_regret = 0.0;
  std::vector<double> mean_counts;
  std::vector<double> choice_freq;
  double early_stop_rate = 0.0;
};

// Runs the plan's replications (replication i is seeded deterministically
// from (base_seed, i)) and aggregates. The result is bit-identical for any
// worker count: replications land in a results array by index and all
// floating-point reductions run serially in index order with pairwise
// summation. workers <= 0 means "use the BAILAB_WORKERS environment
// variable, else the hardware count".
AggregateStats simulate(const SimPlan& plan, int workers = 0);

// Worst-case sweep along a gap grid. Each gap builds the adversarial
// instance — the best arm raised by the gap, all others level: Gaussian
// means (gap, 0, ..., 0) with the given per-arm sigmas; Bernoulli means
// (0.5+gap/2, 0.5-gap/2, ..., 0.5-gap/2), dispersions pinned near their
// peak at 1/2. The report compares sup sqrt(T)*regret against the
// worst-case constant at each arm's largest in-space dispersion.
struct ScanRow {
  double gap = 0.0;
  AggregateStats stats;
};

struct ScanReport {
  std::vector<ScanRow> grid;
  double sup_scaled_regret = 0.0;
  double argmax_gap = 0.0;
  double bound_constant = 0.0;
  bool within_bound = false;
};

ScanReport worst_case_scan(const PolicySpec& policy, Family family,
                           const std::vector<double>& sigmas,
                           const std::vector<double>& gap_grid,
                           std::int64_t reps, std::uint64_t base_seed,
                           int workers = 0);

// T-scaled Bayes regret T * E_prior[Regret] under an independent uniform
// prior on each arm mean, with prior_draws instances times reps_per_draw
// replications each. The standard error is taken across the per-draw means,
// so it carries both the between-draw and within-draw noise. A point-mass
// prior (lo == hi) reproduces simulate() on that instance exactly: the
// replication streams are derived from the same (base_seed, global index)
// rule. sigmas are the per-arm dispersions for Gaussian families (ignored
// for Bernoulli).
struct BayesEvalResult {
  double t_scaled_mean = 0.0;
  double t_scaled_se = 0.0;
};

BayesEvalResult bayes_eval(const PolicySpec& policy, Family family,
                           const std::vector<double>& sigmas, PriorSpec prior,
                           std::int64_t prior_draws, std::int64_t reps_per_draw,
                           std::uint64_t base_seed, int workers = 0);

// Residual of the regret decomposition mean_regret = sum_a gap_a * freq_a;
// the bookkeeping identity makes it vanish (contract: <= 1e-12). The
// frequencies must be the same simulation's choice frequencies and sum to 1.
double regret_decomposition_check(const AggregateStats& stats,
                                  const BanditInstance& instance,
                                  const std::vector<double>& choice_freq);

// Largest in-space dispersion of each arm (for Bernoulli this sits at the
// admissible mean closest to 1/2); used for bound constants in scans.
std::vector<double> sup_sigmas(const BanditInstance& instance);

// Worker-count resolution used by the engine (exposed for tests/CLI):
// requested > 0 wins, else the BAILAB_WORKERS environment variable, else
// std::thread::hardware_concurrency(), floored at 1.
int resolve_workers(int requested);

}  // namespace bailab
