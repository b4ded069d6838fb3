#include "bailab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace bailab {

namespace {

// Lowest index attaining the maximum sample mean across all arms.
int empirical_best(const std::vector<ArmStats>& stats) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(stats.size()); ++a) {
    if (stats[a].mean > stats[best].mean) best = a;
  }
  return best;
}

RunResult finalize(const BanditInstance& instance, int chosen,
                   std::vector<std::int64_t> counts, int candidate_size) {
  RunResult result;
  result.chosen = chosen;
  result.counts = std::move(counts);
  result.regret = instance.gap(chosen);
  result.misidentified = result.regret > 0.0;
  result.candidate_size = candidate_size;
  return result;
}

}  // namespace

std::int64_t TsEbaConfig::pilot_per_arm() const {
  if (num_arms < 2) {
    throw std::invalid_argument("the design needs at least 2 arms, got " +
                                std::to_string(num_arms));
  }
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw std::invalid_argument("split ratio r must lie in (0, 1), got " +
                                std::to_string(split_ratio));
  }
  if (budget < num_arms) {
    throw std::invalid_argument("budget T must cover at least one pull per arm");
  }
  if (!(radius_mult > 0.0)) {
    throw std::invalid_argument("radius_mult must be > 0");
  }
  double exact = split_ratio * static_cast<double>(budget) /
                 static_cast<double>(num_arms);
  auto rounded = static_cast<std::int64_t>(std::llround(exact));
  if (std::abs(exact - static_cast<double>(rounded)) >
      1e-6 * std::max(1.0, exact)) {
    throw std::invalid_argument(
        "the pilot stage allocates rT/K pulls per arm, which must be an "
        "integer: T=" + std::to_string(budget) + ", r=" +
        std::to_string(split_ratio) + ", K=" + std::to_string(num_arms) +
        " gives rT/K = " + std::to_string(exact));
  }
  if (rounded < 2) {
    throw std::invalid_argument(
        "the pilot stage needs rT/K >= 2 pulls per arm to estimate "
        "variances, got " + std::to_string(rounded));
  }
  return rounded;
}

std::vector<int> candidate_set(const ConfBounds& bounds) {
  if (bounds.lower.empty() || bounds.lower.size() != bounds.upper.size()) {
    throw std::invalid_argument("candidate_set needs matching nonempty bounds");
  }
  double best_lower = *std::max_element(bounds.lower.begin(), bounds.lower.end());
  std::vector<int> candidates;
  for (int a = 0; a < static_cast<int>(bounds.upper.size()); ++a) {
    if (bounds.upper[a] >= best_lower) candidates.push_back(a);
  }
  return candidates;
}

std::vector<double> ideal_ratio(const std::vector<double>& sigmas) {
  if (sigmas.size() < 2) {
    throw std::invalid_argument("ideal_ratio needs at least 2 candidates");
  }
  double total = 0.0;
  for (double s : sigmas) {
    if (!(s >= 0.0)) {
      throw std::invalid_argument("ideal_ratio needs nonnegative sigmas");
    }
    total += sigmas.size() == 2 ? s : s * s;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("ideal_ratio needs at least one positive sigma");
  }
  std::vector<double> weights;
  weights.reserve(sigmas.size());
  for (double s : sigmas) {
    weights.push_back((sigmas.size() == 2 ? s : s * s) / total);
  }
  return weights;
}

std::vector<double> stage2_probs(const std::vector<double>& weights,
                                 double split_ratio, int num_arms) {
  if (weights.empty()) {
    throw std::invalid_argument("stage2_probs needs a nonempty weight vector");
  }
  if (num_arms < 2 || !(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw std::invalid_argument("stage2_probs needs K >= 2 and r in (0, 1)");
  }
  double pilot_share = split_ratio / static_cast<double>(num_arms);
  std::vector<double> probs(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    probs[i] = std::max(weights[i] - pilot_share, 0.0);
    total += probs[i];
  }
  if (total <= 0.0) {  // every weight clipped: degenerate, sample uniformly
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(probs.size()));
    return probs;
  }
  for (double& p : probs) p /= total;
  return probs;
}

bool side_condition_ok(const std::vector<double>& sigmas, double split_ratio) {
  if (sigmas.size() < 2) {
    throw std::invalid_argument("side_condition_ok needs at least 2 arms");
  }
  auto weights = ideal_ratio(sigmas);
  double min_weight = *std::min_element(weights.begin(), weights.end());
  return split_ratio / static_cast<double>(sigmas.size()) <= min_weight;
}

RunResult run(const TsEbaConfig& config, const BanditInstance& instance,
              Rng& rng, PolicyState* state_out) {
  if (config.num_arms != instance.num_arms()) {
    throw std::invalid_argument("config and instance disagree on arm count");
  }
  const std::int64_t n1 = config.pilot_per_arm();
  const int k = config.num_arms;

  PolicyState state;
  state.phase = Phase::kStage1;
  state.stats.resize(k);
  std::vector<std::int64_t> counts(k, 0);

  // Stage 1: uniform pilot, n1 pulls per arm.
  for (int a = 0; a < k; ++a) {
    for (std::int64_t i = 0; i < n1; ++i) {
      state.stats[a].add(instance.arms[a].sample(rng));
    }
    counts[a] = n1;
  }

  ConfBounds bounds = conf_bounds(state.stats, config.budget,
                                  config.split_ratio, config.radius_mult);
  state.candidates = candidate_set(bounds);

  if (state.candidates.size() == 1) {
    // A single survivor: recommend it now and forfeit the remaining budget.
    int winner = state.candidates[0];
    state.phase = Phase::kDone;
    state.early_winner = winner;
    state.probs.assign(k, 0.0);
    if (state_out) *state_out = std::move(state);
    return finalize(instance, winner, std::move(counts), 1);
  }

  // Stage-2 target weights over the candidates.
  std::vector<double> weights;
  if (config.variant == Variant::kUniformOnCandidates) {
    weights.assign(state.candidates.size(),
                   1.0 / static_cast<double>(state.candidates.size()));
  } else {
    std::vector<double> sigmas;
    sigmas.reserve(state.candidates.size());
    double max_sigma = 0.0;
    for (int a : state.candidates) {
      sigmas.push_back(std::sqrt(state.stats[a].variance()));
      max_sigma = std::max(max_sigma, sigmas.back());
    }
    if (max_sigma <= 0.0) {
      // Degenerate pilot (every survivor sampled constant): fall back to a
      // uniform split, mirroring the all-clipped fallback below.
      weights.assign(state.candidates.size(),
                     1.0 / static_cast<double>(state.candidates.size()));
    } else {
      weights = ideal_ratio(sigmas);
    }
  }

  std::vector<double> cand_probs =
      stage2_probs(weights, config.split_ratio, k);
  state.probs.assign(k, 0.0);
  for (std::size_t i = 0; i < state.candidates.size(); ++i) {
    state.probs[state.candidates[i]] = cand_probs[i];
  }

  // Stage 2: draw arms i.i.d. from the fixed probabilities for the
  // remaining T - K*n1 rounds. The categorical draw is an in-repo inverse
  // CDF so the sample stream does not depend on a library's algorithm.
  state.phase = Phase::kStage2;
  std::vector<double> cum(cand_probs.size());
  std::partial_sum(cand_probs.begin(), cand_probs.end(), cum.begin());
  cum.back() = 1.0;
  const std::int64_t remaining = config.budget - n1 * k;
  for (std::int64_t t = 0; t < remaining; ++t) {
    double u = rng.uniform();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    int a = state.candidates[static_cast<std::size_t>(it - cum.begin())];
    state.stats[a].add(instance.arms[a].sample(rng));
    ++counts[a];
  }

  state.phase = Phase::kDone;
  int chosen = empirical_best(state.stats);
  auto candidate_count = static_cast<int>(state.candidates.size());
  if (state_out) *state_out = std::move(state);
  return finalize(instance, chosen, std::move(counts), candidate_count);
}

std::vector<std::int64_t> baseline_counts(BaselineKind kind,
                                          const BanditInstance& instance,
                                          std::int64_t budget) {
  const int k = instance.num_arms();
  if (budget < k) {
    throw std::invalid_argument("budget T must cover at least one pull per arm");
  }
  std::vector<std::int64_t> counts(k, 0);
  if (kind == BaselineKind::kUniformEba) {
    std::int64_t base = budget / k;
    std::int64_t extra = budget % k;
    for (int a = 0; a < k; ++a) counts[a] = base + (a < extra ? 1 : 0);
    return counts;
  }
  // Oracle Neyman split: floor(T * sigma_a / sum sigma), remainder to the
  // largest fractional parts (lowest index on ties).
  std::vector<double> sigmas(k);
  double total_sigma = 0.0;
  for (int a = 0; a < k; ++a) {
    sigmas[a] = std::sqrt(instance.arms[a].variance());
    total_sigma += sigmas[a];
  }
  if (total_sigma <= 0.0) {
    throw std::invalid_argument("oracle split needs a positive dispersion");
  }
  std::vector<double> fractions(k);
  std::int64_t assigned = 0;
  for (int a = 0; a < k; ++a) {
    double ideal = static_cast<double>(budget) * sigmas[a] / total_sigma;
    counts[a] = static_cast<std::int64_t>(std::floor(ideal));
    fractions[a] = ideal - static_cast<double>(counts[a]);
    assigned += counts[a];
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return fractions[a] > fractions[b];  // stable: lowest index wins ties
  });
  for (std::int64_t i = 0; i < budget - assigned; ++i) {
    ++counts[order[static_cast<std::size_t>(i) % order.size()]];
  }
  return counts;
}

RunResult run_baseline(BaselineKind kind, const BanditInstance& instance,
                       std::int64_t budget, Rng& rng) {
  auto counts = baseline_counts(kind, instance, budget);
  std::vector<ArmStats> stats(instance.num_arms());
  for (int a = 0; a < instance.num_arms(); ++a) {
    for (std::int64_t i = 0; i < counts[a]; ++i) {
      stats[a].add(instance.arms[a].sample(rng));
    }
  }
  return finalize(instance, empirical_best(stats), std::move(counts),
                  instance.num_arms());
}

}  // namespace bailab
