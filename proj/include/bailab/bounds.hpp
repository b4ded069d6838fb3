#pragma once

#include <cstdint>
#include <vector>

#include "bailab/model.hpp"

namespace bailab {

// Exact standard normal CDF via erfc.
double normal_cdf(double z);

enum class Regime { kTwoArm, kMultiArm };

// Worst-case (scaled) regret constant and the gap attaining it at a given
// budget, evaluated at caller-supplied per-arm dispersions:
//   K = 2: constant (sigma1+sigma2)/sqrt(e),        worst gap (sigma1+sigma2)/sqrt(T)
//   K >= 3: constant 2*(1+(K-1)/K)*sqrt(sum sigma^2 * ln K),
//           worst gap sqrt(2*V*lnK/T) with V = 2*sum sigma^2
struct BoundReport {
  double minimax_constant = 0.0;
  double worst_gap = 0.0;
  Regime regime = Regime::kTwoArm;
  bool side_condition_ok = false;
};

double minimax_constant(int num_arms, const std::vector<double>& sigmas);
double worst_gap(int num_arms, const std::vector<double>& sigmas,
                 std::int64_t budget);
BoundReport bound_report(int num_arms, const std::vector<double>& sigmas,
                         std::int64_t budget, double split_ratio);

// Independent uniform prior on [lo, hi] for every arm mean.
struct PriorSpec {
  double lo = 0.0;
  double hi = 1.0;
};

// Average-case (T-scaled) regret constants under a uniform product prior:
//   lower_constant = 4 * sum_a E[ sigma^2(best of the other K-1 means) * h ]
// with h the per-coordinate prior density, estimated by Monte Carlo over
// prior draws; upper_constant = lower_constant / (1 - (K-2)*r/K); mc_sigma
// is the standard error of the lower-constant estimate.
struct BayesBoundReport {
  double lower_constant = 0.0;
  double upper_constant = 0.0;
  double mc_sigma = 0.0;
};

// family_arms supplies each arm's variance function: use gaussian arms for
// per-arm known sigma (their means are ignored) or bernoulli arms for the
// mu(1-mu) profile. Requires lo < hi and, for Bernoulli, a prior strictly
// inside (0, 1).
BayesBoundReport bayes_constants(const std::vector<ArmModel>& family_arms,
                                 PriorSpec prior, double split_ratio,
                                 std::int64_t draws, std::uint64_t seed);

// Normal-approximation oracle for the duel between the best arm and one
// challenger at the given mean gap, when sampling proportions are
// (w_best, w_other): the misidentification probability Phi(-z) with
// z = sqrt(T)*gap/sqrt(V), V = sigma_best^2/w_best + sigma_other^2/w_other,
// and the Chernoff envelope exp(-T*gap^2/(2V)) that dominates it.
struct MisidOracle {
  double phi_prob = 0.0;
  double envelope = 0.0;
};

MisidOracle misid_normal_oracle(double gap, double sigma_best,
                                double sigma_other, double w_best,
                                double w_other, std::int64_t budget);

}  // namespace bailab
