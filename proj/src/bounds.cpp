#include "bailab/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bailab/policy.hpp"
#include "bailab/rng.hpp"

namespace bailab {

namespace {

void check_sigmas(int num_arms, const std::vector<double>& sigmas) {
  if (num_arms < 2) {
    throw std::invalid_argument("bound constants need K >= 2");
  }
  if (static_cast<int>(sigmas.size()) != num_arms) {
    throw std::invalid_argument("need one sigma per arm");
  }
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("sigmas must be positive and finite");
    }
  }
}

double sum_sq(const std::vector<double>& sigmas) {
  double total = 0.0;
  for (double s : sigmas) total += s * s;
  return total;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double minimax_constant(int num_arms, const std::vector<double>& sigmas) {
  check_sigmas(num_arms, sigmas);
  if (num_arms == 2) {
    return (sigmas[0] + sigmas[1]) / std::sqrt(std::exp(1.0));
  }
  double k = static_cast<double>(num_arms);
  return 2.0 * (1.0 + (k - 1.0) / k) *
         std::sqrt(sum_sq(sigmas) * std::log(k));
}

double worst_gap(int num_arms, const std::vector<double>& sigmas,
                 std::int64_t budget) {
  check_sigmas(num_arms, sigmas);
  if (budget < 1) throw std::invalid_argument("worst_gap needs T >= 1");
  double t = static_cast<double>(budget);
  if (num_arms == 2) {
    return (sigmas[0] + sigmas[1]) / std::sqrt(t);
  }
  // V is the pairwise variance proxy 2*sum_c sigma_c^2 shared by every
  // (best, challenger) pair in the hardest instance.
  double v = 2.0 * sum_sq(sigmas);
  return std::sqrt(2.0 * v * std::log(static_cast<double>(num_arms)) / t);
}

BoundReport bound_report(int num_arms, const std::vector<double>& sigmas,
                         std::int64_t budget, double split_ratio) {
  BoundReport report;
  report.minimax_constant = minimax_constant(num_arms, sigmas);
  report.worst_gap = worst_gap(num_arms, sigmas, budget);
  report.regime = num_arms == 2 ? Regime::kTwoArm : Regime::kMultiArm;
  report.side_condition_ok = side_condition_ok(sigmas, split_ratio);
  return report;
}

BayesBoundReport bayes_constants(const std::vector<ArmModel>& family_arms,
                                 PriorSpec prior, double split_ratio,
                                 std::int64_t draws, std::uint64_t seed) {
  const int k = static_cast<int>(family_arms.size());
  if (k < 2) throw std::invalid_argument("bayes_constants needs K >= 2");
  if (!(prior.lo < prior.hi)) {
    throw std::invalid_argument(
        "bayes_constants needs a non-degenerate uniform prior (lo < hi)");
  }
  if (draws < 1) throw std::invalid_argument("bayes_constants needs draws >= 1");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw std::invalid_argument("split ratio r must lie in (0, 1)");
  }
  for (const auto& arm : family_arms) {
    if (arm.family() == Family::kBernoulli &&
        (prior.lo <= 0.0 || prior.hi >= 1.0)) {
      throw std::invalid_argument(
          "bernoulli prior must sit strictly inside (0, 1)");
    }
  }
  double prefactor_denom =
      1.0 - static_cast<double>(k - 2) * split_ratio / static_cast<double>(k);
  if (prefactor_denom <= 0.0) {
    throw std::invalid_argument(
        "split ratio too large: (K-2)*r/K must stay below 1");
  }

  // For each excluded arm a, integrate sigma^2 of the best remaining arm
  // against the prior density of that arm's mean: Monte Carlo over the K-1
  // remaining coordinates, integrand sigma_{b*}^2(mu_{b*}) * h with
  // h = 1/(hi-lo). Streaming mean/variance per excluded arm.
  const double density = 1.0 / (prior.hi - prior.lo);
  double lower_sum = 0.0;
  double var_sum = 0.0;
  std::vector<double> mu(k);
  for (int a = 0; a < k; ++a) {
    // Tag 11 keeps this stream family disjoint from the simulation
    // harness's tags even under a shared base seed.
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(a), /*tag=*/11));
    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t d = 0; d < draws; ++d) {
      int best = -1;
      for (int b = 0; b < k; ++b) {
        if (b == a) continue;
        mu[b] = prior.lo + (prior.hi - prior.lo) * rng.uniform();
        if (best < 0 || mu[b] > mu[best]) best = b;
      }
      double value = family_arms[best].variance_at(mu[best]) * density;
      double delta = value - mean;
      mean += delta / static_cast<double>(d + 1);
      m2 += delta * (value - mean);
    }
    lower_sum += mean;
    if (draws > 1) {
      var_sum += m2 / static_cast<double>(draws - 1) / static_cast<double>(draws);
    }
  }

  BayesBoundReport report;
  report.lower_constant = 4.0 * lower_sum;
  report.upper_constant = report.lower_constant / prefactor_denom;
  report.mc_sigma = 4.0 * std::sqrt(var_sum);
  return report;
}

MisidOracle misid_normal_oracle(double gap, double sigma_best,
                                double sigma_other, double w_best,
                                double w_other, std::int64_t budget) {
  if (!(gap >= 0.0)) throw std::invalid_argument("gap must be >= 0");
  if (!(sigma_best > 0.0 && sigma_other > 0.0)) {
    throw std::invalid_argument("sigmas must be positive");
  }
  if (!(w_best > 0.0 && w_other > 0.0)) {
    throw std::invalid_argument("sampling proportions must be positive");
  }
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  double v = sigma_best * sigma_best / w_best +
             sigma_other * sigma_other / w_other;
  double t = static_cast<double>(budget);
  MisidOracle oracle;
  oracle.phi_prob = normal_cdf(-std::sqrt(t) * gap / std::sqrt(v));
  oracle.envelope = std::exp(-t * gap * gap / (2.0 * v));
  return oracle;
}

}  // namespace bailab
