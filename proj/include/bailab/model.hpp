#pragma once

#include <cstddef>
#include <vector>

#include "bailab/rng.hpp"

namespace bailab {

// Closed interval of admissible means. Bernoulli instances additionally
// require the interval to sit strictly inside (0, 1) so the Fisher
// information stays finite.
struct ParamSpace {
  double lo;
  double hi;
};

// Default mean range for Bernoulli arms.
inline constexpr ParamSpace kBernoulliDefaultSpace{0.05, 0.95};

enum class Family { kGaussianKnownVar, kBernoulli };

// One-parameter outcome distribution for a single arm: either a Gaussian
// with known variance (the mean is the parameter) or a Bernoulli. The
// variance function sigma^2(mu) and Fisher information I(mu) = 1/sigma^2(mu)
// follow from the family.
class ArmModel {
 public:
  static ArmModel gaussian(double mean, double sigma2);
  static ArmModel bernoulli(double mean);

  Family family() const { return family_; }
  double mean() const { return mean_; }

  // sigma^2 at this arm's mean.
  double variance() const;
  // sigma^2 at an arbitrary parameter value (mean-independent for the
  // known-variance Gaussian, mu(1-mu) for Bernoulli).
  double variance_at(double mu) const;
  // Fisher information 1/sigma^2(mean).
  double fisher_info() const;

  // One outcome draw from an externally owned stream.
  double sample(Rng& rng) const;

 private:
  ArmModel(Family family, double mean, double gaussian_sigma2)
      : family_(family), mean_(mean), gaussian_sigma2_(gaussian_sigma2) {}

  Family family_;
  double mean_;
  double gaussian_sigma2_;  // used only by kGaussianKnownVar
};

// KL divergence KL(p || q) between two arms of the same family. For the
// known-variance Gaussian family both arms must share sigma^2.
double kl_divergence(const ArmModel& p, const ArmModel& q);

// A K-armed instance: the arms plus the mean space they were validated
// against. Best arm = lowest index attaining the maximum mean.
struct BanditInstance {
  std::vector<ArmModel> arms;
  ParamSpace space;

  BanditInstance(std::vector<ArmModel> arms_in, ParamSpace space_in);

  int num_arms() const { return static_cast<int>(arms.size()); }
  int best_arm() const;
  double best_mean() const;
  // Mean gap of arm a: best_mean() - arms[a].mean() (0 for every optimal arm).
  double gap(int a) const;
};

// Convenience builders. Gaussian: per-arm standard deviations; the default
// space is the hull of the means padded by 1. Bernoulli: means must lie in
// the (strictly interior) space.
BanditInstance make_gaussian_instance(const std::vector<double>& means,
                                      const std::vector<double>& sigmas);
BanditInstance make_gaussian_instance(const std::vector<double>& means,
                                      const std::vector<double>& sigmas,
                                      ParamSpace space);
BanditInstance make_bernoulli_instance(const std::vector<double>& means,
                                       ParamSpace space = kBernoulliDefaultSpace);

}  // namespace bailab
