#include "bailab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bailab {

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace

ArmModel ArmModel::gaussian(double mean, double sigma2) {
  check_finite(mean, "gaussian mean");
  check_finite(sigma2, "gaussian variance");
  if (sigma2 <= 0.0) {
    throw std::invalid_argument("gaussian variance must be > 0, got " +
                                std::to_string(sigma2));
  }
  return ArmModel(Family::kGaussianKnownVar, mean, sigma2);
}

ArmModel ArmModel::bernoulli(double mean) {
  check_finite(mean, "bernoulli mean");
  if (mean <= 0.0 || mean >= 1.0) {
    throw std::invalid_argument("bernoulli mean must lie in (0, 1), got " +
                                std::to_string(mean));
  }
  return ArmModel(Family::kBernoulli, mean, 0.0);
}

double ArmModel::variance() const { return variance_at(mean_); }

double ArmModel::variance_at(double mu) const {
  switch (family_) {
    case Family::kGaussianKnownVar:
      return gaussian_sigma2_;
    case Family::kBernoulli:
      return mu * (1.0 - mu);
  }
  return 0.0;  // unreachable
}

double ArmModel::fisher_info() const { return 1.0 / variance(); }

double ArmModel::sample(Rng& rng) const {
  switch (family_) {
    case Family::kGaussianKnownVar:
      return mean_ + std::sqrt(gaussian_sigma2_) * rng.gaussian();
    case Family::kBernoulli:
      return rng.uniform() < mean_ ? 1.0 : 0.0;
  }
  return 0.0;  // unreachable
}

double kl_divergence(const ArmModel& p, const ArmModel& q) {
  if (p.family() != q.family()) {
    throw std::invalid_argument("kl_divergence requires arms of one family");
  }
  switch (p.family()) {
    case Family::kGaussianKnownVar: {
      if (p.variance() != q.variance()) {
        throw std::invalid_argument(
            "kl_divergence for known-variance gaussians requires equal "
            "variances");
      }
      double d = p.mean() - q.mean();
      return d * d / (2.0 * p.variance());
    }
    case Family::kBernoulli: {
      double a = p.mean();
      double b = q.mean();
      return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
    }
  }
  return 0.0;  // unreachable
}

BanditInstance::BanditInstance(std::vector<ArmModel> arms_in,
                               ParamSpace space_in)
    : arms(std::move(arms_in)), space(space_in) {
  if (arms.size() < 2) {
    throw std::invalid_argument("an instance needs at least 2 arms");
  }
  check_finite(space.lo, "space.lo");
  check_finite(space.hi, "space.hi");
  if (!(space.lo < space.hi)) {
    throw std::invalid_argument("parameter space needs lo < hi");
  }
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (arms[a].family() == Family::kBernoulli &&
        (space.lo <= 0.0 || space.hi >= 1.0)) {
      throw std::invalid_argument(
          "bernoulli parameter space must sit strictly inside (0, 1)");
    }
    if (arms[a].mean() < space.lo || arms[a].mean() > space.hi) {
      throw std::invalid_argument(
          "arm " + std::to_string(a + 1) + " mean " +
          std::to_string(arms[a].mean()) + " outside parameter space [" +
          std::to_string(space.lo) + ", " + std::to_string(space.hi) + "]");
    }
  }
}

int BanditInstance::best_arm() const {
  int best = 0;
  for (int a = 1; a < num_arms(); ++a) {
    if (arms[a].mean() > arms[best].mean()) best = a;  // ties keep lowest index
  }
  return best;
}

double BanditInstance::best_mean() const { return arms[best_arm()].mean(); }

double BanditInstance::gap(int a) const {
  return best_mean() - arms[a].mean();
}

namespace {

std::vector<ArmModel> gaussian_arms(const std::vector<double>& means,
                                    const std::vector<double>& sigmas) {
  if (means.size() != sigmas.size()) {
    throw std::invalid_argument("means and sigmas must have equal length");
  }
  std::vector<ArmModel> arms;
  arms.reserve(means.size());
  for (std::size_t a = 0; a < means.size(); ++a) {
    arms.push_back(ArmModel::gaussian(means[a], sigmas[a] * sigmas[a]));
  }
  return arms;
}

}  // namespace

BanditInstance make_gaussian_instance(const std::vector<double>& means,
                                      const std::vector<double>& sigmas) {
  if (means.empty()) throw std::invalid_argument("means must be nonempty");
  auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  return BanditInstance(gaussian_arms(means, sigmas),
                        ParamSpace{*lo - 1.0, *hi + 1.0});
}

BanditInstance make_gaussian_instance(const std::vector<double>& means,
                                      const std::vector<double>& sigmas,
                                      ParamSpace space) {
  return BanditInstance(gaussian_arms(means, sigmas), space);
}

BanditInstance make_bernoulli_instance(const std::vector<double>& means,
                                       ParamSpace space) {
  std::vector<ArmModel> arms;
  arms.reserve(means.size());
  for (double m : means) arms.push_back(ArmModel::bernoulli(m));
  return BanditInstance(std::move(arms), space);
}

}  // namespace bailab
