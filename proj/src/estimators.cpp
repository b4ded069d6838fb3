#include "bailab/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bailab {

double ArmStats::variance() const {
  if (count < 2) {
    throw std::invalid_argument(
        "sample variance needs at least 2 observations, have " +
        std::to_string(count));
  }
  return m2 / static_cast<double>(count - 1);
}

ConfBounds conf_bounds(const std::vector<ArmStats>& stats, std::int64_t budget,
                       double split_ratio, double radius_mult) {
  if (stats.empty()) {
    throw std::invalid_argument("conf_bounds needs at least one arm");
  }
  if (budget < 2) {
    throw std::invalid_argument("conf_bounds needs a budget >= 2");
  }
  if (!(radius_mult > 0.0)) {
    throw std::invalid_argument("radius_mult must be > 0");
  }
  auto num_arms = static_cast<std::int64_t>(stats.size());
  std::int64_t per_arm = stats[0].count;
  double max_sd = 0.0;
  for (const auto& s : stats) {
    if (s.count != per_arm) {
      throw std::invalid_argument(
          "conf_bounds expects a uniform pilot allocation (equal counts)");
    }
    max_sd = std::max(max_sd, std::sqrt(s.variance()));  // throws if count < 2
  }
  std::int64_t pilot_total = per_arm * num_arms;  // exact r*T
  double claimed = split_ratio * static_cast<double>(budget);
  if (std::abs(claimed - static_cast<double>(pilot_total)) >
      1e-6 * std::max<double>(1.0, static_cast<double>(pilot_total))) {
    throw std::invalid_argument(
        "split ratio r is inconsistent with the observed pilot counts: r*T = " +
        std::to_string(claimed) + " but counts sum to " +
        std::to_string(pilot_total));
  }

  double radius = radius_mult *
                  std::sqrt(static_cast<double>(num_arms) *
                            std::log(static_cast<double>(budget)) /
                            static_cast<double>(pilot_total)) *
                  max_sd;
  ConfBounds bounds;
  bounds.radius = radius;
  bounds.lower.reserve(stats.size());
  bounds.upper.reserve(stats.size());
  for (const auto& s : stats) {
    bounds.lower.push_back(s.mean - radius);
    bounds.upper.push_back(s.mean + radius);
  }
  return bounds;
}

}  // namespace bailab
