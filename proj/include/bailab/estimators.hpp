#pragma once

#include <cstdint>
#include <vector>

namespace bailab {

// One-pass (Welford) accumulator for a single arm's outcomes: count, running
// mean, and centered second moment m2 = sum (y_i - mean)^2.
struct ArmStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double y) {
    ++count;
    double delta = y - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (y - mean);
  }

  // Unbiased sample variance m2/(count-1); requires count >= 2.
  double variance() const;
};

// Symmetric confidence band around each arm's pilot-stage mean:
// lower[a] = mean_a - radius, upper[a] = mean_a + radius, with a radius
// shared across arms.
struct ConfBounds {
  std::vector<double> lower;
  std::vector<double> upper;
  double radius = 0.0;
};

// Pilot-stage confidence bounds for K arms after a uniform allocation of
// n1 = rT/K pulls per arm:
//
//   radius = radius_mult * sqrt(K * log(T) / (r*T)) * max_a sigma_hat_a
//
// with sigma_hat_a the sample standard deviation. r*T is taken as the exact
// pull total sum_a count_a (each arm must have the same count, >= 2), and r
// is cross-checked against it. radius_mult widens or narrows the band
// (e.g. sqrt(2) or 2) without changing its shape.
ConfBounds conf_bounds(const std::vector<ArmStats>& stats, std::int64_t budget,
                       double split_ratio, double radius_mult = 1.0);

}  // namespace bailab
