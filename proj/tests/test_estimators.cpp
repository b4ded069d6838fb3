#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bailab/estimators.hpp"
#include "bailab/rng.hpp"

using namespace bailab;

TEST_CASE("streaming accumulator hand cases") {
  ArmStats s;
  s.add(5.0);
  CHECK(s.count == 1);
  CHECK(s.mean == 5.0);
  CHECK_THROWS_AS(s.variance(), std::invalid_argument);

  ArmStats t;
  t.add(1.0);
  t.add(3.0);
  CHECK(t.mean == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(t.variance() == doctest::Approx(2.0).epsilon(1e-15));

  ArmStats c;
  for (int i = 0; i < 4; ++i) c.add(2.0);
  CHECK(c.variance() == 0.0);

  ArmStats b;  // Bernoulli pair {0, 1}
  b.add(0.0);
  b.add(1.0);
  CHECK(b.variance() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("one-pass statistics equal two-pass statistics") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 100 + static_cast<int>(rng.uniform() * 9900);
    // A large offset makes naive sum-of-squares accumulation collapse; the
    // one-pass recurrence must not care.
    const double offset = trial % 2 == 0 ? 1e6 : 0.0;
    std::vector<double> ys(static_cast<std::size_t>(n));
    ArmStats s;
    for (double& y : ys) {
      y = offset + rng.gaussian();
      s.add(y);
    }
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= n;
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    const double var = ss / (n - 1);
    CHECK(s.mean == doctest::Approx(mean).epsilon(1e-10));
    CHECK(s.variance() == doctest::Approx(var).epsilon(1e-10));
  }
}

namespace {

ArmStats synthetic(std::int64_t count, double mean, double variance) {
  ArmStats s;
  s.count = count;
  s.mean = mean;
  s.m2 = variance * static_cast<double>(count - 1);
  return s;
}

}  // namespace

TEST_CASE("confidence radius reproduces the closed-form value") {
  // K=2, T=10000, r=0.2 (so 1000 pilot pulls per arm), max sigma_hat = 1:
  // radius = sqrt(2 * ln(10000) / 2000) = 0.09597051824376163.
  std::vector<ArmStats> stats{synthetic(1000, 0.5, 1.0),
                              synthetic(1000, 0.1, 0.4)};
  const ConfBounds cb = conf_bounds(stats, 10000, 0.2);
  CHECK(cb.radius == doctest::Approx(0.09597051824376163).epsilon(1e-12));
  for (std::size_t a = 0; a < stats.size(); ++a) {
    CHECK(cb.upper[a] - cb.lower[a] ==
          doctest::Approx(2.0 * cb.radius).epsilon(1e-15));
    CHECK(cb.lower[a] <= stats[a].mean);
    CHECK(cb.upper[a] >= stats[a].mean);
  }
  // Doubling the multiplier doubles the radius.
  CHECK(conf_bounds(stats, 10000, 0.2, 2.0).radius ==
        doctest::Approx(2.0 * cb.radius).epsilon(1e-14));
}

TEST_CASE("zero dispersion collapses the bounds onto the means") {
  std::vector<ArmStats> stats{synthetic(50, 0.3, 0.0),
                              synthetic(50, -0.2, 0.0)};
  const ConfBounds cb = conf_bounds(stats, 200, 0.5);
  CHECK(cb.radius == 0.0);
  CHECK(cb.lower[0] == 0.3);
  CHECK(cb.upper[0] == 0.3);
  CHECK(cb.lower[1] == -0.2);
  CHECK(cb.upper[1] == -0.2);
}

TEST_CASE("confidence bounds validate their inputs") {
  // Unequal pilot counts across arms.
  std::vector<ArmStats> uneven{synthetic(100, 0.0, 1.0),
                               synthetic(99, 0.0, 1.0)};
  CHECK_THROWS_AS(conf_bounds(uneven, 1000, 0.2), std::invalid_argument);

  // A single observation cannot produce a variance estimate.
  std::vector<ArmStats> tiny{synthetic(1, 0.0, 0.0), synthetic(1, 0.0, 0.0)};
  CHECK_THROWS_AS(conf_bounds(tiny, 10, 0.2), std::invalid_argument);

  // The split ratio must agree with the observed pilot total.
  std::vector<ArmStats> stats{synthetic(1000, 0.0, 1.0),
                              synthetic(1000, 0.0, 1.0)};
  CHECK_THROWS_AS(conf_bounds(stats, 10000, 0.3), std::invalid_argument);

  // Degenerate multiplier.
  CHECK_THROWS_AS(conf_bounds(stats, 10000, 0.2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(conf_bounds(stats, 10000, 0.2, -1.0), std::invalid_argument);

  // No arms at all.
  std::vector<ArmStats> empty;
  CHECK_THROWS_AS(conf_bounds(empty, 10, 0.2), std::invalid_argument);
}

TEST_CASE("pilot bands cover the true means with near-one frequency") {
  // Gaussian arms, T=2000, r=0.5, K=4: the event {all true means inside
  // their bands} should miss with probability well under 2K/T^2 when the
  // radius multiplier is 2 (the wide, proof-side band; the default width-1
  // band does not reach this regime).
  const double means[4] = {0.3, 0.1, -0.2, 0.0};
  const double sds[4] = {1.0, 0.5, 2.0, 1.0};
  const std::int64_t budget = 2000;
  const int per_arm = 250;  // r*T/K
  const int reps = 100000;
  int misses = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(mix_seed(515, static_cast<std::uint64_t>(rep), 5));
    std::vector<ArmStats> stats(4);
    for (int a = 0; a < 4; ++a) {
      for (int i = 0; i < per_arm; ++i) {
        stats[static_cast<std::size_t>(a)].add(means[a] +
                                               sds[a] * rng.gaussian());
      }
    }
    const ConfBounds cb = conf_bounds(stats, budget, 0.5, 2.0);
    for (int a = 0; a < 4; ++a) {
      if (means[a] < cb.lower[static_cast<std::size_t>(a)] ||
          means[a] > cb.upper[static_cast<std::size_t>(a)]) {
        ++misses;
        break;
      }
    }
  }
  const double coverage = 1.0 - static_cast<double>(misses) / reps;
  const double target = 1.0 - 8.0 / (2000.0 * 2000.0);  // 1 - 2K/T^2
  const double mc_sigma =
      std::sqrt(coverage * (1.0 - coverage) / static_cast<double>(reps));
  CHECK(coverage >= target - 3.0 * mc_sigma);
  CHECK(coverage >= 0.999);
}
