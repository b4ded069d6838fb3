#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bailab/estimators.hpp"
#include "bailab/model.hpp"
#include "bailab/rng.hpp"

namespace bailab {

// How Stage-2 target weights are formed over the surviving candidate set:
// from the estimated dispersions (standard-deviation-proportional for two
// survivors, variance-proportional for three or more), or uniformly (the
// Bernoulli-oriented variant).
enum class Variant { kVarianceBased, kUniformOnCandidates };

// Configuration of the two-stage design: total budget T, pilot split ratio
// r in (0,1) — Stage 1 pulls each of the K arms rT/K times — the Stage-2
// weighting variant, and the confidence-radius multiplier.
struct TsEbaConfig {
  std::int64_t budget = 0;      // T
  double split_ratio = 0.2;     // r
  int num_arms = 0;             // K
  Variant variant = Variant::kVarianceBased;
  double radius_mult = 1.0;

  // Pilot pulls per arm, n1 = rT/K. Throws unless rT/K is an integer >= 2
  // (within 1e-6 relative tolerance) and the other fields are in range.
  std::int64_t pilot_per_arm() const;
  void validate() const { (void)pilot_per_arm(); }
};

enum class Phase { kStage1, kStage2, kDone };

// Full internal state of one run, exposed for inspection and tests: the
// per-arm accumulators, the surviving candidate set, the Stage-2 sampling
// probabilities (length K, zero off the candidate set), and the early
// winner when Stage 1 already isolated a single candidate.
struct PolicyState {
  Phase phase = Phase::kStage1;
  std::vector<ArmStats> stats;
  std::vector<int> candidates;
  std::vector<double> probs;
  std::optional<int> early_winner;
};

// Outcome of one complete run. counts sum to T, or to rT when Stage 1
// already isolated a single candidate (the remaining budget is forfeited;
// candidate_size == 1 marks that early stop).
struct RunResult {
  int chosen = 0;
  std::vector<std::int64_t> counts;
  double regret = 0.0;
  bool misidentified = false;
  int candidate_size = 0;
};

// Candidate set after Stage 1: arms whose upper confidence bound reaches the
// best lower bound, {a : upper[a] >= max_b lower[b]}. Returned sorted; never
// empty (it contains every arm with the largest pilot mean).
std::vector<int> candidate_set(const ConfBounds& bounds);

// Ideal sampling ratio over a candidate set from the (estimated) standard
// deviations: proportional to sigma_a for exactly two candidates, to
// sigma_a^2 for three or more. Requires >= 2 candidates, nonnegative sigmas,
// and at least one positive sigma.
std::vector<double> ideal_ratio(const std::vector<double>& sigmas);

// Stage-2 sampling probabilities over the candidate set: clip the ideal
// weights by the Stage-1 share already spent per arm,
//   p_a = max(w_a - r/K, 0),
// then renormalize to sum 1. If every weight clips to zero, falls back to
// uniform over the candidates. K is the total arm count, not the candidate
// count.
std::vector<double> stage2_probs(const std::vector<double>& weights,
                                 double split_ratio, int num_arms);

// Whether the split ratio is small enough for the design's nominal-regime
// guarantees at the true dispersions: r/K <= min_a sigma_a / sum sigma for
// K = 2, r/K <= min_a sigma_a^2 / sum sigma^2 for K >= 3. Informational —
// the design itself is well defined either way, so callers warn, not error.
bool side_condition_ok(const std::vector<double>& sigmas, double split_ratio);

// One full run of the two-stage design against an instance, using a single
// externally seeded stream. Deterministic: identical (config, instance,
// seed) give an identical RunResult. The final recommendation is the
// largest sample mean over all K arms (lowest index on ties).
RunResult run(const TsEbaConfig& config, const BanditInstance& instance,
              Rng& rng, PolicyState* state_out = nullptr);

enum class BaselineKind { kUniformEba, kOracleNeymanEba };

// Non-adaptive reference designs with the same recommendation rule.
// kUniformEba splits T evenly with the first T mod K arms taking one extra
// pull; kOracleNeymanEba allocates floor(T * sigma_a / sum sigma) using the
// true dispersions and distributes the remainder by largest fractional part
// (lowest index on ties).
RunResult run_baseline(BaselineKind kind, const BanditInstance& instance,
                       std::int64_t budget, Rng& rng);

// The deterministic pull counts used by run_baseline.
std::vector<std::int64_t> baseline_counts(BaselineKind kind,
                                          const BanditInstance& instance,
                                          std::int64_t budget);

}  // namespace bailab
