#include "bailab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "bailab/rng.hpp"

namespace bailab {
namespace {

// Stream tags keep the replication streams and the prior-draw streams
// disjoint even under the same base seed.
constexpr std::uint64_t kRunTag = 0;
constexpr std::uint64_t kPriorTag = 1;
constexpr std::uint64_t kScanRowTag = 2;

// Pairwise (cascade) summation: the reduction tree depends only on n, so
// sums are reproducible and the rounding error stays O(log n) in the worst
// case instead of O(n).
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

RunResult run_one(const PolicySpec& policy, const BanditInstance& instance,
                  Rng& rng) {
  return std::visit(
      [&](const auto& cfg) -> RunResult {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, TsEbaConfig>) {
          return run(cfg, instance, rng);
        } else if constexpr (std::is_same_v<T, UniformEbaConfig>) {
          return run_baseline(BaselineKind::kUniformEba, instance, cfg.budget,
                              rng);
        } else {
          return run_baseline(BaselineKind::kOracleNeymanEba, instance,
                              cfg.budget, rng);
        }
      },
      policy);
}

// Runs fn(i) for i in [0, total) over a small thread pool. Work is handed
// out in chunks through an atomic cursor; since every i writes only its own
// slot, the outcome is independent of how the chunks land on threads.
template <typename Fn>
void parallel_reps(std::int64_t total, int workers, Fn&& fn) {
  if (total <= 0) return;
  const int n_workers =
      static_cast<int>(std::min<std::int64_t>(workers, total));
  if (n_workers <= 1) {
    for (std::int64_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  constexpr std::int64_t kChunk = 64;
  auto body = [&]() {
    for (;;) {
      const std::int64_t begin = cursor.fetch_add(kChunk);
      if (begin >= total) return;
      const std::int64_t end = std::min(begin + kChunk, total);
      try {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers) - 1);
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

AggregateStats aggregate(const std::vector<RunResult>& results,
                         std::int64_t budget, int num_arms) {
  const std::size_t n = results.size();
  const double dn = static_cast<double>(n);

  std::vector<double> regrets(n);
  for (std::size_t i = 0; i < n; ++i) regrets[i] = results[i].regret;

  AggregateStats out;
  out.mean_regret = pairwise_sum(regrets.data(), n) / dn;
  if (n >= 2) {
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = regrets[i] - out.mean_regret;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq.data(), n) / (dn - 1.0);
    out.regret_se = std::sqrt(var / dn);
  }

  std::int64_t misid = 0;
  std::int64_t early = 0;
  std::vector<std::int64_t> count_sums(static_cast<std::size_t>(num_arms), 0);
  std::vector<std::int64_t> chosen_counts(static_cast<std::size_t>(num_arms),
                                          0);
  for (const RunResult& r : results) {
    misid += r.misidentified ? 1 : 0;
    early += r.candidate_size == 1 ? 1 : 0;
    chosen_counts[static_cast<std::size_t>(r.chosen)] += 1;
    for (int a = 0; a < num_arms; ++a) {
      count_sums[static_cast<std::size_t>(a)] +=
          r.counts[static_cast<std::size_t>(a)];
    }
  }
  out.misid_rate = static_cast<double>(misid) / dn;
  if (n >= 2) {
    out.misid_se = std::sqrt(out.misid_rate * (1.0 - out.misid_rate) / dn);
  }
  out.early_stop_rate = static_cast<double>(early) / dn;
  out.mean_counts.resize(static_cast<std::size_t>(num_arms));
  out.choice_freq.resize(static_cast<std::size_t>(num_arms));
  for (int a = 0; a < num_arms; ++a) {
    out.mean_counts[static_cast<std::size_t>(a)] =
        static_cast<double>(count_sums[static_cast<std::size_t>(a)]) / dn;
    out.choice_freq[static_cast<std::size_t>(a)] =
        static_cast<double>(chosen_counts[static_cast<std::size_t>(a)]) / dn;
  }
  out.scaled_regret =
      std::sqrt(static_cast<double>(budget)) * out.mean_regret;
  return out;
}

BanditInstance make_scan_instance(Family family,
                                  const std::vector<double>& sigmas,
                                  int num_arms, double gap) {
  std::vector<double> means(static_cast<std::size_t>(num_arms));
  if (family == Family::kGaussianKnownVar) {
    means[0] = gap;
    for (int a = 1; a < num_arms; ++a) means[static_cast<std::size_t>(a)] = 0.0;
    return make_gaussian_instance(means, sigmas);
  }
  means[0] = 0.5 + gap / 2.0;
  for (int a = 1; a < num_arms; ++a) {
    means[static_cast<std::size_t>(a)] = 0.5 - gap / 2.0;
  }
  return make_bernoulli_instance(means);
}

}  // namespace

std::int64_t policy_budget(const PolicySpec& policy) {
  return std::visit([](const auto& cfg) { return cfg.budget; }, policy);
}

int policy_num_arms(const PolicySpec& policy) {
  return std::visit([](const auto& cfg) { return cfg.num_arms; }, policy);
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BAILAB_WORKERS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed > 0 && parsed <= 4096) {
      return static_cast<int>(parsed);
    }
    throw std::invalid_argument(
        std::string("BAILAB_WORKERS must be a positive integer, got \"") +
        env + "\"");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

AggregateStats simulate(const SimPlan& plan, int workers) {
  if (plan.reps < 1) {
    throw std::invalid_argument("simulation needs at least one replication");
  }
  const int num_arms = policy_num_arms(plan.policy);
  if (num_arms != plan.instance.num_arms()) {
    throw std::invalid_argument(
        "policy is configured for " + std::to_string(num_arms) +
        " arms but the instance has " +
        std::to_string(plan.instance.num_arms()));
  }
  if (const TsEbaConfig* cfg = std::get_if<TsEbaConfig>(&plan.policy)) {
    cfg->validate();
  }
  const int n_workers = resolve_workers(workers);
  std::vector<RunResult> results(static_cast<std::size_t>(plan.reps));
  parallel_reps(plan.reps, n_workers, [&](std::int64_t i) {
    Rng rng(mix_seed(plan.base_seed, static_cast<std::uint64_t>(i), kRunTag));
    results[static_cast<std::size_t>(i)] =
        run_one(plan.policy, plan.instance, rng);
  });
  return aggregate(results, policy_budget(plan.policy), num_arms);
}

std::vector<double> sup_sigmas(const BanditInstance& instance) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(instance.num_arms()));
  for (int a = 0; a < instance.num_arms(); ++a) {
    const ArmModel& arm = instance.arms[static_cast<std::size_t>(a)];
    if (arm.family() == Family::kGaussianKnownVar) {
      out.push_back(std::sqrt(arm.variance()));
    } else {
      const double mu =
          std::clamp(0.5, instance.space.lo, instance.space.hi);
      out.push_back(std::sqrt(arm.variance_at(mu)));
    }
  }
  return out;
}

ScanReport worst_case_scan(const PolicySpec& policy, Family family,
                           const std::vector<double>& sigmas,
                           const std::vector<double>& gap_grid,
                           std::int64_t reps, std::uint64_t base_seed,
                           int workers) {
  if (gap_grid.empty()) {
    throw std::invalid_argument("scan needs a non-empty gap grid");
  }
  for (double g : gap_grid) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw std::invalid_argument("scan gaps must be positive and finite");
    }
  }
  const int num_arms = policy_num_arms(policy);
  if (family == Family::kGaussianKnownVar &&
      static_cast<int>(sigmas.size()) != num_arms) {
    throw std::invalid_argument(
        "scan needs one sigma per arm for Gaussian families");
  }

  ScanReport report;
  report.grid.reserve(gap_grid.size());
  double max_scaled_se = 0.0;
  const double sqrt_budget =
      std::sqrt(static_cast<double>(policy_budget(policy)));
  for (std::size_t j = 0; j < gap_grid.size(); ++j) {
    SimPlan plan{policy,
                 make_scan_instance(family, sigmas, num_arms, gap_grid[j]),
                 reps,
                 mix_seed(base_seed, static_cast<std::uint64_t>(j),
                          kScanRowTag)};
    ScanRow row{gap_grid[j], simulate(plan, workers)};
    max_scaled_se = std::max(max_scaled_se, sqrt_budget * row.stats.regret_se);
    report.grid.push_back(std::move(row));
  }

  const ScanRow* best = &report.grid[0];
  for (const ScanRow& row : report.grid) {
    if (row.stats.scaled_regret > best->stats.scaled_regret) best = &row;
  }
  report.sup_scaled_regret = best->stats.scaled_regret;
  report.argmax_gap = best->gap;
  report.bound_constant = minimax_constant(
      num_arms,
      sup_sigmas(make_scan_instance(family, sigmas, num_arms, gap_grid[0])));
  report.within_bound =
      report.sup_scaled_regret <= report.bound_constant + 3.0 * max_scaled_se;
  return report;
}

BayesEvalResult bayes_eval(const PolicySpec& policy, Family family,
                           const std::vector<double>& sigmas, PriorSpec prior,
                           std::int64_t prior_draws, std::int64_t reps_per_draw,
                           std::uint64_t base_seed, int workers) {
  if (!(prior.lo <= prior.hi) || !std::isfinite(prior.lo) ||
      !std::isfinite(prior.hi)) {
    throw std::invalid_argument("prior interval must satisfy lo <= hi");
  }
  if (prior_draws < 1 || reps_per_draw < 1) {
    throw std::invalid_argument(
        "bayes evaluation needs prior_draws >= 1 and reps_per_draw >= 1");
  }
  const int num_arms = policy_num_arms(policy);
  if (family == Family::kGaussianKnownVar &&
      static_cast<int>(sigmas.size()) != num_arms) {
    throw std::invalid_argument(
        "bayes evaluation needs one sigma per arm for Gaussian families");
  }
  if (family == Family::kBernoulli &&
      !(prior.lo > 0.0 && prior.hi < 1.0)) {
    throw std::invalid_argument(
        "Bernoulli arm means live in (0, 1); the prior interval must too");
  }

  // Draw the instances up front (their stream is tagged apart from the
  // replication streams), then run all draws * reps replications as one flat
  // index space so the result is independent of the worker count.
  std::vector<BanditInstance> instances;
  instances.reserve(static_cast<std::size_t>(prior_draws));
  for (std::int64_t d = 0; d < prior_draws; ++d) {
    Rng prior_rng(
        mix_seed(base_seed, static_cast<std::uint64_t>(d), kPriorTag));
    std::vector<double> means(static_cast<std::size_t>(num_arms));
    for (int a = 0; a < num_arms; ++a) {
      means[static_cast<std::size_t>(a)] =
          prior.lo + (prior.hi - prior.lo) * prior_rng.uniform();
    }
    if (family == Family::kGaussianKnownVar) {
      instances.push_back(make_gaussian_instance(means, sigmas));
    } else {
      ParamSpace space{std::min(prior.lo, kBernoulliDefaultSpace.lo),
                       std::max(prior.hi, kBernoulliDefaultSpace.hi)};
      instances.push_back(make_bernoulli_instance(means, space));
    }
  }
  if (const TsEbaConfig* cfg = std::get_if<TsEbaConfig>(&policy)) {
    cfg->validate();
  }

  const std::int64_t total = prior_draws * reps_per_draw;
  std::vector<double> regrets(static_cast<std::size_t>(total));
  const int n_workers = resolve_workers(workers);
  parallel_reps(total, n_workers, [&](std::int64_t g) {
    const std::int64_t d = g / reps_per_draw;
    Rng rng(mix_seed(base_seed, static_cast<std::uint64_t>(g), kRunTag));
    regrets[static_cast<std::size_t>(g)] =
        run_one(policy, instances[static_cast<std::size_t>(d)], rng).regret;
  });

  const double budget = static_cast<double>(policy_budget(policy));
  BayesEvalResult out;
  out.t_scaled_mean =
      budget * (pairwise_sum(regrets.data(), regrets.size()) /
                static_cast<double>(total));
  if (prior_draws >= 2) {
    std::vector<double> draw_means(static_cast<std::size_t>(prior_draws));
    for (std::int64_t d = 0; d < prior_draws; ++d) {
      draw_means[static_cast<std::size_t>(d)] =
          pairwise_sum(regrets.data() + d * reps_per_draw,
                       static_cast<std::size_t>(reps_per_draw)) /
          static_cast<double>(reps_per_draw);
    }
    const double grand =
        pairwise_sum(draw_means.data(), draw_means.size()) /
        static_cast<double>(prior_draws);
    std::vector<double> sq(static_cast<std::size_t>(prior_draws));
    for (std::int64_t d = 0; d < prior_draws; ++d) {
      const double dev = draw_means[static_cast<std::size_t>(d)] - grand;
      sq[static_cast<std::size_t>(d)] = dev * dev;
    }
    const double var = pairwise_sum(sq.data(), sq.size()) /
                       (static_cast<double>(prior_draws) - 1.0);
    out.t_scaled_se =
        budget * std::sqrt(var / static_cast<double>(prior_draws));
  }
  return out;
}

double regret_decomposition_check(const AggregateStats& stats,
                                  const BanditInstance& instance,
                                  const std::vector<double>& choice_freq) {
  const int num_arms = instance.num_arms();
  if (static_cast<int>(choice_freq.size()) != num_arms) {
    throw std::invalid_argument(
        "choice frequencies must have one entry per arm");
  }
  double total = 0.0;
  for (double f : choice_freq) {
    if (!std::isfinite(f) || f < 0.0) {
      throw std::invalid_argument(
          "choice frequencies must be finite and non-negative");
    }
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "choice frequencies must sum to 1, got " + std::to_string(total));
  }
  double predicted = 0.0;
  for (int a = 0; a < num_arms; ++a) {
    predicted += instance.gap(a) * choice_freq[static_cast<std::size_t>(a)];
  }
  return std::abs(stats.mean_regret - predicted);
}

}  // namespace bailab
