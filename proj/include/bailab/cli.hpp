#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bailab/bounds.hpp"
#include "bailab/harness.hpp"
#include "bailab/model.hpp"
#include "bailab/policy.hpp"

namespace bailab {

enum class Command { kSimulate, kScan, kBayes, kBounds, kKlCheck };
enum class OutputFormat { kCsv, kJsonl };

// Fully validated run description assembled from a JSON config file plus
// command-line overrides. Every numeric field is checked against the
// preconditions of the module that will consume it before any work starts;
// unknown or out-of-place config keys are rejected.
struct RunConfig {
  Command command = Command::kSimulate;
  std::string policy = "ts_eba";  // ts_eba | uniform_eba | oracle_neyman_eba
  Family family = Family::kGaussianKnownVar;
  std::vector<double> means;   // simulate: one per arm
  std::vector<double> sigmas;  // Gaussian families: one per arm
  std::optional<ParamSpace> space;
  int num_arms = 0;
  std::int64_t budget = 0;        // config key "T"
  double split_ratio = 0.2;       // config key "r"
  double radius_mult = 1.0;
  Variant variant = Variant::kVarianceBased;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  std::string output_path;  // empty = stdout
  OutputFormat format = OutputFormat::kCsv;
  // scan
  std::vector<double> gaps;
  // bayes (and the optional prior block of bounds)
  std::optional<PriorSpec> prior;
  std::int64_t prior_draws = 0;
  std::int64_t reps_per_draw = 0;
  std::int64_t bound_draws = 200000;  // MC draws for the average-case constants
  // kl-check
  double kl_mu = 0.5;
  double kl_sigma = 1.0;
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
};

// Parses and validates a JSON config document for the given subcommand.
// Defaults: r=0.2, radius_mult=1, format=csv, variant=variance_based,
// policy=ts_eba. A "command" key is optional but must match the subcommand.
// Malformed documents raise a parse error carrying the line number;
// validation failures name the offending field.
RunConfig parse_config(const std::string& text, Command command);

// Rows computed by the kl-check command: ratio = KL(mu, mu+eps)/eps^2,
// fisher_half = I(mu)/2, rel_err = |ratio - fisher_half| / fisher_half.
struct KlCheckRow {
  double epsilon = 0.0;
  double kl = 0.0;
  double ratio = 0.0;
  double fisher_half = 0.0;
  double rel_err = 0.0;
};

// What the bayes command reports: the simulated T-scaled average-case regret
// next to the closed-form constants; within_bound means
// t_scaled_mean <= upper_constant + 3 * t_scaled_se.
struct BayesCliReport {
  BayesEvalResult eval;
  BayesBoundReport bound;
  bool within_bound = false;
};

// Renderers. Column orders are fixed (see README); numbers carry 9
// significant digits; every rendering ends with a newline. The JSONL form
// is one object per CSV row with identical field names.
std::string format_simulate(const AggregateStats& stats, OutputFormat format);
std::string format_scan(const ScanReport& report, OutputFormat format);
std::string format_bounds(const BoundReport& report,
                          const std::optional<BayesBoundReport>& bayes,
                          OutputFormat format);
std::string format_bayes(const BayesCliReport& report, OutputFormat format);
std::string format_kl(const std::vector<KlCheckRow>& rows,
                      OutputFormat format);

// Round-trip parsers for the CSV renderings (values at 9-digit fidelity).
// parse_scan_csv recomputes argmax_gap from the rows, mirroring the scan
// itself (first row attaining the maximum scaled regret).
AggregateStats parse_simulate_csv(const std::string& text);
ScanReport parse_scan_csv(const std::string& text);
BoundReport parse_bounds_csv(const std::string& text,
                             std::optional<BayesBoundReport>* bayes = nullptr);
BayesCliReport parse_bayes_csv(const std::string& text);
std::vector<KlCheckRow> parse_kl_csv(const std::string& text);

// Writes a rendering to the output path, or to stdout when the path is
// empty. Throws std::runtime_error on an unwritable path.
void write_output(const std::string& rendered, const std::string& path);

// Executes a validated config end to end (simulation, rendering, output).
// Throws on execution failures; precondition failures cannot occur here
// because parse_config already vetted the fields.
void run_command(const RunConfig& config);

// Full command-line entry point. Exit codes: 0 success, 2 for option or
// config errors, 3 for execution errors.
int cli_main(int argc, const char* const* argv);

}  // namespace bailab
