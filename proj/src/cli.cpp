#include "bailab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace bailab {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument(msg);
}

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  const std::size_t end = std::min(byte, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

const char* command_name(Command c) {
  switch (c) {
    case Command::kSimulate:
      return "simulate";
    case Command::kScan:
      return "scan";
    case Command::kBayes:
      return "bayes";
    case Command::kBounds:
      return "bounds";
    case Command::kKlCheck:
      return "kl-check";
  }
  return "?";
}

// ---- typed field extraction with named errors ----

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) {
    config_error("config field \"" + key + "\" must be a number");
  }
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9.0e15) {
      return static_cast<std::int64_t>(d);
    }
  }
  config_error("config field \"" + key + "\" must be an integer");
}

std::uint64_t as_seed(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && std::floor(d) == d && d < 9.0e15) {
      return static_cast<std::uint64_t>(d);
    }
  }
  config_error("config field \"" + key + "\" must be a nonnegative integer");
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) {
    config_error("config field \"" + key + "\" must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> as_number_array(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) {
    config_error("config field \"" + key +
                 "\" must be a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& item : v) {
    if (!item.is_number()) {
      config_error("config field \"" + key +
                   "\" must be a non-empty array of numbers");
    }
    out.push_back(item.get<double>());
  }
  return out;
}

// ---- key admissibility ----

const std::set<std::string>& allowed_keys(Command c) {
  static const std::set<std::string> kSimulate{
      "command", "policy",      "family", "means",  "sigmas",
      "space",   "T",           "r",      "variant", "radius_mult",
      "reps",    "seed",        "output", "format"};
  static const std::set<std::string> kScan{
      "command",       "policy",        "family",    "K",
      "sigmas",        "T",             "r",         "variant",
      "radius_mult",   "reps",          "seed",      "gaps",
      "gap_coeff_min", "gap_coeff_max", "gap_count", "output",
      "format"};
  static const std::set<std::string> kBayes{
      "command",     "policy",      "family",        "K",
      "sigmas",      "prior",       "T",             "r",
      "variant",     "radius_mult", "prior_draws",   "reps_per_draw",
      "bound_draws", "seed",        "output",        "format"};
  static const std::set<std::string> kBounds{
      "command", "family",      "K",    "sigmas", "T",
      "r",       "prior",       "bound_draws", "seed",   "output",
      "format"};
  static const std::set<std::string> kKl{"command", "family", "mu",
                                         "sigma",   "epsilons", "output",
                                         "format"};
  switch (c) {
    case Command::kSimulate:
      return kSimulate;
    case Command::kScan:
      return kScan;
    case Command::kBayes:
      return kBayes;
    case Command::kBounds:
      return kBounds;
    case Command::kKlCheck:
      return kKl;
  }
  return kSimulate;
}

bool key_known_anywhere(const std::string& key) {
  static const Command kAll[] = {Command::kSimulate, Command::kScan,
                                 Command::kBayes, Command::kBounds,
                                 Command::kKlCheck};
  for (Command c : kAll) {
    if (allowed_keys(c).count(key) > 0) return true;
  }
  return false;
}

void require_key(const json& j, const std::string& key) {
  if (!j.contains(key)) {
    config_error("missing required config key \"" + key + "\"");
  }
}

// ---- enum fields ----

Family parse_family(const std::string& s) {
  if (s == "gaussian") return Family::kGaussianKnownVar;
  if (s == "bernoulli") return Family::kBernoulli;
  config_error("config field \"family\" must be \"gaussian\" or \"bernoulli\"");
}

Variant parse_variant(const std::string& s) {
  if (s == "variance_based") return Variant::kVarianceBased;
  if (s == "uniform_on_candidates") return Variant::kUniformOnCandidates;
  config_error(
      "config field \"variant\" must be \"variance_based\" or "
      "\"uniform_on_candidates\"");
}

OutputFormat parse_format_name(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "jsonl") return OutputFormat::kJsonl;
  config_error("config field \"format\" must be \"csv\" or \"jsonl\"");
}

void check_policy_name(const std::string& s) {
  if (s != "ts_eba" && s != "uniform_eba" && s != "oracle_neyman_eba") {
    config_error(
        "config field \"policy\" must be one of \"ts_eba\", \"uniform_eba\", "
        "\"oracle_neyman_eba\"");
  }
}

// ---- pieces shared by parse_config and run_command ----

BanditInstance build_instance(const RunConfig& cfg) {
  if (cfg.family == Family::kGaussianKnownVar) {
    if (cfg.space) {
      return make_gaussian_instance(cfg.means, cfg.sigmas, *cfg.space);
    }
    return make_gaussian_instance(cfg.means, cfg.sigmas);
  }
  if (cfg.space) return make_bernoulli_instance(cfg.means, *cfg.space);
  return make_bernoulli_instance(cfg.means);
}

PolicySpec build_policy(const RunConfig& cfg) {
  if (cfg.policy == "uniform_eba") {
    return UniformEbaConfig{cfg.budget, cfg.num_arms};
  }
  if (cfg.policy == "oracle_neyman_eba") {
    return OracleNeymanEbaConfig{cfg.budget, cfg.num_arms};
  }
  return TsEbaConfig{cfg.budget, cfg.split_ratio, cfg.num_arms, cfg.variant,
                     cfg.radius_mult};
}

// Per-arm dispersions used for bound constants: the configured sigmas for
// Gaussian families, the supremum value 1/2 for Bernoulli arms.
std::vector<double> bound_sigmas(const RunConfig& cfg) {
  if (cfg.family == Family::kGaussianKnownVar) return cfg.sigmas;
  return std::vector<double>(static_cast<std::size_t>(cfg.num_arms), 0.5);
}

// Variance-profile carriers for the average-case constants (means unused).
std::vector<ArmModel> family_arms(const RunConfig& cfg) {
  std::vector<ArmModel> arms;
  arms.reserve(static_cast<std::size_t>(cfg.num_arms));
  for (int a = 0; a < cfg.num_arms; ++a) {
    if (cfg.family == Family::kGaussianKnownVar) {
      const double s = cfg.sigmas[static_cast<std::size_t>(a)];
      arms.push_back(ArmModel::gaussian(0.0, s * s));
    } else {
      arms.push_back(ArmModel::bernoulli(0.5));
    }
  }
  return arms;
}

void validate_policy_fields(const RunConfig& cfg) {
  if (cfg.policy == "ts_eba") {
    build_policy(cfg);  // aggregate construction only
    TsEbaConfig ts{cfg.budget, cfg.split_ratio, cfg.num_arms, cfg.variant,
                   cfg.radius_mult};
    ts.validate();
    return;
  }
  if (cfg.budget < cfg.num_arms) {
    config_error("config field \"T\" must be at least the number of arms for "
                 "the " +
                 cfg.policy + " policy");
  }
}

ParamSpace parse_space_field(const json& v, const std::string& key) {
  std::vector<double> pair = as_number_array(v, key);
  if (pair.size() != 2 || !(pair[0] < pair[1]) ||
      !std::isfinite(pair[0]) || !std::isfinite(pair[1])) {
    config_error("config field \"" + key +
                 "\" must be [lo, hi] with lo < hi");
  }
  return ParamSpace{pair[0], pair[1]};
}

// ---- rendering ----

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::string(buf);
}

std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += fields[i];
  }
  out += '\n';
  return out;
}

// Builds one JSONL object; values arrive pre-rendered so numeric fields
// carry exactly the CSV's 9 significant digits.
class JsonLine {
 public:
  void add_raw(const std::string& name, const std::string& raw) {
    line_ += first_ ? "{\"" : ",\"";
    first_ = false;
    line_ += name;
    line_ += "\":";
    line_ += raw;
  }
  void add(const std::string& name, double v) { add_raw(name, fmt9(v)); }
  void add(const std::string& name, bool v) {
    add_raw(name, v ? "true" : "false");
  }
  void add_string(const std::string& name, const std::string& v) {
    add_raw(name, "\"" + v + "\"");
  }
  std::string finish() { return line_ + "}\n"; }

 private:
  std::string line_;
  bool first_ = true;
};

std::vector<std::string> simulate_header(int num_arms) {
  std::vector<std::string> h{"mean_regret", "regret_se",     "misid_rate",
                             "misid_se",    "scaled_regret", "early_stop_rate"};
  for (int a = 1; a <= num_arms; ++a) {
    h.push_back("mean_count_" + std::to_string(a));
  }
  for (int a = 1; a <= num_arms; ++a) {
    h.push_back("choice_freq_" + std::to_string(a));
  }
  return h;
}

constexpr const char* kScanRowHeader =
    "gap,scaled_regret,regret_se,misid_rate,early_stop_rate";
constexpr const char* kScanFooterHeader = "sup,bound_constant,within_bound";
constexpr const char* kBayesHeader =
    "t_bayes_regret,t_bayes_se,bayes_lower,bayes_upper,bayes_mc_sigma,"
    "within_bound";
constexpr const char* kKlHeader = "epsilon,kl,ratio,fisher_half,rel_err";
constexpr const char* kBoundsHeader =
    "minimax_constant,worst_gap,regime,side_condition_ok";
constexpr const char* kBoundsBayesHeader =
    "minimax_constant,worst_gap,regime,side_condition_ok,bayes_lower,"
    "bayes_upper,bayes_mc_sigma";

const char* regime_name(Regime r) {
  return r == Regime::kTwoArm ? "two_arm" : "multi_arm";
}

// ---- parsing back (round trip) ----

std::vector<std::string> split_lines(const std::string& text,
                                     const char* what) {
  if (text.empty() || text.back() != '\n') {
    throw std::invalid_argument(std::string(what) +
                                ": expected a trailing newline");
  }
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      lines.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

double parse_field_num(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) {
    throw std::invalid_argument(std::string(what) +
                                ": malformed numeric field \"" + s + "\"");
  }
  return v;
}

bool parse_field_bool(const std::string& s, const char* what) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw std::invalid_argument(std::string(what) +
                              ": malformed boolean field \"" + s + "\"");
}

}  // namespace

RunConfig parse_config(const std::string& text, Command command) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error("config parse error at line " +
                 std::to_string(line_of_byte(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");

  const std::set<std::string>& allowed = allowed_keys(command);
  for (const auto& item : j.items()) {
    if (allowed.count(item.key()) > 0) continue;
    if (key_known_anywhere(item.key())) {
      config_error("config key \"" + item.key() +
                   "\" does not apply to the " + command_name(command) +
                   " command");
    }
    config_error("unknown config key \"" + item.key() + "\"");
  }

  RunConfig cfg;
  cfg.command = command;

  if (j.contains("command")) {
    const std::string given = as_string(j["command"], "command");
    if (given != command_name(command)) {
      config_error("config file sets command \"" + given + "\" but the " +
                   std::string(command_name(command)) +
                   " subcommand was invoked");
    }
  }

  require_key(j, "family");
  cfg.family = parse_family(as_string(j["family"], "family"));

  if (j.contains("policy")) {
    cfg.policy = as_string(j["policy"], "policy");
    check_policy_name(cfg.policy);
  }
  if (j.contains("variant")) {
    cfg.variant = parse_variant(as_string(j["variant"], "variant"));
  }
  if (j.contains("format")) {
    cfg.format = parse_format_name(as_string(j["format"], "format"));
  }
  if (j.contains("output")) {
    cfg.output_path = as_string(j["output"], "output");
  }
  if (j.contains("r")) {
    cfg.split_ratio = as_number(j["r"], "r");
    if (!(cfg.split_ratio > 0.0) || !(cfg.split_ratio < 1.0)) {
      config_error("config field \"r\" must lie in (0, 1)");
    }
  }
  if (j.contains("radius_mult")) {
    cfg.radius_mult = as_number(j["radius_mult"], "radius_mult");
    if (!(cfg.radius_mult > 0.0) || !std::isfinite(cfg.radius_mult)) {
      config_error("config field \"radius_mult\" must be positive");
    }
  }
  if (j.contains("T")) {
    cfg.budget = as_integer(j["T"], "T");
    if (cfg.budget < 1) config_error("config field \"T\" must be >= 1");
  }
  if (j.contains("reps")) {
    cfg.reps = as_integer(j["reps"], "reps");
    if (cfg.reps < 1) config_error("config field \"reps\" must be >= 1");
  }
  if (j.contains("seed")) cfg.seed = as_seed(j["seed"], "seed");
  if (j.contains("sigmas")) {
    if (cfg.family == Family::kBernoulli) {
      config_error("config key \"sigmas\" applies to Gaussian families only");
    }
    cfg.sigmas = as_number_array(j["sigmas"], "sigmas");
    for (double s : cfg.sigmas) {
      if (!(s > 0.0) || !std::isfinite(s)) {
        config_error("config field \"sigmas\" entries must be positive");
      }
    }
  }
  if (j.contains("means")) cfg.means = as_number_array(j["means"], "means");
  if (j.contains("space")) cfg.space = parse_space_field(j["space"], "space");
  if (j.contains("prior")) {
    const ParamSpace p = parse_space_field(j["prior"], "prior");
    cfg.prior = PriorSpec{p.lo, p.hi};
  }
  if (j.contains("prior_draws")) {
    cfg.prior_draws = as_integer(j["prior_draws"], "prior_draws");
    if (cfg.prior_draws < 1) {
      config_error("config field \"prior_draws\" must be >= 1");
    }
  }
  if (j.contains("reps_per_draw")) {
    cfg.reps_per_draw = as_integer(j["reps_per_draw"], "reps_per_draw");
    if (cfg.reps_per_draw < 1) {
      config_error("config field \"reps_per_draw\" must be >= 1");
    }
  }
  if (j.contains("bound_draws")) {
    cfg.bound_draws = as_integer(j["bound_draws"], "bound_draws");
    if (cfg.bound_draws < 1) {
      config_error("config field \"bound_draws\" must be >= 1");
    }
  }
  if (j.contains("mu")) cfg.kl_mu = as_number(j["mu"], "mu");
  if (j.contains("sigma")) {
    cfg.kl_sigma = as_number(j["sigma"], "sigma");
    if (!(cfg.kl_sigma > 0.0) || !std::isfinite(cfg.kl_sigma)) {
      config_error("config field \"sigma\" must be positive");
    }
  }
  if (j.contains("epsilons")) {
    cfg.epsilons = as_number_array(j["epsilons"], "epsilons");
    for (double e : cfg.epsilons) {
      if (!(e > 0.0) || !std::isfinite(e)) {
        config_error("config field \"epsilons\" entries must be positive");
      }
    }
  }

  // Arm-count bookkeeping: K may be given explicitly and must then agree
  // with whatever other field determines it.
  std::optional<int> explicit_k;
  if (j.contains("K")) {
    const std::int64_t k = as_integer(j["K"], "K");
    if (k < 2) config_error("config field \"K\" must be >= 2");
    explicit_k = static_cast<int>(k);
  }
  auto settle_num_arms = [&](int derived, const char* source) {
    if (explicit_k && *explicit_k != derived) {
      config_error("config field \"K\" (" + std::to_string(*explicit_k) +
                   ") disagrees with the number of " + source + " (" +
                   std::to_string(derived) + ")");
    }
    cfg.num_arms = derived;
  };

  // Command-specific required fields and cross-checks.
  switch (command) {
    case Command::kSimulate: {
      require_key(j, "means");
      require_key(j, "T");
      require_key(j, "reps");
      require_key(j, "seed");
      settle_num_arms(static_cast<int>(cfg.means.size()), "means");
      if (cfg.num_arms < 2) {
        config_error("config field \"means\" needs at least two arms");
      }
      if (cfg.family == Family::kGaussianKnownVar) {
        require_key(j, "sigmas");
        if (cfg.sigmas.size() != cfg.means.size()) {
          config_error(
              "config fields \"means\" and \"sigmas\" must have equal "
              "length");
        }
      }
      build_instance(cfg);  // surfaces range errors against the mean space
      validate_policy_fields(cfg);
      break;
    }
    case Command::kScan: {
      require_key(j, "T");
      require_key(j, "reps");
      require_key(j, "seed");
      if (cfg.family == Family::kGaussianKnownVar) {
        require_key(j, "sigmas");
        settle_num_arms(static_cast<int>(cfg.sigmas.size()), "sigmas");
      } else {
        if (!explicit_k) {
          config_error(
              "missing required config key \"K\" (Bernoulli scans have no "
              "sigmas to infer it from)");
        }
        cfg.num_arms = *explicit_k;
      }
      if (cfg.num_arms < 2) {
        config_error("scan needs at least two arms");
      }
      const bool has_gaps = j.contains("gaps");
      const bool has_trio = j.contains("gap_coeff_min") ||
                            j.contains("gap_coeff_max") ||
                            j.contains("gap_count");
      if (has_gaps && has_trio) {
        config_error(
            "config keys \"gaps\" and gap_coeff_min/gap_coeff_max/gap_count "
            "are mutually exclusive");
      }
      if (has_gaps) {
        cfg.gaps = as_number_array(j["gaps"], "gaps");
      } else if (has_trio) {
        require_key(j, "gap_coeff_min");
        require_key(j, "gap_coeff_max");
        require_key(j, "gap_count");
        const double cmin = as_number(j["gap_coeff_min"], "gap_coeff_min");
        const double cmax = as_number(j["gap_coeff_max"], "gap_coeff_max");
        const std::int64_t count = as_integer(j["gap_count"], "gap_count");
        if (!(cmin > 0.0) || !(cmin <= cmax) || !std::isfinite(cmax)) {
          config_error(
              "gap coefficients must satisfy 0 < gap_coeff_min <= "
              "gap_coeff_max");
        }
        if (count < 1) config_error("config field \"gap_count\" must be >= 1");
        const double root_t = std::sqrt(static_cast<double>(cfg.budget));
        for (std::int64_t i = 0; i < count; ++i) {
          const double frac =
              count == 1 ? 0.0
                         : static_cast<double>(i) /
                               static_cast<double>(count - 1);
          const double c = cmin * std::pow(cmax / cmin, frac);
          cfg.gaps.push_back(c / root_t);
        }
      } else {
        config_error(
            "the scan command needs either \"gaps\" or the "
            "gap_coeff_min/gap_coeff_max/gap_count trio");
      }
      for (double g : cfg.gaps) {
        if (!(g > 0.0) || !std::isfinite(g)) {
          config_error("scan gaps must be positive and finite");
        }
      }
      validate_policy_fields(cfg);
      break;
    }
    case Command::kBayes: {
      require_key(j, "T");
      require_key(j, "seed");
      require_key(j, "prior");
      require_key(j, "prior_draws");
      require_key(j, "reps_per_draw");
      if (cfg.family == Family::kGaussianKnownVar) {
        require_key(j, "sigmas");
        settle_num_arms(static_cast<int>(cfg.sigmas.size()), "sigmas");
      } else {
        if (!explicit_k) {
          config_error(
              "missing required config key \"K\" (Bernoulli priors have no "
              "sigmas to infer it from)");
        }
        cfg.num_arms = *explicit_k;
        if (!(cfg.prior->lo > 0.0 && cfg.prior->hi < 1.0)) {
          config_error(
              "the Bernoulli family needs a prior strictly inside (0, 1)");
        }
      }
      if (cfg.num_arms < 2) {
        config_error("bayes evaluation needs at least two arms");
      }
      validate_policy_fields(cfg);
      break;
    }
    case Command::kBounds: {
      require_key(j, "T");
      if (cfg.family == Family::kGaussianKnownVar) {
        require_key(j, "sigmas");
        settle_num_arms(static_cast<int>(cfg.sigmas.size()), "sigmas");
      } else {
        if (!explicit_k) {
          config_error(
              "missing required config key \"K\" (Bernoulli bounds have no "
              "sigmas to infer it from)");
        }
        cfg.num_arms = *explicit_k;
      }
      if (cfg.num_arms < 2) {
        config_error("bound constants need at least two arms");
      }
      if (cfg.prior) {
        require_key(j, "seed");
        if (cfg.family == Family::kBernoulli &&
            !(cfg.prior->lo > 0.0 && cfg.prior->hi < 1.0)) {
          config_error(
              "the Bernoulli family needs a prior strictly inside (0, 1)");
        }
      }
      break;
    }
    case Command::kKlCheck: {
      if (cfg.family == Family::kBernoulli) {
        double max_eps = 0.0;
        for (double e : cfg.epsilons) max_eps = std::max(max_eps, e);
        if (!(cfg.kl_mu > 0.0) || !(cfg.kl_mu + max_eps < 1.0)) {
          config_error("kl-check needs mu and mu + epsilon inside (0, 1) for "
                       "the Bernoulli family");
        }
      }
      if (!std::isfinite(cfg.kl_mu)) {
        config_error("config field \"mu\" must be finite");
      }
      break;
    }
  }
  return cfg;
}

std::string format_simulate(const AggregateStats& stats, OutputFormat format) {
  const int num_arms = static_cast<int>(stats.mean_counts.size());
  const std::vector<std::string> header = simulate_header(num_arms);
  std::vector<std::string> values{
      fmt9(stats.mean_regret), fmt9(stats.regret_se),
      fmt9(stats.misid_rate),  fmt9(stats.misid_se),
      fmt9(stats.scaled_regret), fmt9(stats.early_stop_rate)};
  for (double c : stats.mean_counts) values.push_back(fmt9(c));
  for (double f : stats.choice_freq) values.push_back(fmt9(f));
  if (format == OutputFormat::kCsv) {
    return join_csv(header) + join_csv(values);
  }
  JsonLine line;
  for (std::size_t i = 0; i < header.size(); ++i) {
    line.add_raw(header[i], values[i]);
  }
  return line.finish();
}

std::string format_scan(const ScanReport& report, OutputFormat format) {
  std::string out;
  if (format == OutputFormat::kCsv) {
    out += kScanRowHeader;
    out += '\n';
    for (const ScanRow& row : report.grid) {
      out += join_csv({fmt9(row.gap), fmt9(row.stats.scaled_regret),
                       fmt9(row.stats.regret_se), fmt9(row.stats.misid_rate),
                       fmt9(row.stats.early_stop_rate)});
    }
    out += kScanFooterHeader;
    out += '\n';
    out += join_csv({fmt9(report.sup_scaled_regret),
                     fmt9(report.bound_constant),
                     report.within_bound ? "1" : "0"});
    return out;
  }
  for (const ScanRow& row : report.grid) {
    JsonLine line;
    line.add("gap", row.gap);
    line.add("scaled_regret", row.stats.scaled_regret);
    line.add("regret_se", row.stats.regret_se);
    line.add("misid_rate", row.stats.misid_rate);
    line.add("early_stop_rate", row.stats.early_stop_rate);
    out += line.finish();
  }
  JsonLine footer;
  footer.add("sup", report.sup_scaled_regret);
  footer.add("bound_constant", report.bound_constant);
  footer.add("within_bound", report.within_bound);
  out += footer.finish();
  return out;
}

std::string format_bounds(const BoundReport& report,
                          const std::optional<BayesBoundReport>& bayes,
                          OutputFormat format) {
  if (format == OutputFormat::kCsv) {
    std::string out = bayes ? kBoundsBayesHeader : kBoundsHeader;
    out += '\n';
    std::vector<std::string> values{fmt9(report.minimax_constant),
                                    fmt9(report.worst_gap),
                                    regime_name(report.regime),
                                    report.side_condition_ok ? "1" : "0"};
    if (bayes) {
      values.push_back(fmt9(bayes->lower_constant));
      values.push_back(fmt9(bayes->upper_constant));
      values.push_back(fmt9(bayes->mc_sigma));
    }
    return out + join_csv(values);
  }
  JsonLine line;
  line.add("minimax_constant", report.minimax_constant);
  line.add("worst_gap", report.worst_gap);
  line.add_string("regime", regime_name(report.regime));
  line.add("side_condition_ok", report.side_condition_ok);
  if (bayes) {
    line.add("bayes_lower", bayes->lower_constant);
    line.add("bayes_upper", bayes->upper_constant);
    line.add("bayes_mc_sigma", bayes->mc_sigma);
  }
  return line.finish();
}

std::string format_bayes(const BayesCliReport& report, OutputFormat format) {
  if (format == OutputFormat::kCsv) {
    std::string out = kBayesHeader;
    out += '\n';
    return out + join_csv({fmt9(report.eval.t_scaled_mean),
                           fmt9(report.eval.t_scaled_se),
                           fmt9(report.bound.lower_constant),
                           fmt9(report.bound.upper_constant),
                           fmt9(report.bound.mc_sigma),
                           report.within_bound ? "1" : "0"});
  }
  JsonLine line;
  line.add("t_bayes_regret", report.eval.t_scaled_mean);
  line.add("t_bayes_se", report.eval.t_scaled_se);
  line.add("bayes_lower", report.bound.lower_constant);
  line.add("bayes_upper", report.bound.upper_constant);
  line.add("bayes_mc_sigma", report.bound.mc_sigma);
  line.add("within_bound", report.within_bound);
  return line.finish();
}

std::string format_kl(const std::vector<KlCheckRow>& rows,
                      OutputFormat format) {
  std::string out;
  if (format == OutputFormat::kCsv) {
    out += kKlHeader;
    out += '\n';
    for (const KlCheckRow& row : rows) {
      out += join_csv({fmt9(row.epsilon), fmt9(row.kl), fmt9(row.ratio),
                       fmt9(row.fisher_half), fmt9(row.rel_err)});
    }
    return out;
  }
  for (const KlCheckRow& row : rows) {
    JsonLine line;
    line.add("epsilon", row.epsilon);
    line.add("kl", row.kl);
    line.add("ratio", row.ratio);
    line.add("fisher_half", row.fisher_half);
    line.add("rel_err", row.rel_err);
    out += line.finish();
  }
  return out;
}

AggregateStats parse_simulate_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text, "simulate CSV");
  if (lines.size() != 2) {
    throw std::invalid_argument("simulate CSV: expected header plus one row");
  }
  const std::vector<std::string> header = split_fields(lines[0]);
  if (header.size() < 10 || (header.size() - 6) % 2 != 0) {
    throw std::invalid_argument("simulate CSV: unrecognized header");
  }
  const int num_arms = static_cast<int>((header.size() - 6) / 2);
  if (header != simulate_header(num_arms)) {
    throw std::invalid_argument("simulate CSV: unrecognized header");
  }
  const std::vector<std::string> fields = split_fields(lines[1]);
  if (fields.size() != header.size()) {
    throw std::invalid_argument("simulate CSV: row width mismatch");
  }
  AggregateStats stats;
  stats.mean_regret = parse_field_num(fields[0], "simulate CSV");
  stats.regret_se = parse_field_num(fields[1], "simulate CSV");
  stats.misid_rate = parse_field_num(fields[2], "simulate CSV");
  stats.misid_se = parse_field_num(fields[3], "simulate CSV");
  stats.scaled_regret = parse_field_num(fields[4], "simulate CSV");
  stats.early_stop_rate = parse_field_num(fields[5], "simulate CSV");
  for (int a = 0; a < num_arms; ++a) {
    stats.mean_counts.push_back(
        parse_field_num(fields[6 + static_cast<std::size_t>(a)],
                        "simulate CSV"));
  }
  for (int a = 0; a < num_arms; ++a) {
    stats.choice_freq.push_back(parse_field_num(
        fields[6 + static_cast<std::size_t>(num_arms + a)], "simulate CSV"));
  }
  return stats;
}

ScanReport parse_scan_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text, "scan CSV");
  if (lines.size() < 4 || lines[0] != kScanRowHeader ||
      lines[lines.size() - 2] != kScanFooterHeader) {
    throw std::invalid_argument("scan CSV: unrecognized layout");
  }
  ScanReport report;
  for (std::size_t i = 1; i + 2 < lines.size(); ++i) {
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != 5) {
      throw std::invalid_argument("scan CSV: row width mismatch");
    }
    ScanRow row;
    row.gap = parse_field_num(fields[0], "scan CSV");
    row.stats.scaled_regret = parse_field_num(fields[1], "scan CSV");
    row.stats.regret_se = parse_field_num(fields[2], "scan CSV");
    row.stats.misid_rate = parse_field_num(fields[3], "scan CSV");
    row.stats.early_stop_rate = parse_field_num(fields[4], "scan CSV");
    report.grid.push_back(std::move(row));
  }
  const std::vector<std::string> footer = split_fields(lines.back());
  if (footer.size() != 3) {
    throw std::invalid_argument("scan CSV: footer width mismatch");
  }
  report.sup_scaled_regret = parse_field_num(footer[0], "scan CSV");
  report.bound_constant = parse_field_num(footer[1], "scan CSV");
  report.within_bound = parse_field_bool(footer[2], "scan CSV");
  const ScanRow* best = &report.grid[0];
  for (const ScanRow& row : report.grid) {
    if (row.stats.scaled_regret > best->stats.scaled_regret) best = &row;
  }
  report.argmax_gap = best->gap;
  return report;
}

BoundReport parse_bounds_csv(const std::string& text,
                             std::optional<BayesBoundReport>* bayes) {
  const std::vector<std::string> lines = split_lines(text, "bounds CSV");
  if (lines.size() != 2 ||
      (lines[0] != kBoundsHeader && lines[0] != kBoundsBayesHeader)) {
    throw std::invalid_argument("bounds CSV: unrecognized layout");
  }
  const bool has_bayes = lines[0] == kBoundsBayesHeader;
  const std::vector<std::string> fields = split_fields(lines[1]);
  if (fields.size() != (has_bayes ? 7u : 4u)) {
    throw std::invalid_argument("bounds CSV: row width mismatch");
  }
  BoundReport report;
  report.minimax_constant = parse_field_num(fields[0], "bounds CSV");
  report.worst_gap = parse_field_num(fields[1], "bounds CSV");
  if (fields[2] == "two_arm") {
    report.regime = Regime::kTwoArm;
  } else if (fields[2] == "multi_arm") {
    report.regime = Regime::kMultiArm;
  } else {
    throw std::invalid_argument("bounds CSV: malformed regime field \"" +
                                fields[2] + "\"");
  }
  report.side_condition_ok = parse_field_bool(fields[3], "bounds CSV");
  if (bayes) {
    bayes->reset();
    if (has_bayes) {
      BayesBoundReport b;
      b.lower_constant = parse_field_num(fields[4], "bounds CSV");
      b.upper_constant = parse_field_num(fields[5], "bounds CSV");
      b.mc_sigma = parse_field_num(fields[6], "bounds CSV");
      *bayes = b;
    }
  }
  return report;
}

BayesCliReport parse_bayes_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text, "bayes CSV");
  if (lines.size() != 2 || lines[0] != kBayesHeader) {
    throw std::invalid_argument("bayes CSV: unrecognized layout");
  }
  const std::vector<std::string> fields = split_fields(lines[1]);
  if (fields.size() != 6) {
    throw std::invalid_argument("bayes CSV: row width mismatch");
  }
  BayesCliReport report;
  report.eval.t_scaled_mean = parse_field_num(fields[0], "bayes CSV");
  report.eval.t_scaled_se = parse_field_num(fields[1], "bayes CSV");
  report.bound.lower_constant = parse_field_num(fields[2], "bayes CSV");
  report.bound.upper_constant = parse_field_num(fields[3], "bayes CSV");
  report.bound.mc_sigma = parse_field_num(fields[4], "bayes CSV");
  report.within_bound = parse_field_bool(fields[5], "bayes CSV");
  return report;
}

std::vector<KlCheckRow> parse_kl_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text, "kl CSV");
  if (lines.size() < 2 || lines[0] != kKlHeader) {
    throw std::invalid_argument("kl CSV: unrecognized layout");
  }
  std::vector<KlCheckRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != 5) {
      throw std::invalid_argument("kl CSV: row width mismatch");
    }
    KlCheckRow row;
    row.epsilon = parse_field_num(fields[0], "kl CSV");
    row.kl = parse_field_num(fields[1], "kl CSV");
    row.ratio = parse_field_num(fields[2], "kl CSV");
    row.fisher_half = parse_field_num(fields[3], "kl CSV");
    row.rel_err = parse_field_num(fields[4], "kl CSV");
    rows.push_back(row);
  }
  return rows;
}

void write_output(const std::string& rendered, const std::string& path) {
  if (path.empty()) {
    std::cout << rendered << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file \"" + path + "\"");
  }
  out << rendered;
  out.flush();
  if (!out.good()) {
    throw std::runtime_error("failed writing output file \"" + path + "\"");
  }
}

namespace {

// One advisory line when the configured split ratio is too large for the
// design's nominal clipping-free regime at the (true or configured)
// dispersions. Advisory only: the design stays well defined.
void warn_side_condition(const std::vector<double>& sigmas,
                         double split_ratio) {
  if (sigmas.empty() || side_condition_ok(sigmas, split_ratio)) return;
  std::cerr << "warning: split ratio r=" << fmt9(split_ratio)
            << " exceeds an arm's ideal stage-2 share; clipped weights will "
               "bind\n";
}

std::vector<double> true_sigmas(const BanditInstance& instance) {
  std::vector<double> out;
  out.reserve(instance.arms.size());
  for (const ArmModel& arm : instance.arms) {
    out.push_back(std::sqrt(arm.variance()));
  }
  return out;
}

}  // namespace

void run_command(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::kSimulate: {
      const BanditInstance instance = build_instance(cfg);
      if (cfg.policy == "ts_eba") {
        warn_side_condition(true_sigmas(instance), cfg.split_ratio);
      }
      SimPlan plan{build_policy(cfg), instance, cfg.reps, cfg.seed};
      const AggregateStats stats = simulate(plan);
      write_output(format_simulate(stats, cfg.format), cfg.output_path);
      return;
    }
    case Command::kScan: {
      if (cfg.policy == "ts_eba" && cfg.family == Family::kGaussianKnownVar) {
        warn_side_condition(cfg.sigmas, cfg.split_ratio);
      }
      const ScanReport report =
          worst_case_scan(build_policy(cfg), cfg.family, cfg.sigmas, cfg.gaps,
                          cfg.reps, cfg.seed);
      write_output(format_scan(report, cfg.format), cfg.output_path);
      return;
    }
    case Command::kBayes: {
      BayesCliReport report;
      report.eval =
          bayes_eval(build_policy(cfg), cfg.family, cfg.sigmas, *cfg.prior,
                     cfg.prior_draws, cfg.reps_per_draw, cfg.seed);
      report.bound = bayes_constants(family_arms(cfg), *cfg.prior,
                                     cfg.split_ratio, cfg.bound_draws,
                                     cfg.seed);
      report.within_bound =
          report.eval.t_scaled_mean <=
          report.bound.upper_constant + 3.0 * report.eval.t_scaled_se;
      write_output(format_bayes(report, cfg.format), cfg.output_path);
      return;
    }
    case Command::kBounds: {
      const BoundReport report = bound_report(cfg.num_arms, bound_sigmas(cfg),
                                              cfg.budget, cfg.split_ratio);
      std::optional<BayesBoundReport> bayes;
      if (cfg.prior) {
        bayes = bayes_constants(family_arms(cfg), *cfg.prior, cfg.split_ratio,
                                cfg.bound_draws, cfg.seed);
      }
      write_output(format_bounds(report, bayes, cfg.format), cfg.output_path);
      return;
    }
    case Command::kKlCheck: {
      std::vector<KlCheckRow> rows;
      rows.reserve(cfg.epsilons.size());
      for (double eps : cfg.epsilons) {
        ArmModel p = cfg.family == Family::kGaussianKnownVar
                         ? ArmModel::gaussian(cfg.kl_mu,
                                              cfg.kl_sigma * cfg.kl_sigma)
                         : ArmModel::bernoulli(cfg.kl_mu);
        ArmModel q = cfg.family == Family::kGaussianKnownVar
                         ? ArmModel::gaussian(cfg.kl_mu + eps,
                                              cfg.kl_sigma * cfg.kl_sigma)
                         : ArmModel::bernoulli(cfg.kl_mu + eps);
        KlCheckRow row;
        row.epsilon = eps;
        row.kl = kl_divergence(p, q);
        row.ratio = row.kl / (eps * eps);
        row.fisher_half = p.fisher_info() / 2.0;
        row.rel_err = std::abs(row.ratio - row.fisher_half) / row.fisher_half;
        rows.push_back(row);
      }
      write_output(format_kl(rows, cfg.format), cfg.output_path);
      return;
    }
  }
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{
      "bailab: a simulation lab for fixed-budget best-arm identification"};
  app.require_subcommand(1);

  struct SubEntry {
    Command command;
    CLI::App* sub;
  };
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::int64_t> reps_override;
  std::optional<std::string> output_override;
  std::optional<std::string> format_override;

  const std::pair<const char*, Command> kSubs[] = {
      {"simulate", Command::kSimulate},
      {"scan", Command::kScan},
      {"bayes", Command::kBayes},
      {"bounds", Command::kBounds},
      {"kl-check", Command::kKlCheck}};
  static const char* kDescriptions[] = {
      "run one Monte Carlo experiment and report aggregate statistics",
      "sweep adversarial gaps and compare against the worst-case constant",
      "estimate T-scaled average-case regret against its closed-form bounds",
      "print closed-form worst-case (and optional average-case) constants",
      "verify KL divergence against its Fisher-information quadratic limit"};

  std::vector<SubEntry> entries;
  for (std::size_t i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(kSubs[i].first, kDescriptions[i]);
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--reps", reps_override,
                    "override the replication count");
    sub->add_option("--output", output_override,
                    "override the output path (default stdout)");
    sub->add_option("--format", format_override, "override csv|jsonl");
    entries.push_back(SubEntry{kSubs[i].second, sub});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Command command = Command::kSimulate;
  for (const SubEntry& entry : entries) {
    if (entry.sub->parsed()) command = entry.command;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "config error: cannot read config file \"" << config_path
              << "\"\n";
    return 2;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  RunConfig cfg;
  try {
    cfg = parse_config(buffer.str(), command);
    if (seed_override) cfg.seed = *seed_override;
    if (reps_override) {
      if (command != Command::kSimulate && command != Command::kScan) {
        throw std::invalid_argument(
            std::string("--reps does not apply to the ") +
            command_name(command) + " command");
      }
      if (*reps_override < 1) {
        throw std::invalid_argument("--reps must be >= 1");
      }
      cfg.reps = *reps_override;
    }
    if (output_override) cfg.output_path = *output_override;
    if (format_override) cfg.format = parse_format_name(*format_override);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    run_command(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace bailab
