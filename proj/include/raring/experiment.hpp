#ifndef RARING_EXPERIMENT_HPP_
#define RARING_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "raring/distribution.hpp"
#include "raring/raring_core.hpp"

namespace raring {

enum class ScenarioKind {
  kTheorem1Geometric,
  kTheorem2PoissonExample,
  kEq6Identity,
  kStatementBoundSweep,
  kMixingZeroCheck,
  kGfConsistency,
};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

// Invalid configuration; `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GridConfig {
  double step = 1e-3;
  double horizon = 5.0;
};

// One scenario. Fields that a kind does not use are ignored; see
// docs/config.md for the per-kind schema.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kTheorem1Geometric;
  std::uint64_t seed = 1;
  std::size_t replications = 1000;
  std::size_t workers = 1;
  double runtime_cap_seconds = 600.0;
  std::string output_dir = "out";

  // Scaling ladder: c_n for theorem1_geometric, lambda_n for
  // theorem2_poisson_example (strictly increasing c_n, i.e. strictly
  // decreasing lambda_n).
  std::vector<double> ladder;
  // t probes (theorem1_geometric, gf_consistency).
  std::vector<double> t_values;
  // Event indices k (theorem2_poisson_example).
  std::vector<int> k_values;
  // s probes (gf_consistency).
  std::vector<double> s_values;
  // Sites l and levels m (eq6_identity).
  std::vector<std::int64_t> sites;
  std::vector<std::int64_t> levels;

  std::optional<DistributionSpec> h;  // H inter-arrival law
  std::optional<DistributionSpec> z;  // Z inter-arrival law
  std::vector<DistributionSpec> laws;  // R candidates (gf_consistency)

  GridConfig grid;
  int k_max = 60;

  // Final ladder point tolerance (KS or TV), and whether the ladder must be
  // strictly decreasing.
  double tolerance = 0.02;
  bool require_trend = true;
  // theorem2_poisson_example: tolerance used to decide which argument
  // scaling of the limit law matches the simulation.
  double scaling_tolerance = 0.03;

  // statement_bound_sweep: number of random configurations.
  std::size_t configs = 100;
  // mixing_zero_check: repetitions and the threshold-event family.
  std::size_t repetitions = 20;
  std::size_t min_passing = 19;
  std::int64_t lag = 5;
  std::vector<ThresholdPair> family;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

ScenarioConfig default_config(ScenarioKind kind);

nlohmann::json to_json_config(const ScenarioConfig& config);
// Keys absent from `j` keep the kind's defaults. Throws ConfigError.
ScenarioConfig config_from_json(const nlohmann::json& j);

// One cell of a convergence table.
struct ReportRow {
  double ladder = 0.0;
  std::string probe;
  double distance = 0.0;
  double stderr_ = 0.0;
  bool pass = false;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ReportCheck {
  std::string name;
  bool pass = false;
  nlohmann::json detail;

  friend bool operator==(const ReportCheck&, const ReportCheck&) = default;
};

struct ExperimentReport {
  std::string kind;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<ReportRow> rows;
  std::vector<ReportCheck> checks;
  std::vector<std::string> coverage;  // invariants exercised
  nlohmann::json details;
  bool incomplete = false;
  bool passed = false;

  friend bool operator==(const ExperimentReport&,
                         const ExperimentReport&) = default;
};

void to_json(nlohmann::json& j, const ExperimentReport& report);
void from_json(const nlohmann::json& j, ExperimentReport& report);

// Runs the scenario. Deterministic in (config, seed) for any worker count.
// A scenario that exceeds its runtime cap returns a report flagged
// incomplete. Elapsed time is returned separately so the report itself
// stays reproducible.
ExperimentReport run_scenario(const ScenarioConfig& config,
                              double* elapsed_seconds = nullptr);

struct ConvergenceTable {
  std::vector<double> ladder;
  std::vector<std::string> probes;
  // cells[row][col]; rows follow the ladder, columns the probes.
  std::vector<std::vector<ReportRow>> cells;
  std::vector<bool> decreasing;  // per column, strictly decreasing distance
};

// Throws when the report has fewer than two ladder points or no probes.
ConvergenceTable convergence_table(const ExperimentReport& report);

std::string format_table(const ConvergenceTable& table);

enum class ReportFormat { kJson, kCsv };

// Writes <kind>_seed<seed>.json, or <kind>_seed<seed>_table.csv and
// <kind>_seed<seed>_checks.csv. Returns the paths written. Throws
// std::runtime_error naming the path on I/O failure.
std::vector<std::filesystem::path> emit_report(
    const ExperimentReport& report, ReportFormat format,
    const std::filesystem::path& dir);

std::string report_csv_table(const ExperimentReport& report);

// Builds an xi-source from its JSON description.
std::unique_ptr<XiSource> source_from_json(const nlohmann::json& j);

// Total variation distance between an empirical count law and a reference
// pmf on {0, 1, ...}; reference mass beyond its support is counted.
double total_variation(const std::vector<std::size_t>& counts,
                       std::size_t total, const std::vector<double>& ref);

std::vector<double> poisson_pmf(double mean, std::size_t k_max);

}  // namespace raring

#endif  // RARING_EXPERIMENT_HPP_
