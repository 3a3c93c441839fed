#pragma once

// Seeded experiment harness: scenario ingestion, method runs, parameter
// sweeps and the CSV / JSON exports consumed by plotting scripts.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavshare/baselines.hpp"
#include "uavshare/pipeline.hpp"

namespace uavshare {

struct SweepSpec {
  std::string param;  // theta | beta | delta | num_subchannels
  std::vector<double> grid;
};

struct ExperimentConfig {
  /// Exactly one of these is set. A template is regenerated per seed; a
  /// fixed scenario is reused and the seed only drives the solvers.
  std::optional<ScenarioTemplate> tmpl;
  std::optional<Scenario> scenario;
  SolveParams solver;
  std::vector<std::string> methods{"proposed", "rcop", "ecop", "rpoc", "epoc", "es"};
  std::vector<std::uint64_t> seeds{1};
  std::optional<SweepSpec> sweep;
  /// Emit per-outer-iteration rows for the proposed method.
  bool trace = true;
};

bool is_sweep_param(const std::string& name);
/// "a:b:step", inclusive of b up to rounding. Throws ConfigError.
std::vector<double> parse_grid(const std::string& spec);
/// "N..M" or "N". Throws ConfigError.
std::vector<std::uint64_t> parse_seed_range(const std::string& spec);
/// Comma separated; validates names against the registry plus "proposed".
std::vector<std::string> parse_methods(const std::string& list);

/// theta, beta, delta pin the corresponding price range to [v, v];
/// num_subchannels sets B_n (and Q^n if it followed B_n).
ScenarioTemplate apply_override(ScenarioTemplate t, const std::string& param, double value);
Scenario apply_override(const Scenario& s, const std::string& param, double value);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

struct MethodOutcome {
  std::string method;
  UtilityBreakdown utility;
  int iterations = 1;
  bool converged = true;
  int resource_violations = 0;
  int qos_violations = 0;
  /// Proposed only: accepted outer iterates (utility per t).
  std::vector<UtilityBreakdown> trace;
  std::optional<SolveReport> report;
};

struct TaskResult {
  std::uint64_t seed = 0;
  std::string param_name;  // empty outside sweeps
  double param_value = 0.0;
  std::uint64_t scenario_digest = 0;
  std::vector<MethodOutcome> methods;
};

TaskResult run_task(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& param, double value,
                    bool keep_reports = false);

/// All (param value, seed) tasks, ordered by grid point then seed. jobs > 1
/// fans tasks out over OpenMP threads; jobs == 1 is the serial reference.
std::vector<TaskResult> run_experiment(const ExperimentConfig& cfg, int jobs = 1, bool keep_reports = false);

std::string figure_id(const std::string& param);

/// Columns: figure_id, method, seed, param_name, param_value, sp_index,
/// revenue, cost, utility, total_utility, iterations, converged.
void write_csv(std::ostream& os, const std::vector<TaskResult>& results, bool trace_rows);
/// Per (param value, method): mean / median / min / max total utility.
void write_summary_csv(std::ostream& os, const std::vector<TaskResult>& results);
nlohmann::json results_json(const std::vector<TaskResult>& results);
/// Inverse of results_json; reports are not read back. Throws ConfigError.
std::vector<TaskResult> results_from_json(const nlohmann::json& j);

struct SummaryRow {
  std::string method;
  double param_value = 0.0;
  int samples = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double converged_fraction = 0.0;
};
std::vector<SummaryRow> summarize(const std::vector<TaskResult>& results);

}  // namespace uavshare
