#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "isac/driver.hpp"

namespace isac {

/// Rectangular table of preformatted cells with `# key=value` header lines.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

std::string format_number(double x);
std::string to_csv(const Table& table);
void write_text(const std::string& path, const std::string& text);

/// FNV-1a over the canonical YAML rendering.
std::uint64_t config_hash(const ScenarioConfig& cfg);
std::string hex64(std::uint64_t x);
/// Independent stream seed for trial `index` under `master`.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Error classes mapped to the CLI exit codes.
enum class TrialStatus { ok = 0, config_error = 2, infeasible = 3, numerical_failure = 4 };

struct TrialOutcome {
  int index = 0;
  std::uint64_t seed = 0;
  TrialStatus status = TrialStatus::ok;
  std::string error;
  bool converged = false;
  int outer_iterations = 0;
  double scnr_db = 0.0;
  double sum_rate = 0.0;
  double beampattern_mse = 0.0;
  double min_sinr_db = 0.0;
  std::vector<OuterStep> trace;
};

struct DesignRun {
  ChannelSet channels;
  DesignSolution solution;
  MetricsReport report;
};

/// Draws channels from `seed` and runs the full design. Errors propagate.
DesignRun run_design(const ScenarioConfig& cfg, std::uint64_t seed);

/// Runs one design and captures any error in the outcome.
TrialOutcome run_trial(const ScenarioConfig& cfg, int index, std::uint64_t seed);

/// Trials 0..trials-1 with seeds trial_seed(master, i), on up to `workers`
/// threads. The result is ordered by trial index.
std::vector<TrialOutcome> run_trials(const ScenarioConfig& cfg, std::uint64_t master, int trials,
                                     int workers);

enum class SweepParam { delta, gamma_db, alpha, num_antennas };

SweepParam parse_sweep_param(const std::string& name);
std::string sweep_param_name(SweepParam p);
ScenarioConfig apply_sweep(const ScenarioConfig& cfg, SweepParam p, double value);

struct SweepPoint {
  double value = 0.0;
  std::vector<TrialOutcome> trials;
};

/// Every value reuses the same per-trial seeds so the points are matched.
std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, SweepParam p, const std::vector<double>& values,
                                  std::uint64_t master, int trials, int workers);

struct Summary {
  int ok = 0;
  int failed = 0;
  double scnr_mean = 0.0;
  double scnr_se = 0.0;
  double rate_mean = 0.0;
  double rate_se = 0.0;
  double mse_mean = 0.0;
};

/// Mean and standard error over the successful trials.
Summary summarize(const std::vector<TrialOutcome>& trials);

Table convergence_table(const ScenarioConfig& cfg, std::uint64_t seed, const std::vector<OuterStep>& trace);
/// Trial-averaged traces; converged trials hold their final value.
std::vector<OuterStep> mean_trace(const std::vector<TrialOutcome>& trials);

struct BeampatternComparison {
  std::vector<double> grid;
  std::vector<double> proposed_db;
  std::vector<double> no_taper_db;
  std::vector<double> reference_db;
};

/// Proposed design, the same pipeline with zero taper width, and R0 seen
/// through the proposed filter.
BeampatternComparison compare_beampatterns(const ScenarioConfig& cfg, std::uint64_t seed);
Table beampattern_table(const ScenarioConfig& cfg, std::uint64_t seed, const BeampatternComparison& c);

Table montecarlo_table(const ScenarioConfig& cfg, std::uint64_t seed, const std::vector<TrialOutcome>& trials);
Table tradeoff_table(const ScenarioConfig& cfg, std::uint64_t seed, SweepParam p,
                     const std::vector<SweepPoint>& points);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

}  // namespace isac
