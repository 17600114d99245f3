#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "isac/experiments.hpp"
#include "json.hpp"

using namespace isac;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  bool emit_plots = false;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int trials = 50;
};

void add_common(CLI::App* cmd, Common& c, bool with_trials) {
  cmd->add_option("--config", c.config, "Scenario YAML file (defaults apply when omitted)");
  cmd->add_option("--seed", c.seed, "Master seed (overrides rng_seed)");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_flag("--emit-plots", c.emit_plots, "Write SVG charts next to the CSVs");
  cmd->add_option("--workers", c.workers, "Concurrent trials")->check(CLI::PositiveNumber)->capture_default_str();
  if (with_trials)
    cmd->add_option("--trials", c.trials, "Monte Carlo trials")->check(CLI::PositiveNumber)->capture_default_str();
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = c.config.empty() ? ScenarioConfig{} : load_config(c.config);
  if (c.seed) cfg.rng_seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::string path_in(const Common& c, const std::string& name) { return (std::filesystem::path(c.out) / name).string(); }

void write_json(const Common& c, const json& j) { write_text(path_in(c, "summary.json"), j.dump(2) + "\n"); }

json trial_json(const TrialOutcome& t) {
  json j{{"trial", t.index}, {"seed", t.seed}, {"status", static_cast<int>(t.status)}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

json summary_json(const Summary& s) {
  return {{"trials_ok", s.ok},         {"trials_failed", s.failed}, {"scnr_db_mean", s.scnr_mean},
          {"scnr_db_se", s.scnr_se},   {"sum_rate_mean", s.rate_mean}, {"sum_rate_se", s.rate_se},
          {"beampattern_mse_mean", s.mse_mean}};
}

json failures(const std::vector<TrialOutcome>& trials) {
  json list = json::array();
  for (const TrialOutcome& t : trials)
    if (t.status != TrialStatus::ok) list.push_back(trial_json(t));
  return list;
}

Series trace_series(const std::string& name, const std::vector<OuterStep>& trace, bool mse) {
  Series s{name, {}, {}};
  for (const OuterStep& step : trace) {
    s.x.push_back(step.iteration);
    s.y.push_back(mse ? step.beampattern_mse : linear_to_db(step.scnr));
  }
  return s;
}

int cmd_design(const Common& c) {
  const ScenarioConfig cfg = load(c);
  const auto start = std::chrono::steady_clock::now();
  const DesignRun run = run_design(cfg, cfg.rng_seed);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(path_in(c, "convergence.csv"), to_csv(convergence_table(cfg, cfg.rng_seed, run.solution.scnr_trace)));
  const MetricsReport& r = run.report;
  write_json(c, {{"command", "design"},
                 {"config_hash", hex64(config_hash(cfg))},
                 {"seed", cfg.rng_seed},
                 {"converged", run.solution.converged},
                 {"outer_iterations", run.solution.outer_iterations},
                 {"scnr_db", r.scnr_db},
                 {"sinr_db", r.sinr_db},
                 {"sum_rate", r.sum_rate_bits},
                 {"beampattern_mse", r.beampattern_mse},
                 {"similarity_error_mw", r.similarity_error},
                 {"similarity_radius_mw", cfg.similarity_radius_mw()},
                 {"total_power_mw", r.total_power},
                 {"max_antenna_power_mw", r.max_antenna_power},
                 {"per_antenna_budget_mw", cfg.total_power_mw() / cfg.tx()},
                 {"wall_time_s", wall}});
  if (c.emit_plots)
    write_text(path_in(c, "convergence.svg"),
               svg_line_chart("Beampattern MSE", "outer iteration", "MSE",
                              {trace_series("proposed", run.solution.scnr_trace, true)}));
  std::cout << "scnr_db " << format_number(r.scnr_db) << " sum_rate " << format_number(r.sum_rate_bits)
            << (run.solution.converged ? " converged" : " not converged") << " after "
            << run.solution.outer_iterations << " iterations\n";
  return 0;
}

int cmd_beampattern(const Common& c) {
  const ScenarioConfig cfg = load(c);
  const BeampatternComparison cmp = compare_beampatterns(cfg, cfg.rng_seed);
  write_text(path_in(c, "beampattern.csv"), to_csv(beampattern_table(cfg, cfg.rng_seed, cmp)));
  if (c.emit_plots)
    write_text(path_in(c, "beampattern.svg"),
               svg_line_chart("Receive beampattern", "angle (deg)", "gain (dB)",
                              {{"proposed", cmp.grid, cmp.proposed_db},
                               {"no taper", cmp.grid, cmp.no_taper_db},
                               {"reference", cmp.grid, cmp.reference_db}}));
  return 0;
}

int cmd_convergence(const Common& c) {
  const ScenarioConfig cfg = load(c);
  const std::vector<TrialOutcome> trials = run_trials(cfg, cfg.rng_seed, c.trials, c.workers);
  const std::vector<OuterStep> trace = mean_trace(trials);
  write_text(path_in(c, "convergence.csv"), to_csv(convergence_table(cfg, cfg.rng_seed, trace)));
  int converged = 0;
  for (const TrialOutcome& t : trials) converged += t.status == TrialStatus::ok && t.converged;
  json j = summary_json(summarize(trials));
  j["command"] = "convergence";
  j["trials_converged"] = converged;
  j["failures"] = failures(trials);
  write_json(c, j);
  if (c.emit_plots)
    write_text(path_in(c, "convergence.svg"),
               svg_line_chart("Mean beampattern MSE", "outer iteration", "MSE", {trace_series("mean", trace, true)}));
  return 0;
}

int cmd_sweep(const Common& c, const std::string& param, const std::vector<double>& values) {
  const ScenarioConfig cfg = load(c);
  const SweepParam p = parse_sweep_param(param);
  const std::vector<SweepPoint> points = run_sweep(cfg, p, values, cfg.rng_seed, c.trials, c.workers);
  write_text(path_in(c, "tradeoff.csv"), to_csv(tradeoff_table(cfg, cfg.rng_seed, p, points)));
  json j{{"command", "sweep"}, {"param", param}, {"points", json::array()}};
  Series scnr{"scnr_db", {}, {}}, rate{"sum_rate", {}, {}};
  for (const SweepPoint& pt : points) {
    const Summary s = summarize(pt.trials);
    json entry = summary_json(s);
    entry["value"] = pt.value;
    entry["failures"] = failures(pt.trials);
    j["points"].push_back(entry);
    scnr.x.push_back(pt.value);
    scnr.y.push_back(s.scnr_mean);
    rate.x.push_back(pt.value);
    rate.y.push_back(s.rate_mean);
  }
  write_json(c, j);
  if (c.emit_plots) {
    write_text(path_in(c, "tradeoff_scnr.svg"), svg_line_chart("Sensing SCNR", param, "SCNR (dB)", {scnr}));
    write_text(path_in(c, "tradeoff_rate.svg"), svg_line_chart("Sum rate", param, "bit/s/Hz", {rate}));
  }
  return 0;
}

int cmd_montecarlo(const Common& c) {
  const ScenarioConfig cfg = load(c);
  const std::vector<TrialOutcome> trials = run_trials(cfg, cfg.rng_seed, c.trials, c.workers);
  write_text(path_in(c, "montecarlo.csv"), to_csv(montecarlo_table(cfg, cfg.rng_seed, trials)));
  json j = summary_json(summarize(trials));
  j["command"] = "montecarlo";
  j["failures"] = failures(trials);
  write_json(c, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clutter-aware ISAC transmit and receive beamforming design"};
  app.require_subcommand(1);
  Common design, pattern, convergence, sweep, montecarlo;
  std::string param;
  std::vector<double> values;

  auto* c_design = app.add_subcommand("design", "Run one design and write its convergence trace");
  add_common(c_design, design, false);
  auto* c_pattern = app.add_subcommand("beampattern", "Compare tapered, untapered and reference beampatterns");
  add_common(c_pattern, pattern, false);
  auto* c_conv = app.add_subcommand("convergence", "Trial-averaged convergence traces");
  add_common(c_conv, convergence, true);
  auto* c_sweep = app.add_subcommand("sweep", "Sweep one parameter over a value list");
  add_common(c_sweep, sweep, true);
  c_sweep->add_option("--param", param, "delta | gamma_db | alpha | num_antennas")->required();
  c_sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  auto* c_mc = app.add_subcommand("montecarlo", "Independent trials with per-trial rows and aggregates");
  add_common(c_mc, montecarlo, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const Common& active = c_design->parsed()    ? design
                         : c_pattern->parsed() ? pattern
                         : c_conv->parsed()    ? convergence
                         : c_sweep->parsed()   ? sweep
                                               : montecarlo;
  try {
    std::filesystem::create_directories(active.out);
    if (c_design->parsed()) return cmd_design(design);
    if (c_pattern->parsed()) return cmd_beampattern(pattern);
    if (c_conv->parsed()) return cmd_convergence(convergence);
    if (c_sweep->parsed()) return cmd_sweep(sweep, param, values);
    return cmd_montecarlo(montecarlo);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const QoSInfeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  }
}
