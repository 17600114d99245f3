#include "isac/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace isac {

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("row width does not match the columns");
  rows.push_back(std::move(row));
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

namespace {

std::string quote_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) line += ',';
    line += quote_cell(cells[i]);
  }
  return line + '\n';
}

std::string status_name(TrialStatus s) {
  switch (s) {
    case TrialStatus::ok: return "ok";
    case TrialStatus::config_error: return "config_error";
    case TrialStatus::infeasible: return "infeasible";
    case TrialStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

Table base_table(const ScenarioConfig& cfg, std::uint64_t seed) {
  Table t;
  t.meta = {{"config_hash", hex64(config_hash(cfg))}, {"seed", std::to_string(seed)}};
  return t;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (const auto& [k, v] : table.meta) out += "# " + k + "=" + v + '\n';
  out += join_row(table.columns);
  for (const auto& row : table.rows) out += join_row(row);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path);
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : to_yaml(cfg)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over a per-index offset.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DesignRun run_design(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  DesignRun run;
  Rng rng(seed);
  run.channels = draw_channels(cfg, rng);
  run.solution = run_algorithm1(cfg, run.channels);
  run.report = evaluate_solution(cfg, run.channels, run.solution);
  return run;
}

TrialOutcome run_trial(const ScenarioConfig& cfg, int index, std::uint64_t seed) {
  TrialOutcome out;
  out.index = index;
  out.seed = seed;
  try {
    const DesignRun run = run_design(cfg, seed);
    out.converged = run.solution.converged;
    out.outer_iterations = run.solution.outer_iterations;
    out.scnr_db = run.report.scnr_db;
    out.sum_rate = run.report.sum_rate_bits;
    out.beampattern_mse = run.report.beampattern_mse;
    out.min_sinr_db = run.report.sinr_db.empty()
                          ? std::numeric_limits<double>::infinity()
                          : *std::min_element(run.report.sinr_db.begin(), run.report.sinr_db.end());
    out.trace = run.solution.scnr_trace;
  } catch (const ConfigError& e) {
    out.status = TrialStatus::config_error;
    out.error = e.what();
  } catch (const std::invalid_argument& e) {
    out.status = TrialStatus::config_error;
    out.error = e.what();
  } catch (const QoSInfeasible& e) {
    out.status = TrialStatus::infeasible;
    out.error = e.what();
  } catch (const std::exception& e) {
    out.status = TrialStatus::numerical_failure;
    out.error = e.what();
  }
  return out;
}

std::vector<TrialOutcome> run_trials(const ScenarioConfig& cfg, std::uint64_t master, int trials,
                                     int workers) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  std::vector<TrialOutcome> out(static_cast<size_t>(trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < trials; i = next++)
      out[static_cast<size_t>(i)] = run_trial(cfg, i, trial_seed(master, static_cast<std::uint64_t>(i)));
  };
  const int n = std::clamp(workers, 1, trials);
  if (n == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "delta") return SweepParam::delta;
  if (name == "gamma_db") return SweepParam::gamma_db;
  if (name == "alpha") return SweepParam::alpha;
  if (name == "num_antennas") return SweepParam::num_antennas;
  throw ConfigError("unknown sweep parameter '" + name + "' (expected delta, gamma_db, alpha or num_antennas)");
}

std::string sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::delta: return "delta";
    case SweepParam::gamma_db: return "gamma_db";
    case SweepParam::alpha: return "alpha";
    case SweepParam::num_antennas: return "num_antennas";
  }
  return "unknown";
}

ScenarioConfig apply_sweep(const ScenarioConfig& cfg, SweepParam p, double value) {
  ScenarioConfig c = cfg;
  switch (p) {
    case SweepParam::delta: c.taper_width = value; break;
    case SweepParam::gamma_db: c.sinr_threshold_db = value; break;
    case SweepParam::alpha: c.similarity_coeff = value; break;
    case SweepParam::num_antennas: {
      const int m = static_cast<int>(std::lround(value));
      if (std::abs(value - m) > 1e-9) throw ConfigError("num_antennas values must be integers");
      c.num_tx_antennas = m;
      if (c.num_rx_antennas > 0) c.num_rx_antennas = m;
      break;
    }
  }
  c.validate();
  return c;
}

std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, SweepParam p, const std::vector<double>& values,
                                  std::uint64_t master, int trials, int workers) {
  if (values.empty()) throw ConfigError("sweep value list is empty");
  std::vector<SweepPoint> points;
  for (double v : values) points.push_back({v, run_trials(apply_sweep(cfg, p, v), master, trials, workers)});
  return points;
}

Summary summarize(const std::vector<TrialOutcome>& trials) {
  std::vector<double> scnr, rate, mse;
  Summary s;
  for (const TrialOutcome& t : trials) {
    if (t.status != TrialStatus::ok) {
      ++s.failed;
      continue;
    }
    ++s.ok;
    scnr.push_back(t.scnr_db);
    rate.push_back(t.sum_rate);
    mse.push_back(t.beampattern_mse);
  }
  s.scnr_mean = mean_of(scnr);
  s.scnr_se = standard_error(scnr);
  s.rate_mean = mean_of(rate);
  s.rate_se = standard_error(rate);
  s.mse_mean = mean_of(mse);
  return s;
}

Table convergence_table(const ScenarioConfig& cfg, std::uint64_t seed, const std::vector<OuterStep>& trace) {
  Table t = base_table(cfg, seed);
  t.columns = {"outer_iter", "scnr_db", "beampattern_mse"};
  for (const OuterStep& s : trace)
    t.add_row({std::to_string(s.iteration), format_number(linear_to_db(s.scnr)), format_number(s.beampattern_mse)});
  return t;
}

std::vector<OuterStep> mean_trace(const std::vector<TrialOutcome>& trials) {
  size_t length = 0;
  int count = 0;
  for (const TrialOutcome& t : trials)
    if (t.status == TrialStatus::ok && !t.trace.empty()) {
      length = std::max(length, t.trace.size());
      ++count;
    }
  std::vector<OuterStep> out(length);
  if (count == 0) return out;
  for (size_t i = 0; i < length; ++i) {
    double scnr_db = 0.0;
    double mse = 0.0;
    for (const TrialOutcome& t : trials) {
      if (t.status != TrialStatus::ok || t.trace.empty()) continue;
      const OuterStep& s = t.trace[std::min(i, t.trace.size() - 1)];
      scnr_db += linear_to_db(s.scnr);
      mse += s.beampattern_mse;
    }
    out[i].iteration = static_cast<int>(i) + 1;
    out[i].scnr = db_to_linear(scnr_db / count);
    out[i].beampattern_mse = mse / count;
  }
  return out;
}

BeampatternComparison compare_beampatterns(const ScenarioConfig& cfg, std::uint64_t seed) {
  BeampatternComparison c;
  c.grid = angle_grid();
  const DesignRun proposed = run_design(cfg, seed);
  ScenarioConfig flat = cfg;
  flat.taper_width = 0.0;
  const DesignRun plain = run_design(flat, seed);
  c.proposed_db = proposed.report.beampattern_db;
  c.no_taper_db = plain.report.beampattern_db;
  c.reference_db = relative_gain_db(beampattern(cfg, reference_covariance(cfg), proposed.solution.w, c.grid));
  return c;
}

Table beampattern_table(const ScenarioConfig& cfg, std::uint64_t seed, const BeampatternComparison& c) {
  Table t = base_table(cfg, seed);
  t.columns = {"angle_deg", "gain_db_proposed", "gain_db_no_taper", "gain_db_reference"};
  for (size_t i = 0; i < c.grid.size(); ++i)
    t.add_row({format_number(c.grid[i]), format_number(c.proposed_db[i]), format_number(c.no_taper_db[i]),
               format_number(c.reference_db[i])});
  return t;
}

Table montecarlo_table(const ScenarioConfig& cfg, std::uint64_t seed, const std::vector<TrialOutcome>& trials) {
  Table t = base_table(cfg, seed);
  t.columns = {"trial", "seed", "status", "converged", "outer_iterations", "scnr_db", "sum_rate", "beampattern_mse"};
  for (const TrialOutcome& r : trials) {
    const bool ok = r.status == TrialStatus::ok;
    const std::string nan = "nan";
    t.add_row({std::to_string(r.index), std::to_string(r.seed), status_name(r.status), ok && r.converged ? "1" : "0",
               std::to_string(r.outer_iterations), ok ? format_number(r.scnr_db) : nan,
               ok ? format_number(r.sum_rate) : nan, ok ? format_number(r.beampattern_mse) : nan});
  }
  const Summary s = summarize(trials);
  int converged = 0;
  for (const TrialOutcome& r : trials) converged += r.status == TrialStatus::ok && r.converged;
  t.add_row({"mean", "", std::to_string(s.ok) + "/" + std::to_string(s.ok + s.failed), std::to_string(converged), "",
             format_number(s.scnr_mean), format_number(s.rate_mean), format_number(s.mse_mean)});
  t.add_row({"stderr", "", "", "", "", format_number(s.scnr_se), format_number(s.rate_se), ""});
  return t;
}

Table tradeoff_table(const ScenarioConfig& cfg, std::uint64_t seed, SweepParam p,
                     const std::vector<SweepPoint>& points) {
  Table t = base_table(cfg, seed);
  t.meta.emplace_back("param", sweep_param_name(p));
  t.columns = {"value", "trials_ok", "trials_failed", "scnr_db_mean", "scnr_db_se", "sum_rate_mean", "sum_rate_se"};
  for (const SweepPoint& pt : points) {
    const Summary s = summarize(pt.trials);
    t.add_row({format_number(pt.value), std::to_string(s.ok), std::to_string(s.failed), format_number(s.scnr_mean),
               format_number(s.scnr_se), format_number(s.rate_mean), format_number(s.rate_se)});
  }
  return t;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  constexpr double width = 640, height = 420, left = 70, right = 150, top = 40, bottom = 55;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series)
    for (size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << format_number(xv)
      << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << format_number(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
    << escape_xml(x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape_xml(y_label) << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < std::min(series[s].x.size(), series[s].y.size()); ++i)
      if (std::isfinite(series[s].x[i]) && std::isfinite(series[s].y[i]))
        o << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    o << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series[s].name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace isac
