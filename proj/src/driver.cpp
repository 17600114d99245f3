#include "isac/driver.hpp"

#include <algorithm>
#include <cmath>

namespace isac {

std::vector<double> normalized_pattern(const ScenarioConfig& cfg, const HermitianMatrix& r,
                                       const CVector& w, const std::vector<double>& grid) {
  std::vector<double> p = beampattern(cfg, r, w, grid);
  const double peak = p.empty() ? 0.0 : *std::max_element(p.begin(), p.end());
  if (peak > 0.0)
    for (double& v : p) v /= peak;
  return p;
}

DesignSolution run_algorithm1(const ScenarioConfig& cfg, const ChannelSet& channels) {
  cfg.validate();
  if (channels.num_users() != cfg.num_users)
    throw std::invalid_argument("channel set does not match num_users");
  const InterferenceModel model = InterferenceModel::from_config(cfg);
  const HermitianMatrix r0 = reference_covariance(cfg);
  const std::vector<double> grid = angle_grid();

  DesignSolution sol;
  sol.design = initial_design(cfg, channels);
  for (int n = 1; n <= cfg.max_outer_iterations; ++n) {
    sol.w = design_filter(model, sol.design.r);
    sol.design = qt_optimize(cfg, model, channels, sol.w, sol.design);
    sol.qt_traces.push_back(sol.design.qt_trace);
    const double rho = scnr(model, sol.design.r, sol.w);
    const double mse = beampattern_mse(normalized_pattern(cfg, r0, sol.w, grid),
                                       normalized_pattern(cfg, sol.design.r, sol.w, grid));
    sol.scnr_trace.push_back({n, rho, mse});
    sol.outer_iterations = n;
    if (n > 1) {
      const double prev = sol.scnr_trace[static_cast<size_t>(n - 2)].scnr;
      if (std::abs(rho - prev) / prev < cfg.convergence_tol) {
        sol.converged = true;
        break;
      }
    }
  }
  minimize_communication_power(cfg, channels, sol.design);
  extract_beamformers(sol.design, channels);
  return sol;
}

MetricsReport evaluate_solution(const ScenarioConfig& cfg, const ChannelSet& channels,
                                const DesignSolution& solution, const std::vector<double>& grid) {
  const InterferenceModel model = InterferenceModel::from_config(cfg);
  const BeamformerSet beams{solution.design.w_c, solution.design.w_s};
  const HermitianMatrix r = beams.covariance();
  MetricsReport rep;
  rep.scnr_db = linear_to_db(scnr(model, r, solution.w));
  const RVector sinr = user_sinr(channels, beams.w_c, beams.w_s, cfg.user_noise_mw());
  for (double g : sinr) rep.sinr_db.push_back(linear_to_db(g));
  rep.sum_rate_bits = sum_rate(sinr);
  rep.grid = grid;
  rep.beampattern_db = relative_gain_db(beampattern(cfg, r, solution.w, grid));
  rep.beampattern_mse = beampattern_mse(normalized_pattern(cfg, reference_covariance(cfg), solution.w, grid),
                                        normalized_pattern(cfg, r, solution.w, grid));
  rep.similarity_error = (reference_covariance(cfg).matrix() - r.matrix()).norm();
  rep.total_power = r.trace();
  rep.max_antenna_power = r.matrix().diagonal().real().maxCoeff();
  return rep;
}

}  // namespace isac
