#pragma once

#include <vector>

#include "isac/metrics.hpp"
#include "isac/receive_filter.hpp"
#include "isac/transmit_design.hpp"

namespace isac {

struct OuterStep {
  int iteration = 0;
  double scnr = 0.0;             // linear
  double beampattern_mse = 0.0;  // peak-normalized patterns
};

struct DesignSolution {
  CVector w;
  TransmitDesign design;
  std::vector<OuterStep> scnr_trace;
  std::vector<std::vector<QtStep>> qt_traces;  // inner loop of each outer iteration
  bool converged = false;
  int outer_iterations = 0;
};

/// Alternates the receive filter and the transmit covariance until the
/// relative SCNR change drops below cfg.convergence_tol, then extracts
/// the beamformers.
DesignSolution run_algorithm1(const ScenarioConfig& cfg, const ChannelSet& channels);

/// Beampattern scaled to unit peak, the linear form of the relative-gain
/// pattern. The MSE compares R and R0 under the same filter this way.
std::vector<double> normalized_pattern(const ScenarioConfig& cfg, const HermitianMatrix& r,
                                       const CVector& w, const std::vector<double>& grid);

MetricsReport evaluate_solution(const ScenarioConfig& cfg, const ChannelSet& channels,
                                const DesignSolution& solution,
                                const std::vector<double>& grid = angle_grid());

}  // namespace isac
