#pragma once

#include <vector>

#include "isac/clutter_taper.hpp"
#include "isac/scenario.hpp"

namespace isac {

inline constexpr double kGainFloorDb = -120.0;

/// rho = w^H Phi(R) w / w^H Phi_cn(R) w (linear).
double scnr(const InterferenceModel& model, const HermitianMatrix& r, const CVector& w);
double scnr(const InterferenceModel& model, const BeamformerSet& beams, const CVector& w);

/// Per-user SINR from the beamformers.
RVector user_sinr(const ChannelSet& channels, const CMatrix& w_c, const CMatrix& w_s,
                  double user_noise);
double sum_rate(const RVector& sinr);

/// Angles start, start+step, ... strictly below stop.
std::vector<double> angle_grid(double start = -90.0, double stop = 90.0, double step = 0.5);

/// P(theta) = |w^H a_r(theta)|^2 a_t(theta)^H R a_t(theta), linear.
std::vector<double> beampattern(const ScenarioConfig& cfg, const HermitianMatrix& r, const CVector& w,
                                const std::vector<double>& grid);
/// Sample average (1/N) sum_n |w^H A(theta) x_n|^2 over the columns of x.
std::vector<double> beampattern_sampled(const ScenarioConfig& cfg, const CMatrix& x, const CVector& w,
                                        const std::vector<double>& grid);
/// 10 log10(P / max P), floored at kGainFloorDb.
std::vector<double> relative_gain_db(const std::vector<double>& pattern);

/// Mean squared difference of two patterns on the same grid.
double beampattern_mse(const std::vector<double>& reference, const std::vector<double>& pattern);

struct MetricsReport {
  double scnr_db = 0.0;
  std::vector<double> sinr_db;
  double sum_rate_bits = 0.0;
  std::vector<double> grid;
  std::vector<double> beampattern_db;
  double beampattern_mse = 0.0;
  double similarity_error = 0.0;  // ||R0 - R||_F, mW
  double total_power = 0.0;       // trace(W W^H), mW
  double max_antenna_power = 0.0; // max_m (W W^H)_mm, mW
};

}  // namespace isac
