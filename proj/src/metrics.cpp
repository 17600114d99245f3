#include "isac/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace isac {

double scnr(const InterferenceModel& model, const HermitianMatrix& r, const CVector& w) {
  return target_quadratic(model, r, w) / tapered_cn_quadratic(model, r, w);
}

double scnr(const InterferenceModel& model, const BeamformerSet& beams, const CVector& w) {
  return scnr(model, beams.covariance(), w);
}

RVector user_sinr(const ChannelSet& channels, const CMatrix& w_c, const CMatrix& w_s,
                  double user_noise) {
  const int k_users = channels.num_users();
  if (w_c.cols() != k_users) throw std::invalid_argument("one communication beam per user expected");
  RVector out(k_users);
  for (int k = 0; k < k_users; ++k) {
    const CVector h = channels.user(k);
    const double signal = std::norm(h.dot(w_c.col(k)));
    double interference = user_noise;
    for (int i = 0; i < k_users; ++i)
      if (i != k) interference += std::norm(h.dot(w_c.col(i)));
    for (Eigen::Index i = 0; i < w_s.cols(); ++i) interference += std::norm(h.dot(w_s.col(i)));
    out(k) = signal / interference;
  }
  return out;
}

double sum_rate(const RVector& sinr) {
  double total = 0.0;
  for (double g : sinr) total += std::log2(1.0 + g);
  return total;
}

std::vector<double> angle_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  std::vector<double> grid;
  for (long i = 0;; ++i) {
    const double theta = start + static_cast<double>(i) * step;
    if (theta >= stop - 1e-9 * step) break;
    grid.push_back(theta);
  }
  return grid;
}

std::vector<double> beampattern(const ScenarioConfig& cfg, const HermitianMatrix& r, const CVector& w,
                                const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double theta : grid) {
    const double rx = std::norm(w.dot(steering_rx(cfg, theta)));
    out.push_back(rx * r.quadratic_form(steering_tx(cfg, theta)));
  }
  return out;
}

std::vector<double> beampattern_sampled(const ScenarioConfig& cfg, const CMatrix& x, const CVector& w,
                                        const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double theta : grid) {
    const Complex gain = w.dot(steering_rx(cfg, theta));
    const CVector at = steering_tx(cfg, theta);
    // w^H a_r a_t^H x_n for every snapshot n.
    const CVector projected = x.adjoint() * at;
    out.push_back(std::norm(gain) * projected.squaredNorm() / static_cast<double>(x.cols()));
  }
  return out;
}

std::vector<double> relative_gain_db(const std::vector<double>& pattern) {
  const double peak = pattern.empty() ? 0.0 : *std::max_element(pattern.begin(), pattern.end());
  std::vector<double> out;
  out.reserve(pattern.size());
  for (double p : pattern) {
    const double db = (peak > 0.0 && p > 0.0) ? 10.0 * std::log10(p / peak) : kGainFloorDb;
    out.push_back(std::max(db, kGainFloorDb));
  }
  return out;
}

double beampattern_mse(const std::vector<double>& reference, const std::vector<double>& pattern) {
  if (reference.size() != pattern.size() || reference.empty())
    throw std::invalid_argument("beampatterns must share a non-empty grid");
  double total = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - pattern[i];
    total += d * d;
  }
  return total / static_cast<double>(reference.size());
}

}  // namespace isac
