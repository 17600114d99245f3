#include "isac/clutter_taper.hpp"

#include <cmath>
#include <numbers>

namespace isac {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

HermitianMatrix mz_taper(int dim, double delta) {
  if (dim < 1) throw std::invalid_argument("taper dimension must be positive");
  if (!(delta >= 0.0)) throw std::invalid_argument("taper width must be non-negative");
  CMatrix t(dim, dim);
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) t(m, n) = sinc((m - n) * delta);
  return HermitianMatrix(t);
}

InterferenceModel InterferenceModel::from_config(const ScenarioConfig& cfg) {
  InterferenceModel model;
  model.target_tx = steering_tx(cfg, cfg.target_angle_deg);
  model.target_rx = steering_rx(cfg, cfg.target_angle_deg);
  model.target_power = cfg.target_power;
  for (double theta : cfg.clutter_angles_deg) {
    model.clutter_tx.push_back(steering_tx(cfg, theta));
    model.clutter_rx.push_back(steering_rx(cfg, theta));
    model.clutter_powers.push_back(cfg.clutter_power_per_source);
  }
  model.noise_power = cfg.bs_noise_mw();
  model.taper = mz_taper(cfg.rx(), cfg.taper_width);

  // Jacobi rotations keep a real symmetric input real, so the imaginary
  // parts of the eigenvectors are exactly zero.
  const EigenDecomposition eig = eig_hermitian(model.taper);
  const RVector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  model.taper_factor = eig.vectors.real() * root.asDiagonal();
  return model;
}

double target_quadratic(const InterferenceModel& model, const HermitianMatrix& r, const CVector& w) {
  const double gain = std::norm(w.dot(model.target_rx));
  return model.target_power * gain * r.quadratic_form(model.target_tx);
}

double tapered_gain(const InterferenceModel& model, int p, const CVector& w) {
  const CVector u = model.clutter_rx[static_cast<size_t>(p)].conjugate().cwiseProduct(w);
  return (model.taper_factor.transpose().cast<Complex>() * u).squaredNorm();
}

double tapered_cn_quadratic(const InterferenceModel& model, const HermitianMatrix& r,
                            const CVector& w) {
  double total = model.noise_power * w.squaredNorm();
  for (int p = 0; p < model.num_clutter(); ++p) {
    const double c = model.clutter_powers[static_cast<size_t>(p)] *
                     r.quadratic_form(model.clutter_tx[static_cast<size_t>(p)]);
    total += c * tapered_gain(model, p, w);
  }
  return total;
}

HermitianMatrix cn_linear_coefficients(const InterferenceModel& model, const CVector& w) {
  CMatrix q = CMatrix::Zero(model.num_tx(), model.num_tx());
  for (int p = 0; p < model.num_clutter(); ++p) {
    const auto& a = model.clutter_tx[static_cast<size_t>(p)];
    q += (model.clutter_powers[static_cast<size_t>(p)] * tapered_gain(model, p, w)) * (a * a.adjoint());
  }
  return HermitianMatrix::hermitian_part(q);
}

HermitianMatrix target_linear_coefficients(const InterferenceModel& model, const CVector& w) {
  const double gain = model.target_power * std::norm(w.dot(model.target_rx));
  return gain * HermitianMatrix::outer(model.target_tx);
}

HermitianMatrix tapered_cn_covariance(const InterferenceModel& model, const HermitianMatrix& r) {
  const int n = model.num_rx();
  CMatrix phi = model.noise_power * CMatrix::Identity(n, n);
  for (int p = 0; p < model.num_clutter(); ++p) {
    const auto& ar = model.clutter_rx[static_cast<size_t>(p)];
    const double c = model.clutter_powers[static_cast<size_t>(p)] *
                     r.quadratic_form(model.clutter_tx[static_cast<size_t>(p)]);
    phi += c * (ar * ar.adjoint());
  }
  return HermitianMatrix::hermitian_part(phi.cwiseProduct(model.taper.matrix()));
}

}  // namespace isac
