#pragma once

#include <vector>

#include "isac/hermitian.hpp"
#include "isac/scenario.hpp"

namespace isac {

/// Mailloux-Zatman taper T_mn = sinc((m - n) delta), normalized sinc.
HermitianMatrix mz_taper(int dim, double delta);

/// Target and clutter responses with the receive-side taper.
struct InterferenceModel {
  CVector target_tx;  // a_t(theta_0)
  CVector target_rx;  // a_r(theta_0)
  double target_power = 1.0;
  std::vector<CVector> clutter_tx;
  std::vector<CVector> clutter_rx;
  std::vector<double> clutter_powers;
  double noise_power = 0.0;  // sigma^2, mW
  HermitianMatrix taper;
  /// Real factor G with G G^T = T (negative rounding eigenvalues clipped).
  RMatrix taper_factor;

  static InterferenceModel from_config(const ScenarioConfig& cfg);
  int num_tx() const { return static_cast<int>(target_tx.size()); }
  int num_rx() const { return static_cast<int>(target_rx.size()); }
  int num_clutter() const { return static_cast<int>(clutter_powers.size()); }
};

/// |alpha_0|^2 |w^H a_r0|^2 a_t0^H R a_t0 = w^H A_0 R A_0^H w.
double target_quadratic(const InterferenceModel& model, const HermitianMatrix& r, const CVector& w);

/// w^H [(sum_p |alpha_p|^2 A_p R A_p^H + sigma^2 I) o T] w.
double tapered_cn_quadratic(const InterferenceModel& model, const HermitianMatrix& r,
                            const CVector& w);

/// u_p^H T u_p with u_p = conj(a_rp) o w, evaluated as ||G^T u_p||^2.
double tapered_gain(const InterferenceModel& model, int p, const CVector& w);

/// Q with trace(Q R) + sigma^2 ||w||^2 equal to tapered_cn_quadratic.
HermitianMatrix cn_linear_coefficients(const InterferenceModel& model, const CVector& w);

/// Target coefficient F with trace(F R) = target_quadratic.
HermitianMatrix target_linear_coefficients(const InterferenceModel& model, const CVector& w);

/// Dense tapered clutter-plus-noise covariance (N_r x N_r).
HermitianMatrix tapered_cn_covariance(const InterferenceModel& model, const HermitianMatrix& r);

}  // namespace isac
