#include "isac/receive_filter.hpp"

#include <cmath>

namespace isac {

namespace {

// Upper-triangular U with U^H U = Phi_cn = sigma^2 I + B B^H, from a QR of
// the stacked [sigma I; B^H]. Avoids forming the badly conditioned Phi_cn.
CMatrix square_root_factor(const InterferenceModel& model, const HermitianMatrix& r) {
  const int n = model.num_rx();
  const int rank = static_cast<int>(model.taper_factor.cols());
  const int p = model.num_clutter();
  CMatrix stacked = CMatrix::Zero(n + p * rank, n);
  stacked.topRows(n) = std::sqrt(model.noise_power) * CMatrix::Identity(n, n);
  const CMatrix g = model.taper_factor.cast<Complex>();
  for (int i = 0; i < p; ++i) {
    const double c = model.clutter_powers[static_cast<size_t>(i)] *
                     r.quadratic_form(model.clutter_tx[static_cast<size_t>(i)]);
    const auto& a = model.clutter_rx[static_cast<size_t>(i)];
    // B_i = sqrt(c) diag(a) G, so B_i^H = sqrt(c) G^T diag(conj a).
    stacked.middleRows(n + i * rank, rank) =
        std::sqrt(std::max(c, 0.0)) * g.transpose() * a.conjugate().asDiagonal();
  }
  Eigen::HouseholderQR<CMatrix> qr(stacked);
  CMatrix u = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (!(std::abs(u(i, i)) > 0.0) || !std::isfinite(std::abs(u(i, i))))
      throw LinalgError("tapered clutter-plus-noise covariance is singular");
  return u;
}

}  // namespace

CVector fix_phase(const CVector& w) {
  const double peak = w.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return w;
  // First entry within rounding of the peak, so equal-magnitude ties
  // resolve the same way for every solve path.
  Eigen::Index arg = 0;
  while (std::abs(w(arg)) < (1.0 - 1e-9) * peak) ++arg;
  const double mag = std::abs(w(arg));
  CVector out = w * (std::conj(w(arg)) / mag);
  out(arg) = mag;
  return out;
}

CVector design_filter(const InterferenceModel& model, const HermitianMatrix& r, FilterMethod method) {
  if (r.dim() != model.num_tx()) throw std::invalid_argument("covariance dimension mismatch");
  CVector w;
  if (method == FilterMethod::mvdr) {
    const CMatrix u = square_root_factor(model, r);
    const CVector z = u.adjoint().triangularView<Eigen::Lower>().solve(model.target_rx);
    w = u.triangularView<Eigen::Upper>().solve(z);
  } else {
    const HermitianMatrix phi_cn = tapered_cn_covariance(model, r);
    Eigen::LLT<CMatrix> llt(phi_cn.matrix());
    if (llt.info() != Eigen::Success)
      throw LinalgError("tapered clutter-plus-noise covariance is not positive definite");
    const CMatrix l = llt.matrixL();
    // L^{-1} a a^H L^{-H}: whitened target covariance.
    const CVector b = l.triangularView<Eigen::Lower>().solve(model.target_rx);
    const EigenDecomposition eig = eig_hermitian(HermitianMatrix::outer(b));
    const CVector top = eig.vectors.col(eig.values.size() - 1);
    w = l.adjoint().triangularView<Eigen::Upper>().solve(top);
  }
  const double nrm = w.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw LinalgError("receive filter design failed");
  return fix_phase(w / nrm);
}

Complex apply_filter(const CVector& w, const CVector& y) {
  if (w.size() != y.size()) throw std::invalid_argument("filter and snapshot sizes differ");
  return w.dot(y);
}

}  // namespace isac
