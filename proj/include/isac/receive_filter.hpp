#pragma once

#include "isac/clutter_taper.hpp"

namespace isac {

enum class FilterMethod {
  mvdr,                // w ~ Phi_cn^{-1} a_r(theta_0) via a square-root solve
  generalized_eigen,   // whitened top eigenvector of Phi_cn^{-1} Phi
};

/// Maximizes w^H Phi(R) w / w^H Phi_cn(R) w. The result has unit norm and
/// the phase convention of fix_phase.
CVector design_filter(const InterferenceModel& model, const HermitianMatrix& r,
                      FilterMethod method = FilterMethod::mvdr);

/// w^H y.
Complex apply_filter(const CVector& w, const CVector& y);

/// Rotates w by a unit phase so its largest-magnitude entry is real
/// positive; among entries equal to within 1e-9 relative, the first one.
CVector fix_phase(const CVector& w);

}  // namespace isac
