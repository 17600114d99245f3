#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "isac/clutter_taper.hpp"
#include "isac/cone_solver.hpp"
#include "isac/scenario.hpp"

namespace isac {

/// The per-user SINR thresholds cannot be met within the power budget.
class QoSInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The solver or a factorization did not reach the required accuracy.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// R - sum_k w_k w_k^H is indefinite beyond tolerance.
class TightnessViolation : public NumericalFailure {
 public:
  explicit TightnessViolation(double min_eigenvalue);
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

struct QtStep {
  int iteration = 0;
  double g = 0.0;
};

struct TransmitDesign {
  HermitianMatrix r;                  // mW
  std::vector<HermitianMatrix> r_k;   // mW
  double y = 0.0;
  CMatrix w_c;                        // M x K, sqrt(mW)
  CMatrix w_s;                        // M x M'
  std::vector<QtStep> qt_trace;
  int solver_iterations = 0;          // summed over inner iterations
  std::optional<cone::SolverState> solver_state;
};

/// y* = sqrt(w^H Phi w) / (w^H Phi_cn w).
double update_y(const InterferenceModel& model, const CVector& w, const HermitianMatrix& r);

/// g(R, y) = 2 y sqrt(w^H Phi(R) w) - y^2 w^H Phi_cn(R) w.
double qt_objective(const InterferenceModel& model, const CVector& w, const HermitianMatrix& r,
                    double y);

struct SubproblemOptions {
  /// Constraints are tightened by this absolute amount (in units of the
  /// power-normalized covariance) so the solver's residual cannot push
  /// the returned point outside the feasible set.
  double margin = 0.0;
  /// Congruence D for the solver variables; empty means identity.
  CMatrix preconditioner;
  /// Replaces the objective by a slack t added to every QoS row
  /// (f_k >= t ||row_k||) and drops the target epigraph.
  bool feasibility = false;
};

/// Convex subproblem in power-normalized variables R' = R / Pt and
/// R'_k = R_k / Pt, plus an epigraph scalar s' with s'^2 <= trace(F R').
/// The blocks hold X with R' = D X D^H for the preconditioner D.
struct Subproblem {
  cone::ConeProgram program;
  int r_block = -1;
  std::vector<int> rk_blocks;
  int s_block = -1;  // t in feasibility mode
  double power = 1.0;  // Pt, mW
  double y = 0.0;
  double noise_term = 0.0;  // sigma^2 ||w||^2
  CMatrix preconditioner;   // D

  /// g(R, y) from the program objective, assuming s' is tight.
  double to_g(double objective) const;
  cone::BlockValues encode(const HermitianMatrix& r, const std::vector<HermitianMatrix>& r_k,
                           double s_normalized) const;
  /// R (mW) from a block value.
  HermitianMatrix decode(const CMatrix& block) const;
};

/// D = (I + Q / tau)^{-1/2}, which bounds D^H Q D by tau.
CMatrix cost_preconditioner(const HermitianMatrix& q, double tau);

Subproblem assemble_subproblem(const ScenarioConfig& cfg, const InterferenceModel& model,
                               const ChannelSet& channels, const CVector& w, double y,
                               const SubproblemOptions& options = {});

/// Largest t such that every QoS row holds with slack t ||row_k|| under
/// the same tightened constraints as the design subproblem; negative means
/// the thresholds cannot be met. Empty if the solver does not converge.
std::optional<double> qos_slack(const ScenarioConfig& cfg, const ChannelSet& channels);

/// R = (Pt/M) I, R_k = Pt/(2MK) h_k h_k^H / ||h_k||^2.
TransmitDesign initial_design(const ScenarioConfig& cfg, const ChannelSet& channels);

/// Quadratic-transform inner loop for a fixed receive filter.
TransmitDesign qt_optimize(const ScenarioConfig& cfg, const InterferenceModel& model,
                           const ChannelSet& channels, const CVector& w, const TransmitDesign& init);

/// R is optimal for the sensing objective with any split into R_k that
/// meets the QoS constraints. Scales each R_k down so that its constraint
/// holds with equality, which keeps R and R - sum R_k PSD unchanged or
/// larger and leaves every user exactly at the threshold.
void minimize_communication_power(const ScenarioConfig& cfg, const ChannelSet& channels,
                                  TransmitDesign& design);

struct RankOne {
  HermitianMatrix r_tilde;
  CVector w;
};

/// w = (h^H R h)^{-1/2} R h and R~ = w w^H.
RankOne extract_rank_one(const HermitianMatrix& r_hat, const CVector& h);

/// W_s with W_s W_s^H = R - W_c W_c^H.
CMatrix extract_sensing(const HermitianMatrix& r, const CMatrix& w_c);

/// Fills w_c and w_s of `design` from its covariances.
void extract_beamformers(TransmitDesign& design, const ChannelSet& channels);

}  // namespace isac
