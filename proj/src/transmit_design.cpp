#include "isac/transmit_design.hpp"

#include <cmath>
#include <sstream>

namespace isac {

namespace {

std::string describe_min_eig(double v) {
  std::ostringstream os;
  os << "sensing covariance residual is indefinite (min eigenvalue " << v << ")";
  return os.str();
}

cone::AffineFunctional trace_term(int block, const CMatrix& c, double constant = 0.0) {
  return {{{block, c}}, constant};
}

}  // namespace

TightnessViolation::TightnessViolation(double min_eigenvalue)
    : NumericalFailure(describe_min_eig(min_eigenvalue)), min_eigenvalue_(min_eigenvalue) {}

double update_y(const InterferenceModel& model, const CVector& w, const HermitianMatrix& r) {
  const double f = target_quadratic(model, r, w);
  const double q = tapered_cn_quadratic(model, r, w);
  if (!(q > 0.0)) throw NumericalFailure("clutter-plus-noise power must be positive");
  return std::sqrt(std::max(f, 0.0)) / q;
}

double qt_objective(const InterferenceModel& model, const CVector& w, const HermitianMatrix& r,
                    double y) {
  const double f = target_quadratic(model, r, w);
  const double q = tapered_cn_quadratic(model, r, w);
  return 2.0 * y * std::sqrt(std::max(f, 0.0)) - y * y * q;
}

double Subproblem::to_g(double objective) const {
  if (y <= 0.0) return 0.0;
  return y * y * (power * objective - noise_term);
}

cone::BlockValues Subproblem::encode(const HermitianMatrix& r, const std::vector<HermitianMatrix>& r_k,
                                     double s_normalized) const {
  const CMatrix d_inv = preconditioner.inverse();
  auto to_block = [&](const HermitianMatrix& m) {
    return CMatrix(d_inv * (m.matrix() / power) * d_inv.adjoint());
  };
  cone::BlockValues values(program.blocks().size());
  values[static_cast<size_t>(r_block)] = to_block(r);
  for (size_t k = 0; k < rk_blocks.size(); ++k) values[static_cast<size_t>(rk_blocks[k])] = to_block(r_k[k]);
  values[static_cast<size_t>(s_block)] = CMatrix::Constant(1, 1, s_normalized);
  return values;
}

HermitianMatrix Subproblem::decode(const CMatrix& block) const {
  return power * HermitianMatrix::hermitian_part(preconditioner * block * preconditioner.adjoint());
}

CMatrix cost_preconditioner(const HermitianMatrix& q, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("preconditioner scale must be positive");
  const EigenDecomposition eig = eig_hermitian(q);
  const RVector scale = (1.0 + eig.values.cwiseMax(0.0).array() / tau).rsqrt();
  return eig.vectors * scale.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

Subproblem assemble_subproblem(const ScenarioConfig& cfg, const InterferenceModel& model,
                               const ChannelSet& channels, const CVector& w, double y,
                               const SubproblemOptions& options) {
  const int m = cfg.tx();
  const int k_users = channels.num_users();
  if (k_users > m) throw std::invalid_argument("more users than transmit antennas");
  if (channels.h.rows() != m && k_users > 0) throw std::invalid_argument("channel dimension mismatch");
  if (w.size() != model.num_rx()) throw std::invalid_argument("receive filter dimension mismatch");

  Subproblem sub;
  sub.preconditioner =
      options.preconditioner.size() > 0 ? options.preconditioner : CMatrix(CMatrix::Identity(m, m));
  const CMatrix& dm = sub.preconditioner;
  // trace(C R') = trace(D^H C D X).
  auto pull = [&](const CMatrix& c) { return CMatrix(dm.adjoint() * c * dm); };
  sub.power = cfg.total_power_mw();
  sub.y = y;
  sub.noise_term = model.noise_power * w.squaredNorm();
  auto& prog = sub.program;

  sub.r_block = prog.add_block("R", cone::BlockKind::hermitian, m);
  for (int k = 0; k < k_users; ++k)
    sub.rk_blocks.push_back(prog.add_block("R_" + std::to_string(k + 1), cone::BlockKind::hermitian, m));
  sub.s_block = prog.add_scalar(options.feasibility ? "t" : "s");

  // g = y^2 Pt [ (2 / (y sqrt(Pt))) s' - trace(Q R') ] - y^2 sigma^2 ||w||^2
  cone::AffineFunctional objective;
  if (options.feasibility) {
    objective.terms.push_back({sub.s_block, CMatrix::Constant(1, 1, 1.0)});
  } else if (y > 0.0) {
    objective.terms.push_back({sub.s_block, CMatrix::Constant(1, 1, 2.0 / (y * std::sqrt(sub.power)))});
    objective.terms.push_back({sub.r_block, -pull(cn_linear_coefficients(model, w).matrix())});
  } else {
    objective.terms.push_back({sub.s_block, CMatrix::Constant(1, 1, 1.0)});
  }
  prog.set_objective(objective);

  cone::AffineMatrixMap residual{{{sub.r_block, 1.0, {}}}, {}};
  for (int b : sub.rk_blocks) residual.terms.push_back({b, -1.0, {}});
  prog.add_constraint(k_users > 0 ? "R - sum R_k psd" : "R psd", cone::PsdCone{residual});
  for (int k = 0; k < k_users; ++k)
    prog.add_constraint("R_" + std::to_string(k + 1) + " psd",
                        cone::PsdCone{{{{sub.rk_blocks[static_cast<size_t>(k)], 1.0, {}}}, {}}});

  for (int i = 0; i < m; ++i) {
    CMatrix e = CMatrix::Zero(m, m);
    e(i, i) = -1.0;
    prog.add_constraint("power antenna " + std::to_string(i + 1),
                        cone::Inequality{trace_term(sub.r_block, pull(e), 1.0 / m - options.margin)});
  }

  const CMatrix r0 = reference_covariance(cfg).matrix() / sub.power;
  const double radius = std::max(cfg.similarity_radius_mw() / sub.power - options.margin, 0.0);
  prog.add_constraint("similarity", cone::FrobeniusBall{{{{sub.r_block, 1.0, dm}}, -r0}, radius});

  const double gamma = cfg.sinr_threshold_linear();
  const double user_noise = cfg.user_noise_mw() / sub.power;
  for (int k = 0; k < k_users; ++k) {
    const CVector h = channels.user(k);
    const CMatrix hh = h * h.adjoint();
    const CMatrix hh_x = pull(hh);
    const double row_norm = std::hypot((1.0 + 1.0 / gamma) * h.squaredNorm(), h.squaredNorm());
    cone::AffineFunctional qos;
    qos.terms.push_back({sub.rk_blocks[static_cast<size_t>(k)], (1.0 + 1.0 / gamma) * hh_x});
    qos.terms.push_back({sub.r_block, -hh_x});
    qos.constant = -user_noise - options.margin * row_norm;
    if (options.feasibility) qos.terms.push_back({sub.s_block, CMatrix::Constant(1, 1, -row_norm)});
    prog.add_constraint("sinr user " + std::to_string(k + 1), cone::Inequality{qos});
  }

  if (options.feasibility) return sub;
  const CMatrix f = pull(target_linear_coefficients(model, w).matrix());
  prog.add_rotated_cone("target epigraph", trace_term(sub.s_block, CMatrix::Constant(1, 1, 1.0)),
                        trace_term(sub.r_block, f), cone::AffineFunctional{{}, 1.0});
  return sub;
}

std::optional<double> qos_slack(const ScenarioConfig& cfg, const ChannelSet& channels) {
  const InterferenceModel model = InterferenceModel::from_config(cfg);
  SubproblemOptions sub_opts;
  sub_opts.margin = 10.0 * (channels.num_users() + 1) * cfg.solver_eps;
  sub_opts.feasibility = true;
  const CVector w = CVector::Zero(model.num_rx());
  const Subproblem sub = assemble_subproblem(cfg, model, channels, w, 0.0, sub_opts);
  cone::SolverOptions opts;
  opts.eps = cfg.solver_eps;
  opts.max_iters = cfg.solver_max_iters;
  const cone::SolverResult res = cone::solve(sub.program, opts);
  if (res.status != cone::SolveStatus::optimal) return std::nullopt;
  return res.objective;
}

TransmitDesign initial_design(const ScenarioConfig& cfg, const ChannelSet& channels) {
  const int m = cfg.tx();
  const int k_users = channels.num_users();
  const double pt = cfg.total_power_mw();
  TransmitDesign d;
  d.r = (pt / m) * HermitianMatrix::identity(m);
  for (int k = 0; k < k_users; ++k) {
    const CVector h = channels.user(k);
    d.r_k.push_back((pt / (2.0 * m * k_users) / h.squaredNorm()) * HermitianMatrix::outer(h));
  }
  return d;
}

TransmitDesign qt_optimize(const ScenarioConfig& cfg, const InterferenceModel& model,
                           const ChannelSet& channels, const CVector& w, const TransmitDesign& init) {
  const int k_users = channels.num_users();
  TransmitDesign d = init;
  d.w_c.resize(0, 0);
  d.w_s.resize(0, 0);
  d.qt_trace.clear();
  d.solver_iterations = 0;

  cone::SolverOptions opts;
  opts.eps = cfg.solver_eps;
  opts.max_iters = cfg.solver_max_iters;
  SubproblemOptions sub_opts;
  sub_opts.margin = 10.0 * (k_users + 1) * cfg.solver_eps;

  double y = update_y(model, w, d.r);
  double g_prev = qt_objective(model, w, d.r, y);
  d.qt_trace.push_back({0, g_prev});

  // The state from a previous call belongs to a different preconditioner.
  d.solver_state.reset();
  const double tau = tapered_cn_quadratic(model, d.r, w) / cfg.total_power_mw();
  sub_opts.preconditioner = cost_preconditioner(cn_linear_coefficients(model, w), tau);

  for (int it = 1; it <= cfg.max_inner_iterations; ++it) {
    const Subproblem sub = assemble_subproblem(cfg, model, channels, w, y, sub_opts);
    // The current point's objective value, so the gap test is relative to it.
    if (y > 0.0) opts.objective_scale = (g_prev / (y * y) + sub.noise_term) / sub.power;
    const cone::SolverResult res =
        cone::solve(sub.program, opts, d.solver_state ? &*d.solver_state : nullptr);
    d.solver_iterations += res.iterations;
    const bool stalled = res.status == cone::SolveStatus::max_iters && res.primal_residual > sub_opts.margin;
    if (res.status == cone::SolveStatus::infeasible || stalled) {
      // A stall near the boundary of the feasible set is settled by the
      // better-conditioned slack problem.
      const std::optional<double> slack =
          res.status == cone::SolveStatus::infeasible ? std::optional<double>(-1.0) : qos_slack(cfg, channels);
      if (slack && *slack < -cfg.solver_eps) {
        std::ostringstream os;
        os << "SINR threshold " << cfg.sinr_threshold_db << " dB is not attainable with "
           << cfg.total_power_dbm << " dBm (M=" << cfg.tx() << ", K=" << k_users << ")";
        throw QoSInfeasible(os.str());
      }
      std::ostringstream os;
      os << "cone solver stopped after " << res.iterations << " iterations with primal residual "
         << res.primal_residual;
      throw NumericalFailure(os.str());
    }
    d.solver_state = res.state;

    // Clip the solver's small cone residuals so that R_k and R - sum R_k
    // are exactly PSD, then rebuild R from the pieces.
    CMatrix comm_block = CMatrix::Zero(cfg.tx(), cfg.tx());
    d.r_k.clear();
    for (int k = 0; k < k_users; ++k) {
      const auto& block = res.blocks[static_cast<size_t>(sub.rk_blocks[static_cast<size_t>(k)])];
      const CMatrix xk = project_psd(HermitianMatrix::hermitian_part(block)).matrix();
      comm_block += xk;
      d.r_k.push_back(sub.decode(xk));
    }
    const CMatrix& x_r = res.blocks[static_cast<size_t>(sub.r_block)];
    const CMatrix sensing = project_psd(HermitianMatrix::hermitian_part(x_r - comm_block)).matrix();
    d.r = sub.decode(sensing + comm_block);
    d.y = y;

    const double g = qt_objective(model, w, d.r, y);
    d.qt_trace.push_back({it, g});
    const double change = std::abs(g - g_prev);
    y = update_y(model, w, d.r);
    if (change <= cfg.convergence_tol * std::max(1.0, std::abs(g_prev))) break;
    g_prev = g;
  }
  return d;
}

void minimize_communication_power(const ScenarioConfig& cfg, const ChannelSet& channels,
                                  TransmitDesign& design) {
  const double gamma = cfg.sinr_threshold_linear();
  for (int k = 0; k < channels.num_users(); ++k) {
    const CVector h = channels.user(k);
    HermitianMatrix& rk = design.r_k[static_cast<size_t>(k)];
    const double own = (1.0 + 1.0 / gamma) * rk.quadratic_form(h);
    const double needed = design.r.quadratic_form(h) + cfg.user_noise_mw();
    if (own > needed) rk = (needed / own) * rk;
  }
}

RankOne extract_rank_one(const HermitianMatrix& r_hat, const CVector& h) {
  if (h.size() != r_hat.dim()) throw std::invalid_argument("channel dimension mismatch");
  const double power = r_hat.quadratic_form(h);
  const double tol = 1e-14 * std::max(r_hat.trace(), 0.0) * h.squaredNorm();
  if (!(power > tol)) throw NumericalFailure("user receives no power from its covariance");
  RankOne out;
  out.w = (r_hat.matrix() * h) / std::sqrt(power);
  out.r_tilde = HermitianMatrix::outer(out.w);
  return out;
}

CMatrix extract_sensing(const HermitianMatrix& r, const CMatrix& w_c) {
  CMatrix comm = CMatrix::Zero(r.dim(), r.dim());
  if (w_c.cols() > 0) comm = w_c * w_c.adjoint();
  const HermitianMatrix residual = HermitianMatrix::hermitian_part(r.matrix() - comm);
  const EigenDecomposition eig = eig_hermitian(residual);
  const double scale = std::max(1.0, r.trace());
  if (eig.values(0) < -1e-7 * scale) throw TightnessViolation(eig.values(0));
  const double lmax = std::max(eig.values(eig.values.size() - 1), 0.0);
  if (lmax <= 1e-12 * scale) return CMatrix(r.dim(), 0);
  return cholesky(residual, std::max(1e-9 * lmax, -eig.values(0)));
}

void extract_beamformers(TransmitDesign& design, const ChannelSet& channels) {
  const int k_users = channels.num_users();
  design.w_c.resize(design.r.dim(), k_users);
  for (int k = 0; k < k_users; ++k)
    design.w_c.col(k) = extract_rank_one(design.r_k[static_cast<size_t>(k)], channels.user(k)).w;
  design.w_s = extract_sensing(design.r, design.w_c);
}

}  // namespace isac
