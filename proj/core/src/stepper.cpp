#include "sprelax/stepper.hpp"

#include "sprelax/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace sprelax {

namespace {
std::string fmt_res(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}
} // namespace

TimeGrid TimeGrid::uniform(double t_start, double t_end, int n_steps) {
  if (n_steps < 1) throw ConfigurationError("TimeGrid::uniform: need at least one step");
  if (!(t_end > t_start)) throw ConfigurationError("TimeGrid::uniform: t_end must exceed t_start");
  TimeGrid tg;
  tg.nodes.resize(n_steps + 1);
  const double k = (t_end - t_start) / n_steps;
  for (int i = 0; i <= n_steps; ++i) tg.nodes[i] = t_start + i * k;
  tg.nodes.back() = t_end;
  return tg;
}

void TimeGrid::validate() const {
  if (nodes.size() < 2) throw ConfigurationError("TimeGrid: need at least two nodes");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1]))
      throw ConfigurationError("TimeGrid: nodes must be strictly increasing");
}

RelaxationStepper::RelaxationStepper(const Grid& grid, const PhysParams& params,
                                     const TimeGrid& tgrid, const SolverOptions& opts,
                                     SourceTerms sources, BootstrapKind bootstrap)
    : grid_(&grid),
      ws_(grid),
      params_(params),
      tgrid_(tgrid),
      opts_(opts),
      sources_(std::move(sources)),
      bootstrap_(bootstrap) {
  tgrid_.validate();
  if (!(params_.alpha > 0.0) || !(params_.epsilon > 0.0))
    throw ConfigurationError("RelaxationStepper: alpha and epsilon must be positive");
  M_ = assemble_mass(ws_);
  L_ = assemble_laplace(ws_);
  if (grid.bc == BcKind::Periodic)
    background_load_ = M_.multiply(std::vector<double>(grid.n_dofs, 1.0));
}

RelaxationStepper RelaxationStepper::cosmology(const Grid& grid, double beta, double epsilon,
                                               const TimeGrid& tgrid,
                                               const SolverOptions& opts) {
  if (grid.bc != BcKind::Periodic)
    throw ConfigurationError("cosmology stepper requires a periodic grid");
  if (!(tgrid.nodes.front() > 0.0))
    throw ConfigurationError("cosmology stepper requires tau_i > 0");
  PhysParams p;
  p.alpha = 1.0;
  p.beta = beta;
  p.epsilon = epsilon;
  RelaxationStepper s(grid, p, tgrid, opts, SourceTerms{}, BootstrapKind::TwoStage);
  s.cosmology_mode_ = true;
  return s;
}

RelaxationStepper::StageCoefs RelaxationStepper::coefs_for_interval(int n) const {
  StageCoefs c{};
  const double k = tgrid_.k(n);
  if (cosmology_mode_) {
    const double tau = tgrid_.midpoint(n);
    c.lap_factor = params_.epsilon * k / (4.0 * std::pow(tau, 1.5));
    c.pot_factor = k * std::sqrt(tau) / (2.0 * params_.epsilon);
    c.poisson_coef = params_.beta / tau;
    c.subtract_background = true;
  } else {
    const double a2 = params_.alpha * params_.alpha;
    c.lap_factor = params_.epsilon * k / (4.0 * a2);
    c.pot_factor = k / (2.0 * params_.epsilon);
    c.poisson_coef = params_.beta / params_.alpha;
    c.subtract_background = false;
  }
  return c;
}

RelaxationStepper::StageCoefs RelaxationStepper::coefs_initial() const {
  StageCoefs c = coefs_for_interval(1);
  if (cosmology_mode_) c.poisson_coef = params_.beta / tgrid_.nodes.front();
  return c;
}

void RelaxationStepper::solve_poisson(const std::vector<double>& phi_coeffs, const StageCoefs& c,
                                      double t_source, std::vector<double>& v,
                                      const char* stage) {
  const int n = grid_->n_dofs;
  std::vector<double> rhs = M_.multiply(phi_coeffs);
  if (c.subtract_background)
    for (int i = 0; i < n; ++i) rhs[i] -= background_load_[i];
  for (int i = 0; i < n; ++i) rhs[i] *= -c.poisson_coef;
  if (sources_.f_v) {
    const std::vector<double> fv = detail::assemble_load_real(
        ws_, [&](double x, double y) { return sources_.f_v(x, y, t_source); });
    for (int i = 0; i < n; ++i) rhs[i] -= fv[i];
  }
  if (v.size() != static_cast<std::size_t>(n)) v.assign(n, 0.0);
  SolveReport rep;
  if (grid_->bc == BcKind::Periodic)
    rep = cg_solve_meanzero(L_, M_, rhs, opts_.poisson_tol, opts_.max_iter, v);
  else
    rep = cg_solve(L_, rhs, opts_.poisson_tol, opts_.max_iter, v);
  if (!rep.converged)
    throw NumericalError(std::string(stage) +
                         ": poisson solve failed, relative residual = " + fmt_res(rep.rel_residual));
}

void RelaxationStepper::solve_wave_increment(const std::vector<cplx>& u, const RealField& v_half,
                                             const StageCoefs& c, double k_n, double t_mid,
                                             std::vector<cplx>& delta, const char* stage) {
  const int n = grid_->n_dofs;
  const SparseMatrix P = assemble_weighted_mass(ws_, v_half);
  const SparseMatrix S = csr_combine(c.lap_factor, L_, c.pot_factor, P);

  // (M + iS)(u + d) = M u + src  =>  (M + iS) d = src - i S u
  std::vector<cplx> rhs = S.multiply(u);
  for (auto& z : rhs) z *= cplx(0.0, -1.0);
  if (sources_.f_u) {
    const std::vector<cplx> fu = detail::assemble_load_cplx(
        ws_, [&](double x, double y) { return sources_.f_u(x, y, t_mid); });
    for (int i = 0; i < n; ++i) rhs[i] += 0.5 * k_n * fu[i];
  }
  if (delta.size() != static_cast<std::size_t>(n)) delta.assign(n, cplx(0.0));
  const SolveReport rep = complex_cn_solve(M_, S, rhs, opts_.wave_tol, opts_.max_iter, delta);
  if (!rep.converged)
    throw NumericalError(std::string(stage) +
                         ": wavefunction solve failed, relative residual = " + fmt_res(rep.rel_residual));
}

SchemeState RelaxationStepper::initialize(const std::function<cplx(double, double)>& u0) {
  const int ndof = grid_->n_dofs;
  SchemeState s;
  s.n = 0;
  s.t = tgrid_.nodes.front();

  s.U = l2_project(ws_, M_, u0, opts_.mass_tol, opts_.max_iter);

  // Phi_old^{1/2} from the relaxation identity with Phi^{-1/2} = |u0|^2 kept
  // as an exact pointwise function under quadrature and k_0 = k_1:
  // M phi_old = <2 |U^0|^2 - |u0|^2, phi>.
  std::vector<double> load = assemble_density_load(ws_, s.U);
  {
    const std::vector<double> exact = detail::assemble_load_real(
        ws_, [&](double x, double y) { return std::norm(u0(x, y)); });
    for (int i = 0; i < ndof; ++i) load[i] = 2.0 * load[i] - exact[i];
  }
  auto [phi_old, rep_old] = cg_solve(M_, load, opts_.mass_tol, opts_.max_iter);
  if (!rep_old.converged)
    throw NumericalError("initialize: relaxation bootstrap mass solve failed");

  // Initial potential from Phi_old (cosmology freezes tau at tau_i here).
  const StageCoefs c0 = coefs_initial();
  std::vector<double> v0(ndof, 0.0);
  solve_poisson(phi_old, c0, tgrid_.nodes.front(), v0, "initialize[v0]");

  RealField phi_half(*grid_);
  if (bootstrap_ == BootstrapKind::FirstOrder) {
    phi_half.coeffs = phi_old;
  } else {
    // Provisional midpoint potential and wavefunction driven by Phi_old ...
    const StageCoefs c1 = coefs_for_interval(1);
    std::vector<double> v_tilde = v0;
    solve_poisson(phi_old, c1, tgrid_.midpoint(1), v_tilde, "initialize[v_tilde]");
    std::vector<cplx> delta(ndof, cplx(0.0));
    solve_wave_increment(s.U.coeffs, RealField(*grid_, v_tilde), c1, tgrid_.k(1),
                         tgrid_.midpoint(1), delta, "initialize[u_tilde]");
    ComplexField u_tilde(*grid_);
    for (int i = 0; i < ndof; ++i) u_tilde.coeffs[i] = s.U.coeffs[i] + 2.0 * delta[i];
    // ... then the corrected first relaxation value:
    // M phi^{1/2} = <(|U~^1|^2 + Phi_old)/2, phi>.
    std::vector<double> corr = assemble_density_load(ws_, u_tilde);
    const std::vector<double> m_phi_old = M_.multiply(phi_old);
    for (int i = 0; i < ndof; ++i) corr[i] = 0.5 * corr[i] + 0.5 * m_phi_old[i];
    auto [phi_boot, rep_boot] = cg_solve(M_, corr, opts_.mass_tol, opts_.max_iter);
    if (!rep_boot.converged)
      throw NumericalError("initialize: corrected bootstrap mass solve failed");
    phi_half.coeffs = std::move(phi_boot);
  }

  s.U_prev = s.U;
  s.U_half = s.U;
  s.Phi_half = std::move(phi_half);
  s.Phi_half_prev = RealField(*grid_, phi_old);
  s.V_node = RealField(*grid_, v0);
  s.V_node_prev = s.V_node;
  s.V_half = s.V_node;
  s.V_half_prev = s.V_node;
  warm_v_ = v0;
  check_finite(s, "initialize");
  return s;
}

void RelaxationStepper::step_impl(SchemeState& state, const StageCoefs& c) {
  const int n = state.n + 1;
  if (n > tgrid_.n_steps())
    throw ConfigurationError("step: time grid exhausted at step " + std::to_string(n));
  const int ndof = grid_->n_dofs;
  const double k_n = tgrid_.k(n);
  const double k_prev = tgrid_.k(n - 1);
  const std::string stage = "step " + std::to_string(n);

  // (1) Relaxation update. The bootstrapped Phi^{1/2} is already in place
  // for the first interval.
  RealField phi_new(*grid_);
  if (n == 1) {
    phi_new = state.Phi_half;
  } else {
    const std::vector<double> load = assemble_density_load(ws_, state.U);
    if (warm_density_.size() != static_cast<std::size_t>(ndof)) warm_density_.assign(ndof, 0.0);
    const SolveReport rep = cg_solve(M_, std::span<const double>(load), opts_.mass_tol,
                                     opts_.max_iter, std::span<double>(warm_density_));
    if (!rep.converged) throw NumericalError(stage + ": relaxation mass solve failed");
    const double c_new = (k_prev + k_n) / k_prev;
    const double c_old = k_n / k_prev;
    for (int i = 0; i < ndof; ++i)
      phi_new.coeffs[i] = c_new * warm_density_[i] - c_old * state.Phi_half.coeffs[i];
  }

  // (2) Midpoint potential.
  if (warm_v_.size() != static_cast<std::size_t>(ndof)) warm_v_.assign(ndof, 0.0);
  solve_poisson(phi_new.coeffs, c, tgrid_.midpoint(n), warm_v_, stage.c_str());
  RealField v_half(*grid_, warm_v_);

  // (3) Wavefunction half-point solve and nodal recovery.
  solve_wave_increment(state.U.coeffs, v_half, c, k_n, tgrid_.midpoint(n), warm_delta_,
                       stage.c_str());
  ComplexField u_new(*grid_), u_half(*grid_);
  for (int i = 0; i < ndof; ++i) {
    u_half.coeffs[i] = state.U.coeffs[i] + warm_delta_[i];
    u_new.coeffs[i] = state.U.coeffs[i] + 2.0 * warm_delta_[i];
  }

  // (4) Nodal extension of the potential: through V^0 and V^{1/2} on the
  // first interval, afterwards through the two computed midpoint values.
  RealField v_node(*grid_);
  if (n == 1) {
    for (int i = 0; i < ndof; ++i)
      v_node.coeffs[i] = 2.0 * v_half.coeffs[i] - state.V_node.coeffs[i];
  } else {
    const double w = k_n / (k_prev + k_n);
    for (int i = 0; i < ndof; ++i)
      v_node.coeffs[i] = v_half.coeffs[i] + w * (v_half.coeffs[i] - state.V_half.coeffs[i]);
  }

  state.U_prev = std::move(state.U);
  state.U = std::move(u_new);
  state.U_half = std::move(u_half);
  state.Phi_half_prev = std::move(state.Phi_half);
  state.Phi_half = std::move(phi_new);
  state.V_half_prev = std::move(state.V_half);
  state.V_half = std::move(v_half);
  state.V_node_prev = std::move(state.V_node);
  state.V_node = std::move(v_node);
  state.n = n;
  state.t = tgrid_.nodes[n];
  check_finite(state, "step");
}

void RelaxationStepper::step(SchemeState& state) {
  if (cosmology_mode_)
    throw ConfigurationError("step: stepper is configured for cosmology mode");
  step_impl(state, coefs_for_interval(state.n + 1));
}

void RelaxationStepper::step_cosmology(SchemeState& state) {
  if (!cosmology_mode_)
    throw ConfigurationError("step_cosmology: stepper is not in cosmology mode");
  step_impl(state, coefs_for_interval(state.n + 1));
}

RealField RelaxationStepper::potential_at(const SchemeState& state, double t) const {
  if (state.n < 1) throw ConfigurationError("potential_at: no completed interval yet");
  const double t0 = tgrid_.nodes[state.n - 1];
  const double t1 = tgrid_.nodes[state.n];
  const double k = t1 - t0;
  const double slack = 1e-12 * k;
  if (t < t0 - slack || t > t1 + slack)
    throw ConfigurationError("potential_at: t outside the current interval");
  RealField out(*grid_);
  const double w1 = (t1 - t) / k, w2 = (t - t0) / k;
  for (int i = 0; i < grid_->n_dofs; ++i)
    out.coeffs[i] = w1 * state.V_node_prev.coeffs[i] + w2 * state.V_node.coeffs[i];
  return out;
}

void RelaxationStepper::check_finite(const SchemeState& state, const char* stage) const {
  auto bad_c = [](const ComplexField& f) {
    for (const cplx& z : f.coeffs)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return true;
    return false;
  };
  auto bad_r = [](const RealField& f) {
    for (const double v : f.coeffs)
      if (!std::isfinite(v)) return true;
    return false;
  };
  if (bad_c(state.U) || bad_r(state.Phi_half) || bad_r(state.V_half) || bad_r(state.V_node))
    throw NumericalError(std::string(stage) + ": non-finite field at step " +
                         std::to_string(state.n));
}

} // namespace sprelax
