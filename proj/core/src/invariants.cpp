#include "sprelax/invariants.hpp"

#include "sprelax/errors.hpp"

#include <cmath>

namespace sprelax {

namespace {

double quadratic_form(const SparseMatrix& A, const std::vector<double>& x) {
  const std::vector<double> ax = A.multiply(x);
  return dot(std::span<const double>(x), std::span<const double>(ax));
}

double hermitian_form(const SparseMatrix& A, const std::vector<cplx>& x) {
  const std::vector<cplx> ax = A.multiply(x);
  return dotc(std::span<const cplx>(x), std::span<const cplx>(ax)).real();
}

} // namespace

EnergyCoefs standard_energy_coefs(const PhysParams& p) {
  if (p.beta == 0.0)
    throw ConfigurationError("energy: undefined for beta = 0 (field term coefficient 1/beta)");
  return {p.epsilon * p.epsilon / (p.alpha * p.alpha), p.alpha / p.beta};
}

EnergyCoefs cosmology_energy_coefs(double beta, double epsilon, double tau) {
  if (beta == 0.0) throw ConfigurationError("energy: undefined for beta = 0");
  return {epsilon * epsilon / (tau * tau), tau / beta};
}

double mass(const ComplexField& U, const SparseMatrix& M) {
  return hermitian_form(M, U.coeffs);
}

double energy(const ComplexField& U, const RealField& V, const EnergyCoefs& coefs,
              const SparseMatrix& L, const SparseMatrix& P_of_V) {
  return coefs.kinetic * hermitian_form(L, U.coeffs) +
         coefs.field * quadratic_form(L, V.coeffs) + 2.0 * hermitian_form(P_of_V, U.coeffs);
}

double energy(const ComplexField& U, const RealField& V, const PhysParams& params,
              const SparseMatrix& L, const SparseMatrix& P_of_V) {
  return energy(U, V, standard_energy_coefs(params), L, P_of_V);
}

std::array<double, 2> momentum(const Workspace& ws, const ComplexField& U, double epsilon) {
  const Grid& g = ws.grid();
  std::vector<cplx> local(g.nloc()), uq(ws.nq_cell()), gx(ws.nq_cell()), gy(ws.nq_cell());
  double mx = 0.0, my = 0.0;
  for (int c = 0; c < g.n_cells(); ++c) {
    ws.gather(U, c, std::span<cplx>(local));
    ws.eval_values(std::span<const cplx>(local), std::span<cplx>(uq));
    ws.eval_gradients(std::span<const cplx>(local), std::span<cplx>(gx), std::span<cplx>(gy));
    for (int q = 0; q < ws.nq_cell(); ++q) {
      const double w = ws.quad_weight(q);
      // Im(U grad conj(U))
      mx -= w * std::imag(uq[q] * std::conj(gx[q]));
      my -= w * std::imag(uq[q] * std::conj(gy[q]));
    }
  }
  return {epsilon * mx, epsilon * my};
}

std::array<double, 3> conservation_errors(const InvariantRecord& now,
                                          const InvariantRecord& initial) {
  const double dmx = now.Mx - initial.Mx, dmy = now.My - initial.My;
  return {std::abs(now.D - initial.D), std::abs(now.E - initial.E),
          std::sqrt(dmx * dmx + dmy * dmy)};
}

double lemma2_residual(const Workspace& ws, const SchemeState& s, const EnergyCoefs& coefs,
                       const SparseMatrix& M, const SparseMatrix& L) {
  (void)M;
  const SparseMatrix P_now = assemble_weighted_mass(ws, s.V_node);
  const SparseMatrix P_prev = assemble_weighted_mass(ws, s.V_node_prev);
  const SparseMatrix P_half = assemble_weighted_mass(ws, s.V_half);

  const double e_now = coefs.kinetic * hermitian_form(L, s.U.coeffs) +
                       coefs.field * quadratic_form(L, s.V_node.coeffs) +
                       2.0 * hermitian_form(P_now, s.U.coeffs);
  const double e_prev = coefs.kinetic * hermitian_form(L, s.U_prev.coeffs) +
                        coefs.field * quadratic_form(L, s.V_node_prev.coeffs) +
                        2.0 * hermitian_form(P_prev, s.U_prev.coeffs);
  const double grad_jump = coefs.field * (quadratic_form(L, s.V_node.coeffs) -
                                          quadratic_form(L, s.V_node_prev.coeffs));
  const double now_term =
      2.0 * (hermitian_form(P_now, s.U.coeffs) - hermitian_form(P_half, s.U.coeffs));
  const double prev_term =
      2.0 * (hermitian_form(P_prev, s.U_prev.coeffs) - hermitian_form(P_half, s.U_prev.coeffs));
  return std::abs(e_now - e_prev - grad_jump - now_term + prev_term);
}

double lemma3_residual(const Workspace& ws, const SchemeState& s, const PhysParams& params,
                       const SparseMatrix& M, const SparseMatrix& L, double k_n,
                       double proj_tol) {
  const Grid& g = ws.grid();
  const double eps = params.epsilon;
  const std::array<double, 2> m_now = momentum(ws, s.U, eps);
  const std::array<double, 2> m_prev = momentum(ws, s.U_prev, eps);

  // lap_h of the midpoint wavefunction and the projection of V^{n-1/2} U^{n-1/2}.
  const ComplexField lap_u = discrete_laplacian_apply(ws, M, L, s.U_half, proj_tol);
  ComplexField vu_proj(g);
  {
    std::vector<double> v_local(g.nloc());
    std::vector<cplx> u_local(g.nloc()), uq(ws.nq_cell());
    std::vector<double> vq(ws.nq_cell());
    std::vector<cplx> load(g.n_dofs, cplx(0.0));
    const int nq = ws.nq_axis(), r1 = g.r + 1;
    const auto& tab = ws.table();
    for (int c = 0; c < g.n_cells(); ++c) {
      ws.gather(s.U_half, c, std::span<cplx>(u_local));
      ws.gather(s.V_half, c, std::span<double>(v_local));
      ws.eval_values(std::span<const cplx>(u_local), std::span<cplx>(uq));
      ws.eval_values(std::span<const double>(v_local), std::span<double>(vq));
      for (int l = 0; l < g.nloc(); ++l) {
        const std::int64_t d = g.dof(c, l);
        if (d < 0) continue;
        const int ax = l % r1, ay = l / r1;
        cplx acc = 0.0;
        for (int qy = 0; qy < nq; ++qy) {
          cplx inner = 0.0;
          for (int qx = 0; qx < nq; ++qx) {
            const int q = qy * nq + qx;
            inner += ws.quad_weight(q) * vq[q] * uq[q] * tab.value(ax, qx);
          }
          acc += inner * tab.value(ay, qy);
        }
        load[static_cast<std::size_t>(d)] += acc;
      }
    }
    vu_proj = l2_project_load(ws, M, std::move(load), proj_tol);
  }

  // Quadrature of the three bracket terms.
  double t1x = 0.0, t1y = 0.0, t2x = 0.0, t2y = 0.0, t3x = 0.0, t3y = 0.0;
  {
    std::vector<cplx> u_local(g.nloc()), uq(ws.nq_cell()), ugx(ws.nq_cell()), ugy(ws.nq_cell());
    std::vector<cplx> w_local(g.nloc()), wq(ws.nq_cell());
    std::vector<cplx> p_local(g.nloc()), pq(ws.nq_cell());
    std::vector<double> v_local(g.nloc()), vgx(ws.nq_cell()), vgy(ws.nq_cell()),
        vq(ws.nq_cell());
    for (int c = 0; c < g.n_cells(); ++c) {
      ws.gather(s.U_half, c, std::span<cplx>(u_local));
      ws.gather(lap_u, c, std::span<cplx>(w_local));
      ws.gather(vu_proj, c, std::span<cplx>(p_local));
      ws.gather(s.V_half, c, std::span<double>(v_local));
      ws.eval_values(std::span<const cplx>(u_local), std::span<cplx>(uq));
      ws.eval_gradients(std::span<const cplx>(u_local), std::span<cplx>(ugx),
                        std::span<cplx>(ugy));
      ws.eval_values(std::span<const cplx>(w_local), std::span<cplx>(wq));
      ws.eval_values(std::span<const cplx>(p_local), std::span<cplx>(pq));
      ws.eval_values(std::span<const double>(v_local), std::span<double>(vq));
      ws.eval_gradients(std::span<const double>(v_local), std::span<double>(vgx),
                        std::span<double>(vgy));
      for (int q = 0; q < ws.nq_cell(); ++q) {
        const double w = ws.quad_weight(q);
        const double dens = std::norm(uq[q]);
        t1x += w * dens * vgx[q];
        t1y += w * dens * vgy[q];
        // grad U * lap_h(conj U): lap_h commutes with conjugation.
        t2x += w * std::real(ugx[q] * std::conj(wq[q]));
        t2y += w * std::real(ugy[q] * std::conj(wq[q]));
        const cplx defect = pq[q] - vq[q] * uq[q]; // (P_h - I)(V U)
        t3x += w * std::real(defect * std::conj(ugx[q]));
        t3y += w * std::real(defect * std::conj(ugy[q]));
      }
    }
  }
  const double ea2 = eps * eps / (params.alpha * params.alpha);
  const double rx = m_now[0] - m_prev[0] + k_n * (t1x + ea2 * t2x - 2.0 * t3x);
  const double ry = m_now[1] - m_prev[1] + k_n * (t1y + ea2 * t2y - 2.0 * t3y);
  return std::sqrt(rx * rx + ry * ry);
}

InvariantAuditor::InvariantAuditor(const RelaxationStepper& stepper, AuditorOptions opts)
    : stepper_(&stepper), opts_(opts) {}

InvariantRecord InvariantAuditor::record(const SchemeState& s) {
  const Workspace& ws = stepper_->workspace();
  const SparseMatrix& M = stepper_->mass_matrix();
  const SparseMatrix& L = stepper_->laplace_matrix();
  const PhysParams& p = stepper_->params();

  InvariantRecord rec;
  rec.n = s.n;
  rec.t = s.t;
  rec.D = mass(s.U, M);
  const auto mom = momentum(ws, s.U, p.epsilon);
  rec.Mx = mom[0];
  rec.My = mom[1];

  EnergyCoefs ec{};
  bool have_energy = false;
  if (p.beta != 0.0) {
    ec = stepper_->is_cosmology() ? cosmology_energy_coefs(p.beta, p.epsilon, s.t)
                                  : standard_energy_coefs(p);
    const SparseMatrix P = assemble_weighted_mass(ws, s.V_node);
    rec.E = energy(s.U, s.V_node, ec, L, P);
    have_energy = true;
  }

  if (!have_baseline_) {
    baseline_ = rec;
    have_baseline_ = true;
  }
  const auto errs = conservation_errors(rec, baseline_);
  rec.D_err = errs[0];
  rec.E_err = have_energy ? errs[1] : 0.0;
  rec.M_err = errs[2];

  if (opts_.lemma_residuals && s.n >= 1 && !stepper_->is_cosmology()) {
    const double k_n = stepper_->time_grid().k(s.n);
    if (have_energy) rec.lemma2_res = lemma2_residual(ws, s, ec, M, L);
    rec.lemma3_res = lemma3_residual(ws, s, p, M, L, k_n, opts_.proj_tol);
  }

  history_.push_back(rec);
  return rec;
}

} // namespace sprelax
