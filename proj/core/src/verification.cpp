#include "sprelax/verification.hpp"

#include "sprelax/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace sprelax {

MmsCase make_mms_case() {
  MmsCase mms;
  mms.params = PhysParams{1.0, 1.0, 1.0};
  mms.t_end = 1.0;

  // g = (x^2-1)(y^2-1); v = exp(-t) sin(pi g); u = (1+i) v.
  auto v_exact = [](double x, double y, double t) {
    return std::exp(-t) * std::sin(M_PI * (x * x - 1.0) * (y * y - 1.0));
  };
  auto lap_v = [](double x, double y, double t) {
    const double gx2 = x * x - 1.0, gy2 = y * y - 1.0;
    const double G = gx2 * gy2;
    const double dgx = 2.0 * x * gy2, dgy = 2.0 * y * gx2;
    const double lap_g = 2.0 * gy2 + 2.0 * gx2;
    const double sn = std::sin(M_PI * G), cs = std::cos(M_PI * G);
    return std::exp(-t) * (M_PI * cs * lap_g - M_PI * M_PI * sn * (dgx * dgx + dgy * dgy));
  };

  mms.u = [v_exact](double x, double y, double t) { return cplx(1.0, 1.0) * v_exact(x, y, t); };
  mms.v = v_exact;

  // Residual forcings of the coupled system at the manufactured pair
  // (alpha = beta = epsilon = 1):
  //   f_u = u_t - (i/2) lap u + i v u,   f_v = lap v - |u|^2.
  mms.sources.f_u = [v_exact, lap_v](double x, double y, double t) {
    const double v = v_exact(x, y, t);
    const cplx u = cplx(1.0, 1.0) * v;
    const cplx u_t = -u;
    const cplx lap_u = cplx(1.0, 1.0) * lap_v(x, y, t);
    return u_t - cplx(0.0, 0.5) * lap_u + cplx(0.0, 1.0) * v * u;
  };
  mms.sources.f_v = [v_exact, lap_v](double x, double y, double t) {
    const double v = v_exact(x, y, t);
    return lap_v(x, y, t) - 2.0 * v * v; // |u|^2 = 2 v^2
  };
  return mms;
}

namespace {

template <class S, class F>
double l2_error_impl(const Workspace& ws, const FeField<S>& field, F&& exact, double t) {
  const Grid& g = ws.grid();
  std::vector<S> local(g.nloc()), vals(ws.nq_cell());
  double err2 = 0.0;
  for (int c = 0; c < g.n_cells(); ++c) {
    ws.gather(field, c, std::span<S>(local));
    ws.eval_values(std::span<const S>(local), std::span<S>(vals));
    for (int q = 0; q < ws.nq_cell(); ++q) {
      const auto p = ws.quad_point(c, q);
      const S d = vals[q] - exact(p[0], p[1], t);
      if constexpr (std::is_same_v<S, cplx>)
        err2 += ws.quad_weight(q) * std::norm(d);
      else
        err2 += ws.quad_weight(q) * d * d;
    }
  }
  return std::sqrt(err2);
}

} // namespace

double l2_error(const Workspace& ws, const ComplexField& field,
                const std::function<cplx(double, double, double)>& exact, double t) {
  return l2_error_impl(ws, field, exact, t);
}

double l2_error(const Workspace& ws, const RealField& field,
                const std::function<double(double, double, double)>& exact, double t) {
  return l2_error_impl(ws, field, exact, t);
}

RunErrors run_mms(const MmsCase& mms, int nx, int r, int n_steps, const SolverOptions& opts,
                  BootstrapKind bootstrap) {
  const Grid grid = build_grid(mms.domain, nx, nx, r, BcKind::Dirichlet);
  const TimeGrid tg = TimeGrid::uniform(0.0, mms.t_end, n_steps);
  RelaxationStepper stepper(grid, mms.params, tg, opts, mms.sources, bootstrap);
  // Error norms use a slightly richer rule than assembly so the measured
  // rates are not polluted by quadrature of the exact solution.
  const Workspace err_ws(grid, default_quadrature_order(r) + 2);

  const auto& u_exact = mms.u;
  const auto& v_exact = mms.v;
  SchemeState s = stepper.initialize(
      [&](double x, double y) { return u_exact(x, y, 0.0); });

  RunErrors errs;
  errs.err_u = l2_error(err_ws, s.U, u_exact, 0.0);
  errs.err_v = l2_error(err_ws, s.V_node, v_exact, 0.0);
  for (int n = 1; n <= n_steps; ++n) {
    stepper.step(s);
    errs.err_u = std::max(errs.err_u, l2_error(err_ws, s.U, u_exact, s.t));
    errs.err_v = std::max(errs.err_v, l2_error(err_ws, s.V_node, v_exact, s.t));
  }
  return errs;
}

namespace {

std::vector<EocRow> rates_from_errors(const std::vector<double>& res,
                                      const std::vector<RunErrors>& errs) {
  std::vector<EocRow> rows(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) {
    rows[i].resolution = res[i];
    rows[i].err_u = errs[i].err_u;
    rows[i].err_v = errs[i].err_v;
    if (i > 0 && res[i] != res[i - 1]) {
      const double dr = std::log(res[i - 1]) - std::log(res[i]);
      rows[i].rate_u = (std::log(errs[i - 1].err_u) - std::log(errs[i].err_u)) / dr;
      rows[i].rate_v = (std::log(errs[i - 1].err_v) - std::log(errs[i].err_v)) / dr;
      rows[i].has_rate = true;
    }
  }
  return rows;
}

} // namespace

std::vector<EocRow> run_spatial_eoc(const MmsCase& mms, const std::vector<int>& nx_levels, int r,
                                    int n_steps, const SolverOptions& opts) {
  std::vector<double> res;
  std::vector<RunErrors> errs;
  for (int nx : nx_levels) {
    res.push_back(mms.domain.width() / nx);
    errs.push_back(run_mms(mms, nx, r, n_steps, opts));
  }
  return rates_from_errors(res, errs);
}

std::vector<EocRow> run_temporal_eoc(const MmsCase& mms, const std::vector<double>& k_list,
                                     int nx, int r, const SolverOptions& opts,
                                     BootstrapKind bootstrap) {
  std::vector<double> res;
  std::vector<RunErrors> errs;
  for (double k : k_list) {
    const int n_steps = static_cast<int>(std::lround(mms.t_end / k));
    if (std::abs(n_steps * k - mms.t_end) > 1e-9 * mms.t_end)
      throw ConfigurationError("run_temporal_eoc: k must divide the final time");
    res.push_back(k);
    errs.push_back(run_mms(mms, nx, r, n_steps, opts, bootstrap));
  }
  return rates_from_errors(res, errs);
}

namespace {

// Dense assembly straight from the basis tables; deliberately independent of
// the CSR assembly loops.
struct DenseSystem {
  Eigen::MatrixXd M;
  Eigen::MatrixXd L;
};

DenseSystem dense_assemble(const Workspace& ws) {
  const Grid& g = ws.grid();
  const int n = g.n_dofs, nq = ws.nq_axis(), r1 = g.r + 1;
  const auto& tab = ws.table();
  DenseSystem sys{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (int c = 0; c < g.n_cells(); ++c)
    for (int i = 0; i < g.nloc(); ++i) {
      const std::int64_t di = g.dof(c, i);
      if (di < 0) continue;
      const int aix = i % r1, aiy = i / r1;
      for (int j = 0; j < g.nloc(); ++j) {
        const std::int64_t dj = g.dof(c, j);
        if (dj < 0) continue;
        const int ajx = j % r1, ajy = j / r1;
        double m = 0.0, l = 0.0;
        for (int qy = 0; qy < nq; ++qy)
          for (int qx = 0; qx < nq; ++qx) {
            const double w = ws.quad_weight(qy * nq + qx);
            const double vi = tab.value(aix, qx) * tab.value(aiy, qy);
            const double vj = tab.value(ajx, qx) * tab.value(ajy, qy);
            const double gix = tab.deriv(aix, qx) * tab.value(aiy, qy) / g.hx;
            const double giy = tab.value(aix, qx) * tab.deriv(aiy, qy) / g.hy;
            const double gjx = tab.deriv(ajx, qx) * tab.value(ajy, qy) / g.hx;
            const double gjy = tab.value(ajx, qx) * tab.deriv(ajy, qy) / g.hy;
            m += w * vi * vj;
            l += w * (gix * gjx + giy * gjy);
          }
        sys.M(di, dj) += m;
        sys.L(di, dj) += l;
      }
    }
  return sys;
}

Eigen::VectorXcd dense_eval_load(const Workspace& ws,
                                 const std::function<cplx(double, double)>& f) {
  const Grid& g = ws.grid();
  const int nq = ws.nq_axis(), r1 = g.r + 1;
  const auto& tab = ws.table();
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(g.n_dofs);
  for (int c = 0; c < g.n_cells(); ++c)
    for (int l = 0; l < g.nloc(); ++l) {
      const std::int64_t d = g.dof(c, l);
      if (d < 0) continue;
      const int ax = l % r1, ay = l / r1;
      cplx acc = 0.0;
      for (int qy = 0; qy < nq; ++qy)
        for (int qx = 0; qx < nq; ++qx) {
          const int q = qy * nq + qx;
          const auto p = ws.quad_point(c, q);
          acc += ws.quad_weight(q) * f(p[0], p[1]) * tab.value(ax, qx) * tab.value(ay, qy);
        }
      b(d) += acc;
    }
  return b;
}

// Values of a coefficient vector at the quadrature points of one cell,
// straight product-form evaluation.
template <class Vec>
auto dense_value_at(const Workspace& ws, const Vec& coeffs, int cell, int q) {
  const Grid& g = ws.grid();
  const int nq = ws.nq_axis(), r1 = g.r + 1;
  const auto& tab = ws.table();
  const int qx = q % nq, qy = q / nq;
  typename Vec::Scalar acc{};
  for (int l = 0; l < g.nloc(); ++l) {
    const std::int64_t d = g.dof(cell, l);
    if (d < 0) continue;
    acc += coeffs(d) * tab.value(l % r1, qx) * tab.value(l / r1, qy);
  }
  return acc;
}

} // namespace

SchemeState dense_oracle_step(const Grid& grid, const PhysParams& params, const TimeGrid& tgrid,
                              const SchemeState& prev, const SourceTerms& sources) {
  if (grid.bc != BcKind::Dirichlet)
    throw ConfigurationError("dense_oracle_step: dirichlet grids only");
  const int ndof = grid.n_dofs;
  const int n = prev.n + 1;
  const double k_n = tgrid.k(n), k_prev = tgrid.k(n - 1);
  const double t_mid = tgrid.midpoint(n);
  const Workspace ws(grid);
  const DenseSystem sys = dense_assemble(ws);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_m(sys.M);

  auto to_vec = [&](const std::vector<cplx>& v) {
    Eigen::VectorXcd out(ndof);
    for (int i = 0; i < ndof; ++i) out(i) = v[i];
    return out;
  };
  auto to_real = [&](const std::vector<double>& v) {
    Eigen::VectorXd out(ndof);
    for (int i = 0; i < ndof; ++i) out(i) = v[i];
    return out;
  };

  const Eigen::VectorXcd u_prev = to_vec(prev.U.coeffs);

  // (1) Relaxation value for this interval.
  Eigen::VectorXd phi(ndof);
  if (n == 1) {
    phi = to_real(prev.Phi_half.coeffs);
  } else {
    Eigen::VectorXd dens = Eigen::VectorXd::Zero(ndof);
    {
      const int nq2 = ws.nq_cell(), r1 = grid.r + 1;
      const auto& tab = ws.table();
      for (int c = 0; c < grid.n_cells(); ++c)
        for (int l = 0; l < grid.nloc(); ++l) {
          const std::int64_t d = grid.dof(c, l);
          if (d < 0) continue;
          double acc = 0.0;
          for (int q = 0; q < nq2; ++q) {
            const int qx = q % ws.nq_axis(), qy = q / ws.nq_axis();
            acc += ws.quad_weight(q) * std::norm(dense_value_at(ws, u_prev, c, q)) *
                   tab.value(l % r1, qx) * tab.value(l / r1, qy);
          }
          dens(d) += acc;
        }
    }
    const Eigen::VectorXd proj = lu_m.solve(dens);
    phi = ((k_prev + k_n) / k_prev) * proj -
          (k_n / k_prev) * to_real(prev.Phi_half.coeffs);
  }

  // (2) Midpoint potential.
  Eigen::VectorXd rhs_v = -(params.beta / params.alpha) * (sys.M * phi);
  if (sources.f_v) {
    const Eigen::VectorXcd fv = dense_eval_load(
        ws, [&](double x, double y) { return cplx(sources.f_v(x, y, t_mid), 0.0); });
    rhs_v -= fv.real();
  }
  const Eigen::VectorXd v_half = Eigen::PartialPivLU<Eigen::MatrixXd>(sys.L).solve(rhs_v);

  // (3) Half-point wavefunction system with dense complex LU; the potential
  // matrix uses the midpoint potential just computed.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ndof, ndof);
  {
    const int nq = ws.nq_axis(), r1 = grid.r + 1;
    const auto& tab = ws.table();
    for (int c = 0; c < grid.n_cells(); ++c)
      for (int i = 0; i < grid.nloc(); ++i) {
        const std::int64_t di = grid.dof(c, i);
        if (di < 0) continue;
        for (int j = 0; j < grid.nloc(); ++j) {
          const std::int64_t dj = grid.dof(c, j);
          if (dj < 0) continue;
          double acc = 0.0;
          for (int q = 0; q < ws.nq_cell(); ++q) {
            const int qx = q % nq, qy = q / nq;
            acc += ws.quad_weight(q) * dense_value_at(ws, v_half, c, q) *
                   tab.value(i % r1, qx) * tab.value(i / r1, qy) * tab.value(j % r1, qx) *
                   tab.value(j / r1, qy);
          }
          P(di, dj) += acc;
        }
      }
  }

  const double a2 = params.alpha * params.alpha;
  const Eigen::MatrixXd S =
      (params.epsilon * k_n / (4.0 * a2)) * sys.L + (k_n / (2.0 * params.epsilon)) * P;
  const Eigen::MatrixXcd A = sys.M.cast<cplx>() + cplx(0.0, 1.0) * S.cast<cplx>();
  Eigen::VectorXcd rhs_u = sys.M.cast<cplx>() * u_prev;
  if (sources.f_u) {
    rhs_u += 0.5 * k_n *
             dense_eval_load(ws, [&](double x, double y) { return sources.f_u(x, y, t_mid); });
  }
  const Eigen::VectorXcd u_half = A.partialPivLu().solve(rhs_u);
  const Eigen::VectorXcd u_new = 2.0 * u_half - u_prev;

  // (4) Nodal extension.
  Eigen::VectorXd v_node(ndof);
  if (n == 1)
    v_node = 2.0 * v_half - to_real(prev.V_node.coeffs);
  else
    v_node = v_half + (k_n / (k_prev + k_n)) * (v_half - to_real(prev.V_half.coeffs));

  SchemeState out;
  out.n = n;
  out.t = tgrid.nodes[n];
  out.U = ComplexField(grid);
  out.U_prev = prev.U;
  out.U_half = ComplexField(grid);
  out.Phi_half = RealField(grid);
  out.Phi_half_prev = prev.Phi_half;
  out.V_half = RealField(grid);
  out.V_half_prev = prev.V_half;
  out.V_node = RealField(grid);
  out.V_node_prev = prev.V_node;
  for (int i = 0; i < ndof; ++i) {
    out.U.coeffs[i] = u_new(i);
    out.U_half.coeffs[i] = u_half(i);
    out.Phi_half.coeffs[i] = phi(i);
    out.V_half.coeffs[i] = v_half(i);
    out.V_node.coeffs[i] = v_node(i);
  }
  return out;
}

} // namespace sprelax
