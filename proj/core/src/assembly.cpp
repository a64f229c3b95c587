#include "sprelax/assembly.hpp"

#include "sprelax/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sprelax {

Workspace::Workspace(const Grid& grid) : Workspace(grid, default_quadrature_order(grid.r)) {}

Workspace::Workspace(const Grid& grid, int nq_axis) : grid_(&grid), nq_axis_(nq_axis) {
  if (nq_axis < 1) throw ConfigurationError("Workspace: quadrature order must be >= 1");
  rule_ = gauss_legendre(nq_axis);
  table_ = tabulate_lagrange(grid.local_nodes, rule_.points);
  weights_.resize(static_cast<std::size_t>(nq_axis) * nq_axis);
  const double jac = grid.hx * grid.hy;
  for (int qy = 0; qy < nq_axis; ++qy)
    for (int qx = 0; qx < nq_axis; ++qx)
      weights_[static_cast<std::size_t>(qy) * nq_axis + qx] =
          rule_.weights[qx] * rule_.weights[qy] * jac;
}

std::array<double, 2> Workspace::quad_point(int cell, int q) const {
  const Grid& g = *grid_;
  const int ix = cell % g.nx, iy = cell / g.nx;
  const int qx = q % nq_axis_, qy = q / nq_axis_;
  return {g.domain.xmin + g.hx * (ix + rule_.points[qx]),
          g.domain.ymin + g.hy * (iy + rule_.points[qy])};
}

template <class S>
void Workspace::gather(const FeField<S>& f, int cell, std::span<S> local) const {
  const Grid& g = *grid_;
  const int nloc = g.nloc();
  for (int l = 0; l < nloc; ++l) {
    const std::int64_t d = g.dof(cell, l);
    local[l] = (d >= 0) ? f.coeffs[static_cast<std::size_t>(d)] : S{};
  }
}

template <class S>
void Workspace::eval_values(std::span<const S> local, std::span<S> out) const {
  const int r1 = grid_->r + 1, nq = nq_axis_;
  // Sum factorization: contract x first, then y.
  std::vector<S> t(static_cast<std::size_t>(r1) * nq, S{});
  for (int b = 0; b < r1; ++b)
    for (int a = 0; a < r1; ++a) {
      const S c = local[a + r1 * b];
      for (int qx = 0; qx < nq; ++qx) t[b * nq + qx] += c * table_.value(a, qx);
    }
  for (int qy = 0; qy < nq; ++qy)
    for (int qx = 0; qx < nq; ++qx) {
      S acc{};
      for (int b = 0; b < r1; ++b) acc += t[b * nq + qx] * table_.value(b, qy);
      out[qy * nq + qx] = acc;
    }
}

template <class S>
void Workspace::eval_gradients(std::span<const S> local, std::span<S> gx, std::span<S> gy) const {
  const int r1 = grid_->r + 1, nq = nq_axis_;
  const double sx = 1.0 / grid_->hx, sy = 1.0 / grid_->hy;
  std::vector<S> tv(static_cast<std::size_t>(r1) * nq, S{});
  std::vector<S> td(static_cast<std::size_t>(r1) * nq, S{});
  for (int b = 0; b < r1; ++b)
    for (int a = 0; a < r1; ++a) {
      const S c = local[a + r1 * b];
      for (int qx = 0; qx < nq; ++qx) {
        tv[b * nq + qx] += c * table_.value(a, qx);
        td[b * nq + qx] += c * table_.deriv(a, qx);
      }
    }
  for (int qy = 0; qy < nq; ++qy)
    for (int qx = 0; qx < nq; ++qx) {
      S ax{}, ay{};
      for (int b = 0; b < r1; ++b) {
        ax += td[b * nq + qx] * table_.value(b, qy);
        ay += tv[b * nq + qx] * table_.deriv(b, qy);
      }
      gx[qy * nq + qx] = ax * sx;
      gy[qy * nq + qx] = ay * sy;
    }
}

template void Workspace::gather<double>(const RealField&, int, std::span<double>) const;
template void Workspace::gather<cplx>(const ComplexField&, int, std::span<cplx>) const;
template void Workspace::eval_values<double>(std::span<const double>, std::span<double>) const;
template void Workspace::eval_values<cplx>(std::span<const cplx>, std::span<cplx>) const;
template void Workspace::eval_gradients<double>(std::span<const double>, std::span<double>,
                                                std::span<double>) const;
template void Workspace::eval_gradients<cplx>(std::span<const cplx>, std::span<cplx>,
                                              std::span<cplx>) const;

SparseMatrix build_pattern(const Grid& grid) {
  const int nloc = grid.nloc();
  std::vector<std::vector<int>> adj(grid.n_dofs);
  for (int c = 0; c < grid.n_cells(); ++c) {
    for (int i = 0; i < nloc; ++i) {
      const std::int64_t di = grid.dof(c, i);
      if (di < 0) continue;
      auto& row = adj[static_cast<std::size_t>(di)];
      for (int j = 0; j < nloc; ++j) {
        const std::int64_t dj = grid.dof(c, j);
        if (dj >= 0) row.push_back(static_cast<int>(dj));
      }
    }
  }
  SparseMatrix m;
  m.n_rows = m.n_cols = grid.n_dofs;
  m.row_offsets.resize(grid.n_dofs + 1);
  m.row_offsets[0] = 0;
  for (int i = 0; i < grid.n_dofs; ++i) {
    auto& row = adj[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    m.row_offsets[i + 1] = m.row_offsets[i] + static_cast<std::int64_t>(row.size());
  }
  m.cols.resize(m.row_offsets.back());
  for (int i = 0; i < grid.n_dofs; ++i)
    std::copy(adj[i].begin(), adj[i].end(), m.cols.begin() + m.row_offsets[i]);
  m.vals.assign(m.cols.size(), 0.0);
  return m;
}

namespace {

void scatter_add(SparseMatrix& m, int i, int j, double v) {
  const auto begin = m.cols.begin() + m.row_offsets[i];
  const auto end = m.cols.begin() + m.row_offsets[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  m.vals[static_cast<std::size_t>(it - m.cols.begin())] += v;
}

// 1D reference matrices on [0,1]: mass[a,c] = sum_q w phi_a phi_c and
// stiff[a,c] = sum_q w phi_a' phi_c'. Upper triangle mirrored so the result
// is bitwise symmetric.
void reference_1d(const Workspace& ws, std::vector<double>& mass, std::vector<double>& stiff) {
  const int r1 = ws.grid().r + 1, nq = ws.nq_axis();
  const auto& tab = ws.table();
  const auto& w = ws.rule().weights;
  mass.assign(static_cast<std::size_t>(r1) * r1, 0.0);
  stiff.assign(static_cast<std::size_t>(r1) * r1, 0.0);
  for (int a = 0; a < r1; ++a)
    for (int c = a; c < r1; ++c) {
      double mv = 0.0, kv = 0.0;
      for (int q = 0; q < nq; ++q) {
        mv += w[q] * tab.value(a, q) * tab.value(c, q);
        kv += w[q] * tab.deriv(a, q) * tab.deriv(c, q);
      }
      mass[a * r1 + c] = mv;
      mass[c * r1 + a] = mv;
      stiff[a * r1 + c] = kv;
      stiff[c * r1 + a] = kv;
    }
}

SparseMatrix assemble_from_local(const Grid& grid, const std::vector<double>& local) {
  SparseMatrix m = build_pattern(grid);
  const int nloc = grid.nloc();
  for (int c = 0; c < grid.n_cells(); ++c)
    for (int i = 0; i < nloc; ++i) {
      const std::int64_t di = grid.dof(c, i);
      if (di < 0) continue;
      for (int j = 0; j < nloc; ++j) {
        const std::int64_t dj = grid.dof(c, j);
        if (dj < 0) continue;
        scatter_add(m, static_cast<int>(di), static_cast<int>(dj),
                    local[static_cast<std::size_t>(i) * nloc + j]);
      }
    }
  return m;
}

} // namespace

std::vector<double> local_mass_matrix(const Workspace& ws) {
  const Grid& g = ws.grid();
  const int r1 = g.r + 1, nloc = g.nloc();
  std::vector<double> m1, k1;
  reference_1d(ws, m1, k1);
  std::vector<double> local(static_cast<std::size_t>(nloc) * nloc);
  for (int b = 0; b < r1; ++b)
    for (int a = 0; a < r1; ++a)
      for (int d = 0; d < r1; ++d)
        for (int c = 0; c < r1; ++c)
          local[static_cast<std::size_t>(a + r1 * b) * nloc + (c + r1 * d)] =
              (g.hx * m1[a * r1 + c]) * (g.hy * m1[b * r1 + d]);
  return local;
}

std::vector<double> local_laplace_matrix(const Workspace& ws) {
  const Grid& g = ws.grid();
  const int r1 = g.r + 1, nloc = g.nloc();
  std::vector<double> m1, k1;
  reference_1d(ws, m1, k1);
  const double cx = g.hy / g.hx, cy = g.hx / g.hy;
  std::vector<double> local(static_cast<std::size_t>(nloc) * nloc);
  for (int b = 0; b < r1; ++b)
    for (int a = 0; a < r1; ++a)
      for (int d = 0; d < r1; ++d)
        for (int c = 0; c < r1; ++c)
          local[static_cast<std::size_t>(a + r1 * b) * nloc + (c + r1 * d)] =
              cx * k1[a * r1 + c] * m1[b * r1 + d] + cy * m1[a * r1 + c] * k1[b * r1 + d];
  return local;
}

SparseMatrix assemble_mass(const Workspace& ws) {
  return assemble_from_local(ws.grid(), local_mass_matrix(ws));
}

SparseMatrix assemble_laplace(const Workspace& ws) {
  return assemble_from_local(ws.grid(), local_laplace_matrix(ws));
}

SparseMatrix assemble_weighted_mass(const Workspace& ws, const RealField& w) {
  const Grid& g = ws.grid();
  if (w.grid != &g) throw ConfigurationError("assemble_weighted_mass: field on different grid");
  SparseMatrix m = build_pattern(g);
  const int nloc = g.nloc(), nq = ws.nq_axis(), r1 = g.r + 1;
  const auto& tab = ws.table();
  std::vector<double> local(nloc), wq(ws.nq_cell()), lm(static_cast<std::size_t>(nloc) * nloc);
  for (int c = 0; c < g.n_cells(); ++c) {
    ws.gather(w, c, std::span<double>(local));
    ws.eval_values(std::span<const double>(local), std::span<double>(wq));
    for (int q = 0; q < ws.nq_cell(); ++q) wq[q] *= ws.quad_weight(q);
    // Upper triangle then mirror, to keep the matrix bitwise symmetric.
    for (int i = 0; i < nloc; ++i) {
      const int ax = i % r1, ay = i / r1;
      for (int j = i; j < nloc; ++j) {
        const int bx = j % r1, by = j / r1;
        double acc = 0.0;
        for (int qy = 0; qy < nq; ++qy) {
          const double py = tab.value(ay, qy) * tab.value(by, qy);
          double inner = 0.0;
          for (int qx = 0; qx < nq; ++qx)
            inner += wq[qy * nq + qx] * tab.value(ax, qx) * tab.value(bx, qx);
          acc += py * inner;
        }
        lm[static_cast<std::size_t>(i) * nloc + j] = acc;
        lm[static_cast<std::size_t>(j) * nloc + i] = acc;
      }
    }
    for (int i = 0; i < nloc; ++i) {
      const std::int64_t di = g.dof(c, i);
      if (di < 0) continue;
      for (int j = 0; j < nloc; ++j) {
        const std::int64_t dj = g.dof(c, j);
        if (dj < 0) continue;
        scatter_add(m, static_cast<int>(di), static_cast<int>(dj),
                    lm[static_cast<std::size_t>(i) * nloc + j]);
      }
    }
  }
  return m;
}

namespace {

template <class S, class Eval>
std::vector<S> assemble_load_impl(const Workspace& ws, Eval&& values_at_cell) {
  const Grid& g = ws.grid();
  const int nloc = g.nloc(), nq = ws.nq_axis(), r1 = g.r + 1;
  const auto& tab = ws.table();
  std::vector<S> b(g.n_dofs, S{});
  std::vector<S> fq(ws.nq_cell());
  for (int c = 0; c < g.n_cells(); ++c) {
    values_at_cell(c, fq);
    for (int q = 0; q < ws.nq_cell(); ++q) fq[q] *= ws.quad_weight(q);
    for (int l = 0; l < nloc; ++l) {
      const std::int64_t d = g.dof(c, l);
      if (d < 0) continue;
      const int ax = l % r1, ay = l / r1;
      S acc{};
      for (int qy = 0; qy < nq; ++qy) {
        S inner{};
        for (int qx = 0; qx < nq; ++qx) inner += fq[qy * nq + qx] * tab.value(ax, qx);
        acc += inner * tab.value(ay, qy);
      }
      b[static_cast<std::size_t>(d)] += acc;
    }
  }
  return b;
}

} // namespace

std::vector<double> detail::assemble_load_real(const Workspace& ws,
                                               const std::function<double(double, double)>& f) {
  return assemble_load_impl<double>(ws, [&](int c, std::vector<double>& fq) {
    for (int q = 0; q < ws.nq_cell(); ++q) {
      const auto p = ws.quad_point(c, q);
      fq[q] = f(p[0], p[1]);
    }
  });
}

std::vector<cplx> detail::assemble_load_cplx(const Workspace& ws,
                                             const std::function<cplx(double, double)>& f) {
  return assemble_load_impl<cplx>(ws, [&](int c, std::vector<cplx>& fq) {
    for (int q = 0; q < ws.nq_cell(); ++q) {
      const auto p = ws.quad_point(c, q);
      fq[q] = f(p[0], p[1]);
    }
  });
}

std::vector<double> assemble_load(const Workspace& ws, const RealField& f) {
  std::vector<double> local(ws.grid().nloc());
  return assemble_load_impl<double>(ws, [&](int c, std::vector<double>& fq) {
    ws.gather(f, c, std::span<double>(local));
    ws.eval_values(std::span<const double>(local), std::span<double>(fq));
  });
}

std::vector<cplx> assemble_load(const Workspace& ws, const ComplexField& f) {
  std::vector<cplx> local(ws.grid().nloc());
  return assemble_load_impl<cplx>(ws, [&](int c, std::vector<cplx>& fq) {
    ws.gather(f, c, std::span<cplx>(local));
    ws.eval_values(std::span<const cplx>(local), std::span<cplx>(fq));
  });
}

std::vector<double> assemble_density_load(const Workspace& ws, const ComplexField& U) {
  std::vector<cplx> local(ws.grid().nloc()), uq(ws.nq_cell());
  return assemble_load_impl<double>(ws, [&](int c, std::vector<double>& fq) {
    ws.gather(U, c, std::span<cplx>(local));
    ws.eval_values(std::span<const cplx>(local), std::span<cplx>(uq));
    for (int q = 0; q < ws.nq_cell(); ++q) fq[q] = std::norm(uq[q]);
  });
}

namespace {

std::vector<double> solve_mass(const SparseMatrix& M, const std::vector<double>& load,
                               double tol, int max_iter, const char* stage) {
  auto [x, rep] = cg_solve(M, load, tol, max_iter);
  if (!rep.converged)
    throw NumericalError(std::string(stage) + ": mass solve failed, relative residual " +
                         std::to_string(rep.rel_residual));
  return x;
}

} // namespace

RealField l2_project_load(const Workspace& ws, const SparseMatrix& M, std::vector<double> load,
                          double tol, int max_iter) {
  return RealField(ws.grid(), solve_mass(M, load, tol, max_iter, "l2_project"));
}

ComplexField l2_project_load(const Workspace& ws, const SparseMatrix& M, std::vector<cplx> load,
                             double tol, int max_iter) {
  const int n = M.n_rows;
  std::vector<double> re(n), im(n);
  for (int i = 0; i < n; ++i) {
    re[i] = load[i].real();
    im[i] = load[i].imag();
  }
  const std::vector<double> xr = solve_mass(M, re, tol, max_iter, "l2_project");
  const std::vector<double> xi = solve_mass(M, im, tol, max_iter, "l2_project");
  std::vector<cplx> x(n);
  for (int i = 0; i < n; ++i) x[i] = cplx(xr[i], xi[i]);
  return ComplexField(ws.grid(), std::move(x));
}

RealField detail::l2_project_real(const Workspace& ws, const SparseMatrix& M,
                                  const std::function<double(double, double)>& f, double tol,
                                  int max_iter) {
  return l2_project_load(ws, M, detail::assemble_load_real(ws, f), tol, max_iter);
}

ComplexField detail::l2_project_cplx(const Workspace& ws, const SparseMatrix& M,
                                     const std::function<cplx(double, double)>& f, double tol,
                                     int max_iter) {
  return l2_project_load(ws, M, detail::assemble_load_cplx(ws, f), tol, max_iter);
}

RealField discrete_laplacian_apply(const Workspace& ws, const SparseMatrix& M,
                                   const SparseMatrix& L, const RealField& v, double tol,
                                   int max_iter) {
  std::vector<double> rhs = L.multiply(v.coeffs);
  for (double& x : rhs) x = -x;
  return RealField(ws.grid(), solve_mass(M, rhs, tol, max_iter, "discrete_laplacian"));
}

ComplexField discrete_laplacian_apply(const Workspace& ws, const SparseMatrix& M,
                                      const SparseMatrix& L, const ComplexField& v, double tol,
                                      int max_iter) {
  const int n = M.n_rows;
  std::vector<cplx> rhs = L.multiply(v.coeffs);
  std::vector<double> re(n), im(n);
  for (int i = 0; i < n; ++i) {
    re[i] = -rhs[i].real();
    im[i] = -rhs[i].imag();
  }
  const std::vector<double> xr = solve_mass(M, re, tol, max_iter, "discrete_laplacian");
  const std::vector<double> xi = solve_mass(M, im, tol, max_iter, "discrete_laplacian");
  std::vector<cplx> x(n);
  for (int i = 0; i < n; ++i) x[i] = cplx(xr[i], xi[i]);
  return ComplexField(ws.grid(), std::move(x));
}

double integrate(const Workspace& ws, const std::function<double(double, double)>& f) {
  double acc = 0.0;
  for (int c = 0; c < ws.grid().n_cells(); ++c)
    for (int q = 0; q < ws.nq_cell(); ++q) {
      const auto p = ws.quad_point(c, q);
      acc += ws.quad_weight(q) * f(p[0], p[1]);
    }
  return acc;
}

double integrate_density(const Workspace& ws, const ComplexField& U) {
  std::vector<cplx> local(ws.grid().nloc()), uq(ws.nq_cell());
  double acc = 0.0;
  for (int c = 0; c < ws.grid().n_cells(); ++c) {
    ws.gather(U, c, std::span<cplx>(local));
    ws.eval_values(std::span<const cplx>(local), std::span<cplx>(uq));
    for (int q = 0; q < ws.nq_cell(); ++q) acc += ws.quad_weight(q) * std::norm(uq[q]);
  }
  return acc;
}

} // namespace sprelax
