#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sprelax/assembly.hpp"
#include "sprelax/grid.hpp"
#include "sprelax/quadrature.hpp"
#include "sprelax/sparse.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace sprelax;

namespace {

double entry(const SparseMatrix& m, int i, int j) {
  for (std::int64_t k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
    if (m.cols[k] == j) return m.vals[k];
  return 0.0;
}

double frob_norm(const SparseMatrix& m) {
  double s = 0.0;
  for (double v : m.vals) s += v * v;
  return std::sqrt(s);
}

} // namespace

TEST_CASE("gauss-legendre quadrature integrates monomials exactly") {
  for (int n = 1; n <= 8; ++n) {
    const Quadrature1D q = gauss_legendre(n);
    for (int a = 0; a <= 2 * n - 1; ++a) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += q.weights[i] * std::pow(q.points[i], a);
      CHECK(acc == doctest::Approx(1.0 / (a + 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("2d tensor rule: weights sum to the cell area, monomials exact") {
  const Grid g = build_grid({0.0, 1.0, 0.0, 1.0}, 1, 1, 2, BcKind::Dirichlet);
  const Workspace ws(g);
  double wsum = 0.0;
  for (int q = 0; q < ws.nq_cell(); ++q) wsum += ws.quad_weight(q);
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));

  const int nq = ws.nq_axis();
  for (int a = 0; a <= 2 * nq - 1; a += 3)
    for (int b = 0; b <= 2 * nq - 1; b += 4) {
      double acc = 0.0;
      for (int q = 0; q < ws.nq_cell(); ++q) {
        const auto p = ws.quad_point(0, q);
        acc += ws.quad_weight(q) * std::pow(p[0], a) * std::pow(p[1], b);
      }
      CHECK(acc == doctest::Approx(1.0 / ((a + 1.0) * (b + 1.0))).epsilon(1e-14));
    }
}

TEST_CASE("bilinear local matrices match the analytic element integrals") {
  const Grid g = build_grid({0.0, 1.0, 0.0, 1.0}, 1, 1, 1, BcKind::Dirichlet);
  const Workspace ws(g);
  const auto M = local_mass_matrix(ws);
  const auto L = local_laplace_matrix(ws);
  const double m_ref[16] = {4, 2, 2, 1, 2, 4, 1, 2, 2, 1, 4, 2, 1, 2, 2, 4};
  const double l_ref[16] = {4, -1, -1, -2, -1, 4, -2, -1, -1, -2, 4, -1, -2, -1, -1, 4};
  for (int k = 0; k < 16; ++k) {
    CHECK(M[k] == doctest::Approx(m_ref[k] / 36.0).epsilon(1e-14));
    CHECK(L[k] == doctest::Approx(l_ref[k] / 6.0).epsilon(1e-14));
  }
}

TEST_CASE("mass matrix: partition of unity on a periodic grid") {
  const Grid g = build_grid({-0.5, 0.5, -0.5, 0.5}, 4, 4, 2, BcKind::Periodic);
  const Workspace ws(g);
  const SparseMatrix M = assemble_mass(ws);
  double total = 0.0;
  for (double v : M.vals) total += v;
  CHECK(total == doctest::Approx(g.domain.area()).epsilon(1e-13));
}

TEST_CASE("mass matrix is bitwise symmetric and assembly is deterministic") {
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 3, 4, 3, BcKind::Dirichlet);
  const Workspace ws(g);
  const SparseMatrix M1 = assemble_mass(ws);
  const SparseMatrix M2 = assemble_mass(ws);
  CHECK(M1.row_offsets == M2.row_offsets);
  CHECK(M1.cols == M2.cols);
  CHECK(M1.vals == M2.vals); // bitwise
  for (int i = 0; i < M1.n_rows; ++i)
    for (std::int64_t k = M1.row_offsets[i]; k < M1.row_offsets[i + 1]; ++k)
      CHECK(entry(M1, M1.cols[k], i) == M1.vals[k]); // bitwise transpose equality
}

TEST_CASE("laplace matrix: constants in the kernel on periodic grids") {
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 4, 4, 2, BcKind::Periodic);
  const Workspace ws(g);
  const SparseMatrix L = assemble_laplace(ws);
  const std::vector<double> ones(g.n_dofs, 1.0);
  const std::vector<double> y = L.multiply(ones);
  for (double v : y) CHECK(std::abs(v) < 1e-13 * frob_norm(L));
}

TEST_CASE("laplace matrix is positive-definite under dirichlet conditions") {
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 5, 5, 1, BcKind::Dirichlet);
  const Workspace ws(g);
  const SparseMatrix L = assemble_laplace(ws);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> b(g.n_dofs);
  for (double& v : b) v = dist(gen);
  const auto [x, rep] = cg_solve(L, b, 1e-12, 10 * g.n_dofs);
  CHECK(rep.converged);
}

TEST_CASE("weighted mass: unit weight reproduces the mass matrix") {
  // Periodic grid so the constant weight is exactly representable.
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 3, 3, 2, BcKind::Periodic);
  const Workspace ws(g);
  const SparseMatrix M = assemble_mass(ws);
  RealField w(g);

  for (double& v : w.coeffs) v = 1.0;
  const SparseMatrix P1 = assemble_weighted_mass(ws, w);
  REQUIRE(P1.vals.size() == M.vals.size());
  for (std::size_t k = 0; k < M.vals.size(); ++k)
    CHECK(P1.vals[k] == doctest::Approx(M.vals[k]).epsilon(1e-13));

  for (double& v : w.coeffs) v = 0.0;
  const SparseMatrix P0 = assemble_weighted_mass(ws, w);
  for (double v : P0.vals) CHECK(v == 0.0);

  for (double& v : w.coeffs) v = -2.75;
  const SparseMatrix Pc = assemble_weighted_mass(ws, w);
  for (std::size_t k = 0; k < M.vals.size(); ++k)
    CHECK(Pc.vals[k] == doctest::Approx(-2.75 * M.vals[k]).epsilon(1e-13));
}

TEST_CASE("load vectors: zero, constant, and basis-function cases") {
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 4, 4, 1, BcKind::Periodic);
  const Workspace ws(g);
  const SparseMatrix M = assemble_mass(ws);

  const auto b0 = assemble_load(ws, [](double, double) { return 0.0; });
  for (double v : b0) CHECK(v == 0.0);

  const auto b1 = assemble_load(ws, [](double, double) { return 1.0; });
  const std::vector<double> m1 = M.multiply(std::vector<double>(g.n_dofs, 1.0));
  for (int i = 0; i < g.n_dofs; ++i) CHECK(b1[i] == doctest::Approx(m1[i]).epsilon(1e-13));

  const int k = g.n_dofs / 2;
  RealField phi_k(g);
  phi_k.coeffs[k] = 1.0;
  const auto bk = assemble_load(ws, phi_k);
  for (int i = 0; i < g.n_dofs; ++i) CHECK(bk[i] == doctest::Approx(entry(M, i, k)).epsilon(1e-14));
}

TEST_CASE("l2 projection: idempotent on fe fields, exact on constants") {
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 3, 3, 2, BcKind::Periodic);
  const Workspace ws(g);
  const SparseMatrix M = assemble_mass(ws);

  std::mt19937 gen(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  RealField f(g);
  for (double& v : f.coeffs) v = dist(gen);
  const RealField pf = l2_project_load(ws, M, assemble_load(ws, f));
  for (int i = 0; i < g.n_dofs; ++i)
    CHECK(pf.coeffs[i] == doctest::Approx(f.coeffs[i]).epsilon(1e-12));

  const RealField pc = l2_project(ws, M, [](double, double) { return 3.25; });
  for (double v : pc.coeffs) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("l2 projection error decreases at second order for r=1") {
  auto run = [](int n) {
    const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, n, n, 1, BcKind::Dirichlet);
    const Workspace ws(g);
    const SparseMatrix M = assemble_mass(ws);
    auto f = [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); };
    const RealField p = l2_project(ws, M, f);
    // L2 error by quadrature
    double err2 = 0.0;
    std::vector<double> local(g.nloc()), vals(ws.nq_cell());
    for (int c = 0; c < g.n_cells(); ++c) {
      ws.gather(p, c, std::span<double>(local));
      ws.eval_values(std::span<const double>(local), std::span<double>(vals));
      for (int q = 0; q < ws.nq_cell(); ++q) {
        const auto pt = ws.quad_point(c, q);
        const double d = vals[q] - f(pt[0], pt[1]);
        err2 += ws.quad_weight(q) * d * d;
      }
    }
    return std::sqrt(err2);
  };
  const double e1 = run(8), e2 = run(16);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("discrete laplacian: zero input, linearity, sign") {
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 4, 4, 2, BcKind::Dirichlet);
  const Workspace ws(g);
  const SparseMatrix M = assemble_mass(ws);
  const SparseMatrix L = assemble_laplace(ws);

  RealField zero(g);
  const RealField dz = discrete_laplacian_apply(ws, M, L, zero);
  for (double v : dz.coeffs) CHECK(v == 0.0);

  std::mt19937 gen(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  RealField v1(g), v2(g);
  for (double& v : v1.coeffs) v = dist(gen);
  for (double& v : v2.coeffs) v = dist(gen);
  const double a = 1.7;
  RealField comb(g);
  for (int i = 0; i < g.n_dofs; ++i) comb.coeffs[i] = a * v1.coeffs[i] + v2.coeffs[i];
  const RealField d1 = discrete_laplacian_apply(ws, M, L, v1);
  const RealField d2 = discrete_laplacian_apply(ws, M, L, v2);
  const RealField dc = discrete_laplacian_apply(ws, M, L, comb);
  for (int i = 0; i < g.n_dofs; ++i)
    CHECK(dc.coeffs[i] == doctest::Approx(a * d1.coeffs[i] + d2.coeffs[i]).epsilon(1e-10));

  // (-Lap_h v, v) = v' L v >= 0
  const std::vector<double> mv = M.multiply(d1.coeffs);
  double lhs = 0.0;
  for (int i = 0; i < g.n_dofs; ++i) lhs -= mv[i] * v1.coeffs[i];
  const std::vector<double> lv = L.multiply(v1.coeffs);
  double rhs = 0.0;
  for (int i = 0; i < g.n_dofs; ++i) rhs += lv[i] * v1.coeffs[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  CHECK(rhs >= 0.0);
}

TEST_CASE("quadrature of |u_h|^2 equals the mass-matrix quadratic form") {
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 4, 3, 2, BcKind::Dirichlet);
  const Workspace ws(g);
  const SparseMatrix M = assemble_mass(ws);
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ComplexField u(g);
  for (auto& v : u.coeffs) v = cplx(dist(gen), dist(gen));
  const double direct = integrate_density(ws, u);
  const std::vector<cplx> mu = M.multiply(u.coeffs);
  cplx form = 0.0;
  for (int i = 0; i < g.n_dofs; ++i) form += std::conj(u.coeffs[i]) * mu[i];
  CHECK(direct == doctest::Approx(form.real()).epsilon(1e-12));
}

TEST_CASE("sparsity pattern holds exactly the cell-sharing pairs") {
  const Grid g = build_grid({-1.0, 1.0, -1.0, 1.0}, 3, 3, 1, BcKind::Dirichlet);
  const SparseMatrix pat = build_pattern(g);
  std::vector<std::set<int>> share(g.n_dofs);
  for (int c = 0; c < g.n_cells(); ++c)
    for (int i = 0; i < g.nloc(); ++i)
      for (int j = 0; j < g.nloc(); ++j) {
        const auto di = g.dof(c, i), dj = g.dof(c, j);
        if (di >= 0 && dj >= 0) share[di].insert(static_cast<int>(dj));
      }
  for (int i = 0; i < g.n_dofs; ++i) {
    std::set<int> in_pattern;
    for (std::int64_t k = pat.row_offsets[i]; k < pat.row_offsets[i + 1]; ++k)
      in_pattern.insert(pat.cols[k]);
    CHECK(in_pattern == share[i]);
  }
}
