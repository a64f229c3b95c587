#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sprelax/errors.hpp"
#include "sprelax/grid.hpp"
#include "sprelax/quadrature.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace sprelax;

namespace {
const Domain kUnit{-1.0, 1.0, -1.0, 1.0};
}

TEST_CASE("dof counts match the closed-form formulas") {
  CHECK(build_grid(kUnit, 2, 2, 1, BcKind::Dirichlet).n_dofs == 1);
  const Grid g = build_grid(kUnit, 8, 8, 1, BcKind::Dirichlet);
  CHECK(g.n_dofs == 49);
  CHECK(g.hx == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(build_grid({-0.5, 0.5, -0.5, 0.5}, 4, 4, 2, BcKind::Periodic).n_dofs == 64);

  for (int nx = 1; nx <= 4; ++nx)
    for (int ny = 1; ny <= 4; ++ny)
      for (int r = 1; r <= 3; ++r) {
        CHECK(build_grid(kUnit, nx, ny, r, BcKind::Dirichlet).n_dofs ==
              expected_dof_count(nx, ny, r, BcKind::Dirichlet));
        if (nx >= 2 && ny >= 2)
          CHECK(build_grid(kUnit, nx, ny, r, BcKind::Periodic).n_dofs ==
                expected_dof_count(nx, ny, r, BcKind::Periodic));
      }
}

TEST_CASE("connectivity covers every dof with in-range indices") {
  for (BcKind bc : {BcKind::Dirichlet, BcKind::Periodic})
    for (int nx = 2; nx <= 4; ++nx)
      for (int r = 1; r <= 3; ++r) {
        const Grid g = build_grid(kUnit, nx, nx, r, bc);
        std::set<std::int64_t> seen;
        for (int c = 0; c < g.n_cells(); ++c)
          for (int l = 0; l < g.nloc(); ++l) {
            const std::int64_t d = g.dof(c, l);
            CHECK(d >= -1);
            CHECK(d < g.n_dofs);
            if (d >= 0) seen.insert(d);
          }
        CHECK(static_cast<int>(seen.size()) == g.n_dofs);
      }
}

TEST_CASE("dof coordinates: single-dof grid sits at the domain center") {
  const Grid g = build_grid(kUnit, 2, 2, 1, BcKind::Dirichlet);
  const auto p = dof_coordinates(g, 0);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.0);
  CHECK_THROWS_AS((void)dof_coordinates(g, 1), ConfigurationError);
  CHECK_THROWS_AS((void)dof_coordinates(g, -1), ConfigurationError);
}

TEST_CASE("dof coordinates: periodic dof 0 is the (xmin, ymin) corner") {
  const Grid g = build_grid(kUnit, 3, 3, 2, BcKind::Periodic);
  const auto p = dof_coordinates(g, 0);
  CHECK(p[0] == -1.0);
  CHECK(p[1] == -1.0);
}

TEST_CASE("dof coordinates: 2x2 cells at r=2 give the 3x3 interior lattice") {
  // Hand enumeration: 1D lattice -1, -0.5, 0, 0.5, 1; interior {-0.5, 0, 0.5}.
  const Grid g = build_grid(kUnit, 2, 2, 2, BcKind::Dirichlet);
  REQUIRE(g.n_dofs == 9);
  const double expect[3] = {-0.5, 0.0, 0.5};
  for (int dy = 0; dy < 3; ++dy)
    for (int dx = 0; dx < 3; ++dx) {
      const auto p = dof_coordinates(g, dy * 3 + dx);
      CHECK(p[0] == doctest::Approx(expect[dx]).epsilon(1e-15));
      CHECK(p[1] == doctest::Approx(expect[dy]).epsilon(1e-15));
    }
}

TEST_CASE("periodic edges identify: field values at xmin and xmax share a dof") {
  const Grid g = build_grid(kUnit, 4, 3, 2, BcKind::Periodic);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int b = 0; b <= g.r; ++b) {
      const int left = iy * g.nx + 0, right = iy * g.nx + (g.nx - 1);
      CHECK(g.dof(left, 0 + (g.r + 1) * b) == g.dof(right, g.r + (g.r + 1) * b));
    }
  for (int ix = 0; ix < g.nx; ++ix)
    for (int a = 0; a <= g.r; ++a) {
      const int bottom = 0 * g.nx + ix, top = (g.ny - 1) * g.nx + ix;
      CHECK(g.dof(bottom, a) == g.dof(top, a + (g.r + 1) * g.r));
    }
}

TEST_CASE("affine node maps of adjacent cells agree bitwise on shared edges") {
  for (BcKind bc : {BcKind::Dirichlet, BcKind::Periodic}) {
    const Grid g = build_grid({-1.0, 1.0, -0.3, 0.9}, 3, 4, 3, bc);
    for (int c = 0; c < g.n_cells(); ++c) {
      const int ix = c % g.nx, iy = c / g.nx;
      for (int b = 0; b <= g.r; ++b)
        for (int a = 0; a <= g.r; ++a) {
          const std::int64_t d = g.dof(c, a + (g.r + 1) * b);
          if (d < 0) continue;
          if (bc == BcKind::Periodic && ((ix * g.r + a) == g.nx * g.r ||
                                         (iy * g.r + b) == g.ny * g.r))
            continue; // wrapped representative lives on the opposite edge
          const double x = g.domain.xmin + g.hx * (ix + g.local_nodes[a]);
          const double y = g.domain.ymin + g.hy * (iy + g.local_nodes[b]);
          const auto p = dof_coordinates(g, static_cast<int>(d));
          CHECK(p[0] == x);
          CHECK(p[1] == y);
        }
    }
  }
}

TEST_CASE("gauss-lobatto nodes: endpoints exact, symmetric, correct low orders") {
  CHECK(gauss_lobatto_nodes(1) == std::vector<double>{0.0, 1.0});
  const auto n2 = gauss_lobatto_nodes(2);
  CHECK(n2[1] == 0.5);
  const auto n3 = gauss_lobatto_nodes(3); // interior at (1 +- 1/sqrt(5))/2
  CHECK(n3[1] == doctest::Approx(0.5 * (1.0 - 1.0 / std::sqrt(5.0))).epsilon(1e-14));
  for (int r = 2; r <= 9; ++r) {
    const auto n = gauss_lobatto_nodes(r);
    CHECK(n.front() == 0.0);
    CHECK(n.back() == 1.0);
    for (int i = 0; i + 1 <= r; ++i) CHECK(n[i] < n[i + 1]);
    for (int i = 0; i <= r; ++i) CHECK(n[i] == doctest::Approx(1.0 - n[r - i]).epsilon(1e-14));
  }
}

TEST_CASE("invalid grid parameters are rejected") {
  CHECK_THROWS_AS((void)build_grid(kUnit, 0, 2, 1, BcKind::Dirichlet), ConfigurationError);
  CHECK_THROWS_AS((void)build_grid(kUnit, 2, 2, 0, BcKind::Dirichlet), ConfigurationError);
  CHECK_THROWS_AS((void)build_grid(kUnit, 1, 2, 1, BcKind::Periodic), ConfigurationError);
  CHECK_THROWS_AS((void)build_grid({1.0, -1.0, 0.0, 1.0}, 2, 2, 1, BcKind::Dirichlet),
                  ConfigurationError);
}
