#include "sprelax/grid.hpp"

#include "sprelax/errors.hpp"
#include "sprelax/quadrature.hpp"

#include <string>

namespace sprelax {

int expected_dof_count(int nx, int ny, int r, BcKind bc) {
  if (bc == BcKind::Dirichlet) return (nx * r - 1) * (ny * r - 1);
  return (nx * r) * (ny * r);
}

Grid build_grid(const Domain& domain, int nx, int ny, int r, BcKind bc) {
  if (!(domain.xmax > domain.xmin) || !(domain.ymax > domain.ymin))
    throw ConfigurationError("build_grid: domain must have positive extent");
  if (nx < 1 || ny < 1)
    throw ConfigurationError("build_grid: cell counts must be >= 1, got nx=" +
                             std::to_string(nx) + " ny=" + std::to_string(ny));
  if (r < 1) throw ConfigurationError("build_grid: polynomial degree must be >= 1");
  if (bc == BcKind::Periodic && (nx < 2 || ny < 2))
    throw ConfigurationError("build_grid: periodic grids need nx, ny >= 2");

  Grid g;
  g.domain = domain;
  g.nx = nx;
  g.ny = ny;
  g.r = r;
  g.bc = bc;
  g.hx = domain.width() / nx;
  g.hy = domain.height() / ny;
  g.local_nodes = gauss_lobatto_nodes(r);

  // Global 1D lattice coordinates; one entry per lattice line so shared edge
  // nodes get a single, bitwise-identical coordinate.
  const int lx = nx * r, ly = ny * r; // last lattice index per axis
  std::vector<double> xs(lx + 1), ys(ly + 1);
  for (int gx = 0; gx <= lx; ++gx) {
    int ix = gx / r, a = gx % r;
    if (gx == lx) {
      ix = nx - 1;
      a = r;
    }
    xs[gx] = domain.xmin + g.hx * (ix + g.local_nodes[a]);
  }
  for (int gy = 0; gy <= ly; ++gy) {
    int iy = gy / r, b = gy % r;
    if (gy == ly) {
      iy = ny - 1;
      b = r;
    }
    ys[gy] = domain.ymin + g.hy * (iy + g.local_nodes[b]);
  }

  const int nloc = g.nloc();
  g.conn.assign(static_cast<std::size_t>(g.n_cells()) * nloc, -1);

  if (bc == BcKind::Dirichlet) {
    const int n1x = lx - 1, n1y = ly - 1;
    g.n_dofs = n1x * n1y;
    g.dof_coords.resize(g.n_dofs);
    for (int dy = 0; dy < n1y; ++dy)
      for (int dx = 0; dx < n1x; ++dx)
        g.dof_coords[static_cast<std::size_t>(dy) * n1x + dx] = {xs[dx + 1], ys[dy + 1]};
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t cell = static_cast<std::size_t>(iy) * nx + ix;
        for (int b = 0; b <= r; ++b)
          for (int a = 0; a <= r; ++a) {
            const int gx = ix * r + a, gy = iy * r + b;
            if (gx == 0 || gx == lx || gy == 0 || gy == ly) continue;
            g.conn[cell * nloc + (a + (r + 1) * b)] =
                static_cast<std::int64_t>(gy - 1) * n1x + (gx - 1);
          }
      }
  } else {
    g.n_dofs = lx * ly;
    g.dof_coords.resize(g.n_dofs);
    for (int gy = 0; gy < ly; ++gy)
      for (int gx = 0; gx < lx; ++gx)
        g.dof_coords[static_cast<std::size_t>(gy) * lx + gx] = {xs[gx], ys[gy]};
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t cell = static_cast<std::size_t>(iy) * nx + ix;
        for (int b = 0; b <= r; ++b)
          for (int a = 0; a <= r; ++a) {
            const int gx = (ix * r + a) % lx, gy = (iy * r + b) % ly;
            g.conn[cell * nloc + (a + (r + 1) * b)] =
                static_cast<std::int64_t>(gy) * lx + gx;
          }
      }
  }
  return g;
}

std::array<double, 2> dof_coordinates(const Grid& grid, int dof) {
  if (dof < 0 || dof >= grid.n_dofs)
    throw ConfigurationError("dof_coordinates: index " + std::to_string(dof) +
                             " out of range [0," + std::to_string(grid.n_dofs) + ")");
  return grid.dof_coords[static_cast<std::size_t>(dof)];
}

} // namespace sprelax
