#ifndef SPRELAX_GRID_HPP
#define SPRELAX_GRID_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace sprelax {

enum class BcKind { Dirichlet, Periodic };

/// Axis-aligned rectangular domain.
struct Domain {
  double xmin, xmax, ymin, ymax;
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
};

/// Uniform tensor-product quadrilateral mesh with degree-r Lagrange elements.
///
/// Element-local nodes sit at Gauss-Lobatto points mapped affinely to each
/// cell; global numbering is lexicographic in (y-node, x-node). Homogeneous
/// Dirichlet boundaries are handled by eliminating boundary nodes from the
/// global space (their connectivity entries are -1); periodic boundaries
/// identify opposite edges. Immutable after construction.
struct Grid {
  Domain domain{};
  int nx = 0, ny = 0;
  int r = 0;
  BcKind bc = BcKind::Dirichlet;
  double hx = 0.0, hy = 0.0;

  /// Element-local 1D node positions on [0,1] (size r+1).
  std::vector<double> local_nodes;

  /// Cell-to-global connectivity, n_cells() * nloc() entries; -1 marks an
  /// eliminated Dirichlet boundary node. Local index = a + (r+1)*b.
  std::vector<std::int64_t> conn;

  /// Physical coordinates of every global DOF.
  std::vector<std::array<double, 2>> dof_coords;

  int n_dofs = 0;

  int n_cells() const { return nx * ny; }
  int nloc() const { return (r + 1) * (r + 1); }
  std::int64_t dof(int cell, int local) const {
    return conn[static_cast<std::size_t>(cell) * nloc() + local];
  }
};

/// Build the mesh. Requires nx, ny >= 1 and r >= 1; periodic grids
/// additionally need nx, ny >= 2 so opposite edges are distinct.
Grid build_grid(const Domain& domain, int nx, int ny, int r, BcKind bc);

/// Physical location of the Lagrange node owning a global DOF.
std::array<double, 2> dof_coordinates(const Grid& grid, int dof);

/// Closed-form global DOF count for the given mesh parameters.
int expected_dof_count(int nx, int ny, int r, BcKind bc);

} // namespace sprelax

#endif
