#ifndef SPRELAX_QUADRATURE_HPP
#define SPRELAX_QUADRATURE_HPP

#include <vector>

namespace sprelax {

/// One-dimensional Gauss-Legendre rule on the reference interval [0,1].
/// Exact for polynomials up to degree 2*n - 1.
struct Quadrature1D {
  std::vector<double> points;
  std::vector<double> weights;
  int order() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule on [0,1]. Nodes are computed by Newton
/// iteration on the Legendre recurrence and are symmetric about 1/2.
Quadrature1D gauss_legendre(int n);

/// The r+1 Gauss-Lobatto points on [0,1] in increasing order, endpoints
/// exactly 0 and 1. These are the element-local Lagrange node positions.
std::vector<double> gauss_lobatto_nodes(int r);

/// Per-axis quadrature order used for all assembly on degree-r elements:
/// max(r+2, ceil((3r+2)/2)). Integrands of the potential matrix and the
/// |U|^2 load reach degree 3r per axis; this rule covers them exactly.
int default_quadrature_order(int r);

/// Values and first derivatives of the Lagrange basis through `nodes`,
/// tabulated at `points`. Layout: val[i * n_pts + q] for basis i at point q.
struct LagrangeTable {
  int n_nodes = 0;
  int n_pts = 0;
  std::vector<double> val;
  std::vector<double> der;
  double value(int i, int q) const { return val[static_cast<std::size_t>(i) * n_pts + q]; }
  double deriv(int i, int q) const { return der[static_cast<std::size_t>(i) * n_pts + q]; }
};

LagrangeTable tabulate_lagrange(const std::vector<double>& nodes,
                                const std::vector<double>& points);

} // namespace sprelax

#endif
