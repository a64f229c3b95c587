#include "sprelax/quadrature.hpp"

#include "sprelax/errors.hpp"

#include <cmath>
#include <cstddef>

namespace sprelax {

namespace {

// Legendre P_n(x) and P_n'(x) on [-1,1] via the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = p0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

} // namespace

Quadrature1D gauss_legendre(int n) {
  if (n < 1) throw ConfigurationError("gauss_legendre: order must be >= 1");
  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev guess, then Newton on P_n.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, z, p, dp);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    legendre(n, z, p, dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    w[n - 1 - i] = w[i];
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  Quadrature1D q;
  q.points.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    q.points[i] = 0.5 * (x[i] + 1.0);
    q.weights[i] = 0.5 * w[i];
  }
  return q;
}

std::vector<double> gauss_lobatto_nodes(int r) {
  if (r < 1) throw ConfigurationError("gauss_lobatto_nodes: degree must be >= 1");
  const int n = r + 1;
  std::vector<double> x(n);
  x[0] = -1.0;
  x[r] = 1.0;
  // Interior nodes are the roots of P_r'. Newton with
  // P_r'' = (2x P_r' - r(r+1) P_r) / (1 - x^2), seeded at Chebyshev-Lobatto.
  for (int i = 1; i < r; ++i) {
    double z = -std::cos(M_PI * i / r);
    for (int it = 0; it < 100; ++it) {
      double p, dp;
      legendre(r, z, p, dp);
      const double d2p = (2.0 * z * dp - r * (r + 1.0) * p) / (1.0 - z * z);
      const double dz = dp / d2p;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
  }
  // Symmetrize, then map to [0,1] keeping the endpoints exact.
  for (int i = 0; i < n / 2; ++i) {
    const double s = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -s;
    x[n - 1 - i] = s;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = 0.5 * (x[i] + 1.0);
  t[0] = 0.0;
  t[r] = 1.0;
  return t;
}

int default_quadrature_order(int r) {
  const int a = r + 2;
  const int b = (3 * r + 3) / 2; // ceil((3r+2)/2)
  return a > b ? a : b;
}

LagrangeTable tabulate_lagrange(const std::vector<double>& nodes,
                                const std::vector<double>& points) {
  const int n = static_cast<int>(nodes.size());
  const int m = static_cast<int>(points.size());
  LagrangeTable tab;
  tab.n_nodes = n;
  tab.n_pts = m;
  tab.val.assign(static_cast<std::size_t>(n) * m, 0.0);
  tab.der.assign(static_cast<std::size_t>(n) * m, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int q = 0; q < m; ++q) {
      const double p = points[q];
      double v = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        v *= (p - nodes[j]) / (nodes[i] - nodes[j]);
      }
      // d/dp of the product form, written as a sum over the omitted factor;
      // stable at points arbitrarily close to the nodes.
      double d = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        double term = 1.0 / (nodes[i] - nodes[k]);
        for (int j = 0; j < n; ++j) {
          if (j == i || j == k) continue;
          term *= (p - nodes[j]) / (nodes[i] - nodes[j]);
        }
        d += term;
      }
      tab.val[static_cast<std::size_t>(i) * m + q] = v;
      tab.der[static_cast<std::size_t>(i) * m + q] = d;
    }
  }
  return tab;
}

} // namespace sprelax
