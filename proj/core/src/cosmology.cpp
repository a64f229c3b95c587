#include "sprelax/cosmology.hpp"

#include "sprelax/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sprelax {

DensityFrame sample_density(const Grid& grid, const ComplexField& U, double tau) {
  if (grid.bc != BcKind::Periodic)
    throw ConfigurationError("sample_density: periodic vertex lattice expected");
  DensityFrame f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  f.dx = grid.hx;
  f.dy = grid.hy;
  f.tau = tau;
  f.density.resize(static_cast<std::size_t>(grid.nx) * grid.ny);
  const int lx = grid.nx * grid.r;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      // Vertices are Lagrange nodes, so the nodal value is the coefficient.
      const std::int64_t d = static_cast<std::int64_t>(iy) * grid.r * lx +
                             static_cast<std::int64_t>(ix) * grid.r;
      f.density[static_cast<std::size_t>(iy) * grid.nx + ix] = std::norm(U.coeffs[d]);
    }
  return f;
}

bool filter_is_underresolved(const DensityFrame& frame, double sigma) {
  return sigma > 0.0 && sigma < 0.5 * std::min(frame.dx, frame.dy);
}

namespace {

std::vector<double> kernel_1d(double sigma, double spacing, int n) {
  const int radius = std::min(n / 2, static_cast<int>(std::ceil(4.0 * sigma / spacing)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    const double x = j * spacing;
    k[j + radius] = std::exp(-0.5 * x * x / (sigma * sigma));
    sum += k[j + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

} // namespace

DensityFrame gaussian_filter(const DensityFrame& frame, double sigma) {
  DensityFrame out = frame;
  if (sigma <= 0.0) {
    out.filtered = frame.density;
    return out;
  }
  const int nx = frame.nx, ny = frame.ny;
  const std::vector<double> kx = kernel_1d(sigma, frame.dx, nx);
  const std::vector<double> ky = kernel_1d(sigma, frame.dy, ny);
  const int rx = static_cast<int>(kx.size()) / 2, ry = static_cast<int>(ky.size()) / 2;

  std::vector<double> tmp(frame.density.size());
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      double acc = 0.0;
      for (int j = -rx; j <= rx; ++j) {
        const int sx = (ix + j % nx + nx) % nx;
        acc += kx[j + rx] * frame.density[static_cast<std::size_t>(iy) * nx + sx];
      }
      tmp[static_cast<std::size_t>(iy) * nx + ix] = acc;
    }
  out.filtered.resize(tmp.size());
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      double acc = 0.0;
      for (int j = -ry; j <= ry; ++j) {
        const int sy = (iy + j % ny + ny) % ny;
        acc += ky[j + ry] * tmp[static_cast<std::size_t>(sy) * nx + ix];
      }
      out.filtered[static_cast<std::size_t>(iy) * nx + ix] = acc;
    }
  return out;
}

CosmologyResult run_cosmology(const Grid& grid, const CosmoParams& cosmo,
                              const std::function<cplx(double, double)>& u0,
                              const SolverOptions& opts) {
  if (!(cosmo.tau_i > 0.0) || !(cosmo.tau_f > cosmo.tau_i))
    throw ConfigurationError("run_cosmology: need 0 < tau_i < tau_f");
  if (cosmo.sigma < 0.0) throw ConfigurationError("run_cosmology: sigma must be >= 0");

  const TimeGrid tg = TimeGrid::uniform(cosmo.tau_i, cosmo.tau_f, cosmo.steps);
  RelaxationStepper stepper =
      RelaxationStepper::cosmology(grid, cosmo.beta, cosmo.epsilon, tg, opts);
  InvariantAuditor auditor(stepper);

  // Map requested frame instants to their nearest time nodes.
  std::vector<int> frame_nodes;
  for (double tau : cosmo.frame_taus) {
    const double k = tg.k(1);
    const int idx = static_cast<int>(std::lround((tau - cosmo.tau_i) / k));
    frame_nodes.push_back(std::clamp(idx, 0, cosmo.steps));
  }
  std::sort(frame_nodes.begin(), frame_nodes.end());
  frame_nodes.erase(std::unique(frame_nodes.begin(), frame_nodes.end()), frame_nodes.end());

  CosmologyResult result;
  auto capture = [&](const SchemeState& s) {
    DensityFrame f = sample_density(grid, s.U, s.t);
    if (cosmo.sigma > 0.0) f = gaussian_filter(f, cosmo.sigma);
    result.frames.push_back(std::move(f));
  };

  SchemeState s = stepper.initialize(u0);
  result.invariants.push_back(auditor.record(s));
  if (!frame_nodes.empty() && frame_nodes.front() == 0) capture(s);
  for (int n = 1; n <= cosmo.steps; ++n) {
    stepper.step_cosmology(s);
    result.invariants.push_back(auditor.record(s));
    if (std::binary_search(frame_nodes.begin(), frame_nodes.end(), n)) capture(s);
  }
  return result;
}

} // namespace sprelax
