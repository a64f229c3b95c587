#ifndef SPRELAX_COSMOLOGY_HPP
#define SPRELAX_COSMOLOGY_HPP

#include "sprelax/invariants.hpp"
#include "sprelax/stepper.hpp"

#include <functional>
#include <vector>

namespace sprelax {

/// Sine-wave-collapse run configuration. `sigma` is the Gaussian filter
/// width in domain units; `frame_taus` the instants at which density frames
/// are captured (matched to the nearest time node).
struct CosmoParams {
  double tau_i = 0.01;
  double tau_f = 0.088;
  double beta = 1.5;
  double epsilon = 6e-5;
  int steps = 1560;
  double sigma = 0.0035;
  std::vector<double> frame_taus{0.023, 0.033, 0.088};
};

/// Density |U|^2 sampled on the uniform lattice of element vertices.
/// `filtered` is parallel to `density` and empty until a filter is applied.
struct DensityFrame {
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  double tau = 0.0;
  std::vector<double> density;
  std::vector<double> filtered;
};

/// Sample |U|^2 at the element vertices (periodic: nx*ny points; Dirichlet:
/// the interior pattern padded with boundary zeros is not included, callers
/// wanting full lattices should use the snapshot writer).
DensityFrame sample_density(const Grid& grid, const ComplexField& U, double tau);

/// Separable periodic Gaussian convolution, kernel truncated at +-4 sigma
/// and normalized to unit sum, so constants and the lattice mean are
/// preserved exactly. sigma = 0 returns the frame unchanged (identity).
DensityFrame gaussian_filter(const DensityFrame& frame, double sigma);

/// True when the requested width is below half the lattice spacing; the
/// filter then degenerates toward the identity.
bool filter_is_underresolved(const DensityFrame& frame, double sigma);

struct CosmologyResult {
  std::vector<DensityFrame> frames;
  std::vector<InvariantRecord> invariants;
};

/// Advance the scale-factor-time system over [tau_i, tau_f] with uniform
/// steps, auditing invariants every step and collecting density frames at
/// the configured instants (filtered when sigma > 0). The initial condition
/// is pluggable; see the CLI for the shipped perturbation default.
CosmologyResult run_cosmology(const Grid& grid, const CosmoParams& cosmo,
                              const std::function<cplx(double, double)>& u0,
                              const SolverOptions& opts = {});

} // namespace sprelax

#endif
