#ifndef SPRELAX_VERIFICATION_HPP
#define SPRELAX_VERIFICATION_HPP

#include "sprelax/assembly.hpp"
#include "sprelax/stepper.hpp"

#include <functional>
#include <vector>

namespace sprelax {

/// A manufactured solution pair with the forcing that makes it solve the
/// coupled system exactly. Fields vanish on the boundary of (-1,1)^2.
struct MmsCase {
  PhysParams params;
  double t_end = 1.0;
  Domain domain{-1.0, 1.0, -1.0, 1.0};
  std::function<cplx(double, double, double)> u;
  std::function<double(double, double, double)> v;
  SourceTerms sources;
};

/// The reference case: v = exp(-t) sin(pi (x^2-1)(y^2-1)), u = (1+i) v,
/// alpha = beta = epsilon = 1, T = 1, with analytically written forcing.
MmsCase make_mms_case();

/// L2 norm of (exact(., t) - field) by quadrature, exact evaluated pointwise
/// at the quadrature nodes.
double l2_error(const Workspace& ws, const ComplexField& field,
                const std::function<cplx(double, double, double)>& exact, double t);
double l2_error(const Workspace& ws, const RealField& field,
                const std::function<double(double, double, double)>& exact, double t);

/// One row of a convergence study; `rate` entries are meaningful only when
/// `has_rate` is set (they need a distinct previous resolution).
struct EocRow {
  double resolution = 0.0; // h for spatial studies, k for temporal ones
  double err_u = 0.0;
  double rate_u = 0.0;
  double err_v = 0.0;
  double rate_v = 0.0;
  bool has_rate = false;
};

/// Max-over-time L2 errors of u and v for one full run of the scheme.
struct RunErrors {
  double err_u = 0.0;
  double err_v = 0.0;
};

/// Run the manufactured case once and track max_n ||exact - approx|| for the
/// wavefunction and the nodal potential, sampled at every time node.
RunErrors run_mms(const MmsCase& mms, int nx, int r, int n_steps, const SolverOptions& opts,
                  BootstrapKind bootstrap = BootstrapKind::TwoStage);

/// Spatial study: fixed (large) step count, mesh level sweep.
std::vector<EocRow> run_spatial_eoc(const MmsCase& mms, const std::vector<int>& nx_levels, int r,
                                    int n_steps, const SolverOptions& opts);

/// Temporal study: fixed fine mesh of degree r, step-size sweep.
std::vector<EocRow> run_temporal_eoc(const MmsCase& mms, const std::vector<double>& k_list,
                                     int nx, int r, const SolverOptions& opts,
                                     BootstrapKind bootstrap = BootstrapKind::TwoStage);

/// Independent single-step reference: repeats one full scheme step with
/// dense matrices assembled straight from the basis tables and dense LU
/// solves (no code shared with the sparse path beyond basis evaluation).
/// Dirichlet grids with at most a few hundred unknowns.
SchemeState dense_oracle_step(const Grid& grid, const PhysParams& params, const TimeGrid& tgrid,
                              const SchemeState& prev, const SourceTerms& sources = {});

} // namespace sprelax

#endif
