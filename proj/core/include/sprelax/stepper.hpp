#ifndef SPRELAX_STEPPER_HPP
#define SPRELAX_STEPPER_HPP

#include "sprelax/assembly.hpp"
#include "sprelax/grid.hpp"
#include "sprelax/sparse.hpp"

#include <functional>
#include <vector>

namespace sprelax {

/// PDE coefficients: i eps/(2 alpha^2) on the Laplacian, i/eps on the
/// potential term, beta/alpha in the Poisson equation. `epsilon` is the
/// semiclassical parameter (Planck constant over particle mass).
struct PhysParams {
  double alpha = 1.0;
  double beta = 0.0;
  double epsilon = 1.0;
};

/// Time nodes t_0 < ... < t_N. By convention k_0 = k_1 (the bootstrap's
/// fictitious step before t_0 reuses the first interval length).
struct TimeGrid {
  std::vector<double> nodes;

  static TimeGrid uniform(double t_start, double t_end, int n_steps);

  int n_steps() const { return static_cast<int>(nodes.size()) - 1; }
  double k(int n) const { return n == 0 ? nodes[1] - nodes[0] : nodes[n] - nodes[n - 1]; }
  double midpoint(int n) const { return 0.5 * (nodes[n - 1] + nodes[n]); }
  void validate() const;
};

/// Optional manufactured-solution forcing, evaluated as (x, y, t).
/// f_u enters the wavefunction half-point solve at t_{n-1/2}; f_v enters
/// the Poisson right-hand side at t_{n-1/2} (and at t_0 for the initial
/// potential).
struct SourceTerms {
  std::function<cplx(double, double, double)> f_u;
  std::function<double(double, double, double)> f_v;
  bool any() const { return static_cast<bool>(f_u) || static_cast<bool>(f_v); }
};

struct SolverOptions {
  double mass_tol = 1e-13;
  double poisson_tol = 1e-12;
  double wave_tol = 1e-12;
  int max_iter = 200000;
};

/// TwoStage is the order-two bootstrap for the first relaxation value;
/// FirstOrder keeps the plain extrapolated value, which degrades the
/// potential to first order in time (kept for regression tests).
enum class BootstrapKind { TwoStage, FirstOrder };

/// Rolling state of the integrator at step n. Suffix `half` marks interval
/// midpoint quantities (index n-1/2), `prev` the values one interval back.
/// After initialize() (n = 0) `Phi_half` already holds the bootstrapped
/// value for the first interval and `V_node` the initial potential.
struct SchemeState {
  int n = 0;
  double t = 0.0;
  ComplexField U;         // wavefunction at t_n
  ComplexField U_prev;    // wavefunction at t_{n-1}
  ComplexField U_half;    // computed midpoint value; U = 2 U_half - U_prev
  RealField Phi_half;     // relaxation variable Phi^{n-1/2}
  RealField Phi_half_prev;
  RealField V_half;       // potential midpoint value V^{n-1/2}
  RealField V_half_prev;
  RealField V_node;       // extended nodal potential V^n
  RealField V_node_prev;
};

/// Crank-Nicolson relaxation integrator on a fixed mesh.
///
/// One step performs, in order: the relaxation update for Phi^{n-1/2}, the
/// Poisson solve for V^{n-1/2}, the wavefunction half-point solve
/// (M + i[(eps k/4a^2) L + (k/2eps) P]) U^{n-1/2} = M U^{n-1} (+ forcing),
/// recovery U^n = 2 U^{n-1/2} - U^{n-1}, and the linear nodal extension of
/// the potential. The half-point system is solved in increment form
/// (M + iS) d = rhs - (M + iS) U^{n-1}, which keeps the roundoff floor of
/// the conserved mass at the discrete-lemma level over thousands of steps.
///
/// The cosmology variant integrates the scale-factor-time system
/// u_tau - (i eps / 2 tau^{3/2}) Lap u + (i tau^{1/2}/eps) v u = 0,
/// Lap v = (beta/tau)(|u|^2 - 1), with all coefficients frozen at the
/// interval midpoint tau_{n-1/2} and the background-subtracted Poisson
/// problem solved with the mean-zero constraint.
class RelaxationStepper {
public:
  RelaxationStepper(const Grid& grid, const PhysParams& params, const TimeGrid& tgrid,
                    const SolverOptions& opts = {}, SourceTerms sources = {},
                    BootstrapKind bootstrap = BootstrapKind::TwoStage);

  /// Cosmology-mode factory (periodic grid required). `beta` and `epsilon`
  /// are taken from the modified system; alpha plays no role.
  static RelaxationStepper cosmology(const Grid& grid, double beta, double epsilon,
                                     const TimeGrid& tgrid, const SolverOptions& opts = {});

  /// Project the initial datum, run the two-stage bootstrap for Phi^{1/2}
  /// and solve for the initial potential V^0.
  SchemeState initialize(const std::function<cplx(double, double)>& u0);

  /// Advance the state from step n-1 to n (standard mode).
  void step(SchemeState& state);

  /// Advance the state from step n-1 to n (cosmology mode).
  void step_cosmology(SchemeState& state);

  /// Linear interpolant through the extremal nodal values,
  /// V_h(t) = ((t_n - t)/k_n) V^{n-1} + ((t - t_{n-1})/k_n) V^n, t in the
  /// closure of the current interval. Note V_h(t_{n-1/2}) != V^{n-1/2} in
  /// general.
  RealField potential_at(const SchemeState& state, double t) const;

  const Grid& grid() const { return *grid_; }
  const Workspace& workspace() const { return ws_; }
  const SparseMatrix& mass_matrix() const { return M_; }
  const SparseMatrix& laplace_matrix() const { return L_; }
  const TimeGrid& time_grid() const { return tgrid_; }
  const PhysParams& params() const { return params_; }
  const SolverOptions& options() const { return opts_; }
  bool is_cosmology() const { return cosmology_mode_; }

private:
  struct StageCoefs {
    double lap_factor;        // coefficient of L inside S
    double pot_factor;        // coefficient of P inside S
    double poisson_coef;      // coefficient of the Poisson right-hand side
    bool subtract_background; // cosmology: source is Phi - 1
  };

  StageCoefs coefs_for_interval(int n) const;
  StageCoefs coefs_initial() const;

  void solve_poisson(const std::vector<double>& phi_coeffs, const StageCoefs& c,
                     double t_source, std::vector<double>& v, const char* stage);
  // Solves the half-point system for the increment d = U^{n-1/2} - U^{n-1}.
  void solve_wave_increment(const std::vector<cplx>& u, const RealField& v_half,
                            const StageCoefs& c, double k_n, double t_mid,
                            std::vector<cplx>& delta, const char* stage);
  void step_impl(SchemeState& state, const StageCoefs& c);
  void check_finite(const SchemeState& state, const char* stage) const;

  const Grid* grid_;
  Workspace ws_;
  PhysParams params_;
  TimeGrid tgrid_;
  SolverOptions opts_;
  SourceTerms sources_;
  BootstrapKind bootstrap_;
  bool cosmology_mode_ = false;

  SparseMatrix M_;
  SparseMatrix L_;
  std::vector<double> background_load_; // M * 1, cosmology background source

  // Warm starts for the per-step solves.
  std::vector<double> warm_density_;
  std::vector<double> warm_v_;
  std::vector<cplx> warm_delta_;
};

} // namespace sprelax

#endif
