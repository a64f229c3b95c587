#ifndef SPRELAX_INVARIANTS_HPP
#define SPRELAX_INVARIANTS_HPP

#include "sprelax/assembly.hpp"
#include "sprelax/stepper.hpp"

#include <array>
#include <vector>

namespace sprelax {

/// Per-step audit row: mass D = ||U||^2, the stabilized discrete energy
/// E = c_kin ||grad U||^2 + c_field ||grad V||^2 + 2 int V |U|^2, momentum
/// components, their drifts against the step-0 baseline, and the residuals
/// of the per-step energy/momentum identities.
struct InvariantRecord {
  int n = 0;
  double t = 0.0;
  double D = 0.0;
  double E = 0.0;
  double Mx = 0.0, My = 0.0;
  double D_err = 0.0, E_err = 0.0, M_err = 0.0;
  double lemma2_res = 0.0, lemma3_res = 0.0;
};

/// Coefficients of the discrete energy functional. For the standard system
/// these are {eps^2/alpha^2, alpha/beta}; the cosmology analogue freezes the
/// time-dependent coefficients, {eps^2/tau^2, tau/beta}.
struct EnergyCoefs {
  double kinetic = 0.0;
  double field = 0.0;
};

EnergyCoefs standard_energy_coefs(const PhysParams& p); // requires beta != 0
EnergyCoefs cosmology_energy_coefs(double beta, double epsilon, double tau);

/// ||U||^2 via the mass-matrix quadratic form.
double mass(const ComplexField& U, const SparseMatrix& M);

/// Discrete energy; P_of_V must be the weighted mass matrix of V.
double energy(const ComplexField& U, const RealField& V, const EnergyCoefs& coefs,
              const SparseMatrix& L, const SparseMatrix& P_of_V);
double energy(const ComplexField& U, const RealField& V, const PhysParams& params,
              const SparseMatrix& L, const SparseMatrix& P_of_V);

/// Momentum -Im(eps int U grad(conj U)), both components, by quadrature.
std::array<double, 2> momentum(const Workspace& ws, const ComplexField& U, double epsilon);

/// Drifts |D_n - D_0|, |E_n - E_0| and the euclidean norm of the momentum
/// difference.
std::array<double, 3> conservation_errors(const InvariantRecord& now,
                                          const InvariantRecord& initial);

/// Residual of the per-step energy identity
///   E^n = E^{n-1} + c_field (||grad V^n||^2 - ||grad V^{n-1}||^2)
///       + 2 int (V^n - V^{n-1/2})|U^n|^2 - 2 int (V^{n-1} - V^{n-1/2})|U^{n-1}|^2.
/// With beta = 0 the potential terms vanish and the residual reduces to the
/// kinetic identity of the free Crank-Nicolson step.
double lemma2_residual(const Workspace& ws, const SchemeState& s, const EnergyCoefs& coefs,
                       const SparseMatrix& M, const SparseMatrix& L);

/// Euclidean norm of the momentum identity residual
///   M^n - M^{n-1} + k_n [ int |U^{n-1/2}|^2 grad V^{n-1/2}
///                        + (eps^2/alpha^2) Re int grad U^{n-1/2} lap_h conj(U^{n-1/2})
///                        - 2 Re int (P_h - I)(V^{n-1/2} U^{n-1/2}) grad conj(U^{n-1/2}) ].
double lemma3_residual(const Workspace& ws, const SchemeState& s, const PhysParams& params,
                       const SparseMatrix& M, const SparseMatrix& L, double k_n,
                       double proj_tol = 1e-13);

struct AuditorOptions {
  bool lemma_residuals = false;
  double proj_tol = 1e-13;
};

/// Streams InvariantRecord rows for a run; the first record (step 0) fixes
/// the baseline, so all drifts are measured against the computed discrete
/// initial data. In cosmology mode the energy uses the tau-frozen analogue
/// coefficients and the lemma residuals are not evaluated (the identities
/// target the fixed-coefficient system).
class InvariantAuditor {
public:
  InvariantAuditor(const RelaxationStepper& stepper, AuditorOptions opts = {});

  InvariantRecord record(const SchemeState& s);
  const std::vector<InvariantRecord>& history() const { return history_; }

private:
  const RelaxationStepper* stepper_;
  AuditorOptions opts_;
  bool have_baseline_ = false;
  InvariantRecord baseline_;
  std::vector<InvariantRecord> history_;
};

} // namespace sprelax

#endif
