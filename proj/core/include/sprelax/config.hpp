#ifndef SPRELAX_CONFIG_HPP
#define SPRELAX_CONFIG_HPP

#include "sprelax/cosmology.hpp"
#include "sprelax/grid.hpp"
#include "sprelax/stepper.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sprelax {

enum class ProblemKind { Mms, Conservation, Cosmology, Custom };

/// Fully validated run description. Parsed from the sectioned key-value
/// format documented in the README ([domain], [grid], [time], ...).
struct RunConfig {
  ProblemKind problem = ProblemKind::Custom;

  Domain domain{-1.0, 1.0, -1.0, 1.0};
  int nx = 0, ny = 0;
  int degree = 1;
  BcKind bc = BcKind::Dirichlet;

  double t_start = 0.0;
  double t_end = 0.0;
  int steps = 0;

  PhysParams params;
  SolverOptions solver;

  std::string output_dir = "out";
  std::vector<double> snapshot_times; // empty -> {t_start, t_end}
  bool log_invariants = true;
  bool lemma_residuals = false;

  std::string ic_kind; // defaulted per problem when absent
  double ic_amplitude = 0.1;
  double ic_phase_amplitude = 0.0;
  bool normalize_mass = false;

  double filter_sigma = 0.0;
  std::vector<double> frame_taus;

  std::vector<int> eoc_nx;
  std::vector<double> eoc_k;
  int eoc_steps = 2000;
  int eoc_nx_time = 32;
  int eoc_degree_time = 5;

  Grid make_grid() const { return build_grid(domain, nx, ny, degree, bc); }
  TimeGrid make_time_grid() const { return TimeGrid::uniform(t_start, t_end, steps); }
  CosmoParams make_cosmo_params() const;
};

/// Outcome of parsing: either a config or the full list of validation
/// problems (never both, never neither).
struct ParseOutcome {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return config.has_value(); }
};

/// Parse the sectioned key-value text. Strict: unknown sections or keys are
/// rejected, missing required keys are all listed, values are type-checked.
ParseOutcome parse_config(const std::string& text);

/// Convenience: read a file and parse it.
ParseOutcome parse_config_file(const std::string& path);

/// The initial condition selected by the config, as a pointwise function
/// (normalization applied if requested, using quadrature on `grid`).
std::function<cplx(double, double)> make_initial_condition(const RunConfig& cfg,
                                                           const Grid& grid);

} // namespace sprelax

#endif
