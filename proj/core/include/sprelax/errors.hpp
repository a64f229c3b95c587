#ifndef SPRELAX_ERRORS_HPP
#define SPRELAX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sprelax {

/// Invalid problem setup (mesh parameters, mismatched grids, bad config values).
class ConfigurationError : public std::invalid_argument {
public:
  explicit ConfigurationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A linear solve failed to converge or a field became non-finite. The
/// message carries the stage tag (e.g. "poisson", "wavefunction") so a
/// failing run can be attributed to the offending solve.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sprelax

#endif
