#pragma once

#include <stdexcept>
#include <string>

namespace rpsm {

/// theta = beta = 0 leaves the dark port perfectly dark; the postselected
/// quantities become 0/0 and no finite summary exists.
struct DegenerateDarkPort : std::runtime_error {
  explicit DegenerateDarkPort(const std::string& what) : std::runtime_error(what) {}
};

/// Mixed-state observable requested but no photon was ever postselected.
struct EmptyEnsemble : std::runtime_error {
  explicit EmptyEnsemble(const std::string& what) : std::runtime_error(what) {}
};

/// Residual never dropped below the requested tolerance within the round cap.
struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter or config value is outside its documented domain.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Config text could not be parsed; message carries the line number.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rpsm
