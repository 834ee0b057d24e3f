#pragma once

#include <stdexcept>

namespace ndopfe {

/// Configuration or input-file errors; the CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integration failures (non-finite state, broken invariants); exit code 4.
class SolverError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ndopfe
