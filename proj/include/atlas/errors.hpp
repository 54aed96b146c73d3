#pragma once

#include <stdexcept>
#include <string>

namespace atlas {

// CLI exit codes. Library code throws; tools/atlas.cpp maps to these.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitDataError = 3,
  kExitDivergence = 4,
};

// Invalid configuration: bad values, unknown keys, incompatible settings.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, sessions, splits).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A non-finite value appeared where the numeric engine requires finiteness.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss; carries where it happened.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace atlas
