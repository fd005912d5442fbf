#pragma once

#include <stdexcept>
#include <string>

namespace mrgp {

// Exit-code taxonomy used by the CLI: usage (1), data (2), numerics (3).
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mrgp
