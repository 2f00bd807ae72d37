#ifndef HSCG_ERRORS_HPP
#define HSCG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hscg {

// Invalid configuration (bad parameters, infeasible schedule, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed data files.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values encountered while iterating.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotImplementedError : std::runtime_error {
  explicit NotImplementedError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace hscg

#endif
