#ifndef HOBZ_ERRORS_HPP
#define HOBZ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hobz {

// Bad user input: malformed files, out-of-range responses, invalid config.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-finite intermediate, rank deficiency, failed solve.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / serialization failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hobz

#endif
