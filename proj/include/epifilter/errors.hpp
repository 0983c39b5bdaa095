#pragma once

#include <stdexcept>
#include <string>

namespace epifilter {

// Bad user input: malformed files, out-of-support configuration, invalid
// CLI combinations.  The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Total likelihood underflow during a filter step.  Maps to exit code 2.
class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(const std::string& what, long day_index)
      : std::runtime_error(what), day_index(day_index) {}
  long day_index;
};

}  // namespace epifilter
