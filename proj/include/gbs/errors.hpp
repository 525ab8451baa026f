#ifndef GBS_ERRORS_HPP
#define GBS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gbs {

// Malformed input: bad schema, broken graph invariants, inconsistent map data.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A contract violated by the caller (non-loop word, mismatched graphs, ...).
struct precondition_error : std::runtime_error {
  explicit precondition_error(const std::string& msg)
      : std::runtime_error(msg) {}
};

// A configurable safety bound was exceeded (max_L, max_rounds).
struct bound_exhausted : std::runtime_error {
  explicit bound_exhausted(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal consistency failure; indicates a bug, not bad input.
struct internal_error : std::logic_error {
  explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace gbs

#endif  // GBS_ERRORS_HPP
