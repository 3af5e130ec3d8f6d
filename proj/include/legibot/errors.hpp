#ifndef LEGIBOT_ERRORS_HPP
#define LEGIBOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace legibot {

/// Input data failed parsing or invariant checks (bad scenario file, bad CSV
/// row, unbalanced design). Maps to CLI exit code 3.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation could not complete at runtime (unreachable goal, I/O failure,
/// tick-limit overrun). Maps to CLI exit code 4.
class RuntimeError : public std::runtime_error {
public:
  explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace legibot

#endif  // LEGIBOT_ERRORS_HPP
