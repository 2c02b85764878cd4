#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mirrorkit {

// Malformed libsvm or config input. line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A kernel evaluated outside its domain (improper kernel with nu * base >= 1).
class KernelDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid trainer / experiment / kernel / loss configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Training aborted mid-run; carries the 1-based iteration.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::uint64_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::uint64_t iteration() const noexcept { return iteration_; }

 private:
  std::uint64_t iteration_;
};

}  // namespace mirrorkit
