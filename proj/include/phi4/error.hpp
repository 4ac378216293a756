#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace phi4 {

/// Invalid grid, model or experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse: arguments outside an operation's documented domain.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/overflow in a numerical routine.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corrupt or mismatched checkpoint / data file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structural invariant that should hold by construction was observed broken.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A trajectory produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::uint64_t step, std::string last_checkpoint)
      : std::runtime_error("trajectory diverged at step " + std::to_string(step) +
                           (last_checkpoint.empty() ? std::string()
                                                    : " (last checkpoint: " + last_checkpoint + ")")),
        step_(step),
        last_checkpoint_(std::move(last_checkpoint)) {}

  std::uint64_t step() const noexcept { return step_; }
  const std::string& last_checkpoint() const noexcept { return last_checkpoint_; }

 private:
  std::uint64_t step_;
  std::string last_checkpoint_;
};

}  // namespace phi4
