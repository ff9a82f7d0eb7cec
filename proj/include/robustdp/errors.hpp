#ifndef ROBUSTDP_ERRORS_HPP
#define ROBUSTDP_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace robustdp {

// Malformed input: bad tree, kernel, model parameters or config document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridConditionViolation : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// The robust problem has value -inf (zero strategy already infeasible).
class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive enumeration refused because the instance is too large.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::uint64_t count, std::uint64_t limit, bool saturated)
      : std::runtime_error(what), count_(count), limit_(limit), saturated_(saturated) {}

  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t limit() const noexcept { return limit_; }
  // true when count() is a lower bound (the exact count overflowed 64 bits)
  bool saturated() const noexcept { return saturated_; }

 private:
  std::uint64_t count_;
  std::uint64_t limit_;
  bool saturated_;
};

// Two independent computations of the same quantity disagree.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// No closed form registered for this integrand.
class NotAvailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace robustdp

#endif
