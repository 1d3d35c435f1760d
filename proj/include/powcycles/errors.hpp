#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace powcycles {

// A value escaped the supported 64-bit range (e.g. e^k - 1 or p^k - 1).
class WidthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configurable effort cap was exhausted. Recoverable: callers may skip the
// instance, lower the input, or retry with a larger budget. When thrown by
// factorization it carries the factors found so far plus the unfactored
// cofactor, so partial progress is not lost.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
  BudgetError(const std::string& msg,
              std::vector<std::pair<std::uint64_t, std::uint32_t>> partial,
              std::uint64_t remaining)
      : std::runtime_error(msg),
        partial_factors(std::move(partial)),
        remaining_cofactor(remaining) {}

  std::vector<std::pair<std::uint64_t, std::uint32_t>> partial_factors;
  std::uint64_t remaining_cofactor = 0;
};

// A shifted-prime construction produced fewer primes than the product size
// nu requires. Carries both numbers so the caller can lower u or raise kappa.
class ThinConstructionError : public std::runtime_error {
 public:
  ThinConstructionError(std::uint64_t q_size_, std::uint64_t nu_)
      : std::runtime_error("construction too thin: |Q| = " +
                           std::to_string(q_size_) + " < nu = " +
                           std::to_string(nu_) + " (lower u or raise kappa)"),
        q_size(q_size_),
        nu(nu_) {}

  std::uint64_t q_size;
  std::uint64_t nu;
};

// A broken internal invariant. Always a bug; the CLI maps it to exit code 3.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace powcycles
