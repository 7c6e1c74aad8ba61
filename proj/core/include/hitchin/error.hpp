#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hitchin {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad resolution, non-positive factor, shape mismatch, bad config.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Newton iteration did not reach the requested residual.
class NonConvergence : public Error {
 public:
  NonConvergence(int iterations, double last_residual)
      : Error("Newton iteration did not converge after " + std::to_string(iterations) +
              " iterations (last residual " + std::to_string(last_residual) + ")"),
        iterations_(iterations),
        last_residual_(last_residual) {}

  int iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  int iterations_;
  double last_residual_;
};

/// An iterate left the [sub, super] box while clipping was disabled.
class BracketViolation : public Error {
 public:
  BracketViolation(std::size_t node, double margin)
      : Error("solution left the sub/super bracket at node " + std::to_string(node) +
              " (margin " + std::to_string(margin) + ")"),
        node_(node),
        margin_(margin) {}

  std::size_t node() const noexcept { return node_; }
  double margin() const noexcept { return margin_; }

 private:
  std::size_t node_;
  double margin_;
};

/// Invalid polygon complex or curve description.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// An enumeration (saddle connections, closed geodesics, corridor moves) hit its budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace hitchin
