#pragma once

// Newton engine shared by the rank-4 and general cyclic systems:
//   Delta_sigma psi_a = rhs_a(psi) at equation nodes, Dirichlet values elsewhere.
// The reaction derivative drhs must be symmetric positive semi-definite, so
// -4 sigma J = -Lap + 4 sigma drhs is SPD and an LDLT factorization applies.

#include <Eigen/SparseCore>
#include <vector>

#include "hitchin/background.hpp"

namespace hitchin::detail {

class ReactionModel {
 public:
  virtual ~ReactionModel() = default;
  virtual int fields() const = 0;
  // rhs[a], drhs[a*m + b] = d rhs_a / d psi_b at node k
  virtual void evaluate(std::size_t k, const double* psi, double* rhs, double* drhs) const = 0;
};

struct NewtonSettings {
  double tolerance = 1e-10;
  int max_iterations = 60;
  double min_step = 1e-4;
};

struct NewtonOutcome {
  std::vector<ScalarField> fields;
  double residual_inf = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

// Box for clipping; empty vectors mean no clipping.
struct Box {
  std::vector<ScalarField> lower;
  std::vector<ScalarField> upper;
  bool empty() const { return lower.empty(); }
};

std::vector<ScalarField> reaction_residual(const ConformalBackground& bg, const ReactionModel& model,
                                           const std::vector<ScalarField>& psi);

Eigen::SparseMatrix<double> reaction_jacobian(const ConformalBackground& bg, const ReactionModel& model,
                                              const std::vector<ScalarField>& psi);

// start holds Dirichlet values at non-equation nodes and the first iterate elsewhere.
NewtonOutcome newton(const ConformalBackground& bg, const ReactionModel& model,
                     std::vector<ScalarField> start, const NewtonSettings& settings, const Box& box);

}  // namespace hitchin::detail
