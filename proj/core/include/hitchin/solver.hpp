#pragma once

#include <Eigen/SparseCore>
#include <optional>
#include <utility>
#include <vector>

#include "hitchin/background.hpp"
#include "hitchin/quartic.hpp"

namespace hitchin {

struct SolverOptions {
  double tolerance = 1e-10;
  int max_iterations = 60;
  /// Line search halves the step until the residual drops; never below this fraction.
  double min_step = 1e-4;
  /// Project every iterate into the [sub, super] box.
  bool clip_to_bracket = false;
  /// Throw BracketViolation when the converged pair leaves the box by more than
  /// bracket_tolerance (only when clipping is off and q is holomorphic).
  bool check_bracket = true;
  double bracket_tolerance = 1e-6;
  /// Starting iterate (interior values); defaults to the flat sub-solution.
  std::optional<std::pair<ScalarField, ScalarField>> initial;
  /// Dirichlet data on the disk boundary ring; defaults to the pointwise root of the
  /// system with the Laplacian dropped (the exact constants when q == 0).
  std::optional<std::pair<ScalarField, ScalarField>> boundary;
};

struct BracketCertificate {
  double sub_margin = 0.0;    ///< min over equation nodes of psi_i - sub_i
  double super_margin = 0.0;  ///< min over equation nodes of super_i - psi_i
};

struct SolutionPair {
  ScalarField psi1;
  ScalarField psi2;
  double residual_inf = 0.0;
  int iterations = 0;
  BracketCertificate bracket;
  std::vector<double> history;  ///< residual max-norm before each Newton step and at exit

  /// h1^{-1} = e^{psi1} sigma^{3/2}
  ScalarField h1_inv(const ConformalBackground& bg) const;
  /// h2^{-1} = e^{psi2} sigma^{1/2}
  ScalarField h2_inv(const ConformalBackground& bg) const;
};

struct SuperSolution {
  double c1 = 0.0;
  double c2 = 0.0;
  SolutionPair pair;  ///< constant fields (NaN outside a disk)
};

/// Pointwise max of the flat branch ((3/2)log||q||^{1/2}, (1/2)log||q||^{1/2}) and the
/// constant branch ((3/2)log(-3k/4), (1/2)log(-3k/4)) with k = max kappa (the least negative
/// value, which keeps the branch a sub-solution when the discrete kappa is not exactly
/// constant); flat branch only when kappa == 0.
SolutionPair flat_subsolution(const ConformalBackground& bg, const QuarticInput& q);

/// Constants c1 = 3 c2 + log(1 + k*/4), k* = min kappa, c2 the smallest value (found by
/// bisection) making both pointwise inequality residuals non-negative.
SuperSolution constant_supersolution(const ConformalBackground& bg, const QuarticInput& q);

/// R1 = D psi1 - e^{psi1-psi2} + e^{-2psi1}||q||^2 - (3/4)k,
/// R2 = D psi2 - e^{2psi2} + e^{psi1-psi2} - (1/4)k. NaN off equation nodes.
std::pair<ScalarField, ScalarField> residual(const ConformalBackground& bg, const QuarticInput& q,
                                             const ScalarField& psi1, const ScalarField& psi2);

/// (psi1, psi2) solving both equations with the Laplacian dropped, for curvature kappa <= 0
/// and ||q||^2 = qn.
std::pair<double, double> hitchin_pointwise_root(double kappa, double qn);

SolutionPair solve_hitchin(const ConformalBackground& bg, const QuarticInput& q,
                           const SolverOptions& opts = {});

/// Equation nodes in increasing node order; unknown 2*s + i is field i at equation node s.
std::vector<std::size_t> equation_nodes(const Lattice& lattice);

/// Jacobian of (R1, R2) with respect to the interior unknowns, ordered as in equation_nodes.
Eigen::SparseMatrix<double> hitchin_jacobian(const ConformalBackground& bg, const QuarticInput& q,
                                             const ScalarField& psi1, const ScalarField& psi2);

}  // namespace hitchin
