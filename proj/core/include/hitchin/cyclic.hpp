#pragma once

#include <vector>

#include "hitchin/background.hpp"
#include "hitchin/quartic.hpp"
#include "hitchin/solver.hpp"

namespace hitchin {

/// Rank-2m cyclic system in log form, psi_k = log h_k^{-1} - (weight) log sigma:
///   D psi_1 = (w_1/2) k + a_1 e^{psi_1 - psi_2} - b e^{-2 psi_1}
///   D psi_k = (w_k/2) k + a_k e^{psi_k - psi_{k+1}} - a_{k-1} e^{psi_{k-1} - psi_k}
///   D psi_m = (w_m/2) k + a_m e^{2 psi_m}          - a_{m-1} e^{psi_{m-1} - psi_m}
/// with w_k = (2m - 2k + 1)/2, a_k = |gamma_k|^2 and b = |gamma_n|^2 / sigma^{2m}.
/// For m = 2, gamma_1 = gamma_2 = 1, gamma_n = q this is the rank-4 pair system.
struct CyclicSolution {
  std::vector<ScalarField> psi;
  double residual_inf = 0.0;
  int iterations = 0;
};

/// Constant pointwise root of the algebraic system (Laplacian dropped) for the given
/// coefficients: psi[0..m-1]. Requires kappa <= 0, a_k > 0, and b > 0 when kappa == 0.
std::vector<double> cyclic_pointwise_root(double kappa, const std::vector<double>& a, double b);

/// gammas = gamma_1..gamma_m, gamma_n the top differential. Disk boundary data and the first
/// iterate default to the pointwise root at each node.
CyclicSolution solve_cyclic(const ConformalBackground& bg, const std::vector<QuarticInput>& gammas,
                            const QuarticInput& gamma_n, const SolverOptions& opts = {});

/// Residual fields of the cyclic system (NaN off equation nodes).
std::vector<ScalarField> cyclic_residual(const ConformalBackground& bg, const std::vector<QuarticInput>& gammas,
                                         const QuarticInput& gamma_n, const std::vector<ScalarField>& psi);

}  // namespace hitchin
