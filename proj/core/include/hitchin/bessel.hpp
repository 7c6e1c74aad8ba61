#pragma once

namespace hitchin {

/// I_0 by its power series (term recursion t_k = t_{k-1} (x/2)^2 / k^2).
double bessel_i0_series(double x);

/// e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k), truncated after `terms` corrections
/// (terms < 0: stop at the smallest term).
double bessel_i0_asymptotic(double x, int terms = -1);

/// Series below 30, asymptotic above.
double bessel_i0(double x);

/// e^{-x} I_0(x), finite for every x >= 0.
double bessel_i0_scaled(double x);

/// Radial Dirichlet solution of dbar-d eta = 2 a eta on the flat ball of radius r with
/// eta = C on the boundary: C I_0(2 sqrt(2a) rho) / I_0(2 sqrt(2a) r).
double bessel_barrier(double C, double a, double r, double rho);

}  // namespace hitchin
