#include "hitchin/bessel.hpp"

#include <cmath>
#include <numbers>

#include "hitchin/error.hpp"

namespace hitchin {

double bessel_i0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (double(k) * double(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

namespace {
// sum_k ((2k-1)!!)^2 / (k! (8x)^k)
double asymptotic_sum(double x, int terms) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; terms < 0 || k <= terms; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (double(k) * 8.0 * x);
    if (terms < 0 && (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-17 * sum)) break;
    term = next;
    sum += term;
    if (k > 1000) break;
  }
  return sum;
}
}  // namespace

double bessel_i0_asymptotic(double x, int terms) {
  if (!(x > 0.0)) throw DomainError("asymptotic I0 needs x > 0");
  return std::exp(x) / std::sqrt(2.0 * std::numbers::pi * x) * asymptotic_sum(x, terms);
}

double bessel_i0(double x) {
  x = std::abs(x);
  return x <= 30.0 ? bessel_i0_series(x) : bessel_i0_asymptotic(x);
}

double bessel_i0_scaled(double x) {
  x = std::abs(x);
  if (x <= 30.0) return std::exp(-x) * bessel_i0_series(x);
  return asymptotic_sum(x, -1) / std::sqrt(2.0 * std::numbers::pi * x);
}

double bessel_barrier(double C, double a, double r, double rho) {
  if (!(a > 0.0) || !(r > 0.0)) throw DomainError("Bessel barrier needs a > 0 and r > 0");
  if (rho < 0.0 || rho > r) throw DomainError("Bessel barrier: rho outside [0, r]");
  const double k = 2.0 * std::sqrt(2.0 * a);
  const double xr = k * r, xp = k * rho;
  return C * std::exp(xp - xr) * bessel_i0_scaled(xp) / bessel_i0_scaled(xr);
}

}  // namespace hitchin
