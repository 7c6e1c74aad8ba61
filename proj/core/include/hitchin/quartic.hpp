#pragma once

#include <complex>
#include <span>
#include <vector>

#include "hitchin/background.hpp"

namespace hitchin {

enum class QuarticForm { constant, polynomial, sampled };

/// Holomorphic quartic differential q sampled on a lattice.
///
/// The S^1 phase is held apart from the base data: value(k) = e^{i phase} * base(k), while
/// |q|^2 is computed from the base samples only, so rotated() leaves every downstream
/// quantity bit-identical.
class QuarticInput {
 public:
  static QuarticInput constant(std::complex<double> c, const Lattice& lattice);
  /// coeffs[j] multiplies z^j.
  static QuarticInput polynomial(std::vector<std::complex<double>> coeffs, const Lattice& lattice);
  /// One complex sample per node (values at outside nodes are ignored). The holomorphic
  /// flag is set when the discrete Cauchy-Riemann residual is at most cr_tolerance.
  static QuarticInput sampled(std::vector<std::complex<double>> values, const Lattice& lattice,
                              double cr_tolerance = 1e-2);

  QuarticForm form() const noexcept { return form_; }
  /// Polynomial coefficients (one entry for the constant form, empty when sampled).
  std::span<const std::complex<double>> coefficients() const noexcept { return coeffs_; }
  double phase() const noexcept { return phase_; }
  bool holomorphic() const noexcept { return holomorphic_; }
  /// max |dbar q| / max |d q| over equation nodes (0 for constant/polynomial forms).
  double cauchy_riemann_residual() const noexcept { return cr_residual_; }

  std::complex<double> value(std::size_t k) const;
  /// |q|^2 per node, independent of the phase. NaN outside a disk.
  const ScalarField& modulus_sq() const noexcept { return modulus_sq_; }
  bool identically_zero() const noexcept { return zero_; }
  /// Some active node has q == 0.
  bool vanishes_somewhere() const noexcept { return vanishes_; }

  /// e^{i theta} q.
  QuarticInput rotated(double theta) const;
  /// t q for real t > 0 (the ray t -> t q).
  QuarticInput scaled(double t) const;

  /// Analytic evaluation of the base (phase-free) polynomial; sampled form throws.
  std::complex<double> evaluate(std::complex<double> z) const;
  /// Roots of the polynomial (companion matrix eigenvalues). Empty for a nonzero constant.
  std::vector<std::complex<double>> zeros() const;

  int lattice_nx() const noexcept { return modulus_sq_.nx(); }

 private:
  QuarticInput() = default;
  void finalize(const Lattice& lattice);

  QuarticForm form_ = QuarticForm::constant;
  std::vector<std::complex<double>> coeffs_;
  std::vector<std::complex<double>> base_;
  ScalarField modulus_sq_;
  double phase_ = 0.0;
  bool holomorphic_ = true;
  double cr_residual_ = 0.0;
  bool zero_ = false;
  bool vanishes_ = false;
};

/// ||q||^2_sigma = |q|^2 / sigma^4 per node.
ScalarField qnorm_sq(const ConformalBackground& bg, const QuarticInput& q);

}  // namespace hitchin
