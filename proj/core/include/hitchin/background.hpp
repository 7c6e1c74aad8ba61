#pragma once

#include <memory>

#include "hitchin/lattice.hpp"

namespace hitchin {

/// Lattice plus conformal factor sigma (2*sigma is the background metric) and its
/// curvature kappa(sigma). Disk backgrounds store on the boundary ring a copy of the
/// nearest interior kappa, so that pointwise formulas can be evaluated there.
class ConformalBackground {
 public:
  /// Builds from an arbitrary positive factor; kappa is computed here.
  ConformalBackground(Lattice lattice, ScalarField sigma);
  /// Builds with a known curvature field (used where kappa is available in closed form).
  ConformalBackground(Lattice lattice, ScalarField sigma, ScalarField kappa);

  const Lattice& lattice() const noexcept { return lattice_; }
  DomainKind kind() const noexcept { return lattice_.kind(); }
  const ScalarField& sigma() const noexcept { return sigma_; }
  const ScalarField& kappa() const noexcept { return kappa_; }
  double h() const noexcept { return lattice_.hx(); }

  /// Every active kappa < 0.
  bool hyperbolic() const noexcept { return hyperbolic_; }
  /// Every active kappa == 0.
  bool flat() const noexcept { return flat_; }
  double kappa_min() const noexcept { return kappa_min_; }
  double kappa_max() const noexcept { return kappa_max_; }

 private:
  void check_sigma();
  void summarize_kappa();

  Lattice lattice_;
  ScalarField sigma_;
  ScalarField kappa_;
  bool hyperbolic_ = false;
  bool flat_ = false;
  double kappa_min_ = 0.0;
  double kappa_max_ = 0.0;
};

ConformalBackground build_torus_background(double lx, double ly, int n, double sigma0);

/// Poincare factor 2/(1-|z|^2)^2 on the disk of radius rfrac; kappa is set to exactly -2.
ConformalBackground build_disk_background(double rfrac, int n);

/// Five-point Euclidean Laplacian at a node whose four neighbours exist.
double laplacian5(const Lattice& lattice, const ScalarField& f, std::size_t k);

/// Delta_sigma f = laplacian5(f) / (4 sigma) at equation nodes, NaN elsewhere.
ScalarField delta_sigma(const ConformalBackground& bg, const ScalarField& f);

/// kappa(rho) = -(2/rho) dbar-d log rho with fourth-order second differences along each axis
/// (off-centre next to the disk rim). Boundary-ring and outside nodes of a disk lattice are
/// NaN (not evaluated).
ScalarField curvature_conformal(const ScalarField& factor, const Lattice& lattice);

/// Riemann sum of factor*hx*hy over the masked nodes.
double area_of(const ScalarField& factor, const Lattice& lattice, const RegionMask& mask);
double area_of(const ScalarField& factor, const Lattice& lattice);

}  // namespace hitchin
