#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "hitchin/background.hpp"
#include "hitchin/quartic.hpp"
#include "hitchin/solver.hpp"

namespace hitchin {

struct InducedMetric {
  ScalarField g;        ///< 4 e^{psi1-psi2} sigma
  ScalarField f1;       ///< e^{-2psi1}||q||^2 / e^{psi1-psi2}
  ScalarField f2;       ///< e^{2psi2} / e^{psi1-psi2}
  ScalarField kappa_g;  ///< (f1 + f2 - 2)/2, i.e. kappa(h)/4 with h = e^{psi1-psi2} sigma
  ScalarField kappa_g_discrete;  ///< curvature_conformal(g); NaN on a disk boundary ring
};

InducedMetric induced_metric(const SolutionPair& pair, const ConformalBackground& bg, const QuarticInput& q);

struct Region {
  std::string name;
  RegionMask mask;
  double chi = 0.0;  ///< Euler characteristic surrogate for the area bound
};

struct RegionAreas {
  std::string name;
  double area_g = 0.0;
  double area_flat = 0.0;  ///< area of 4|q|^{1/2}
  double ratio = 0.0;      ///< area_g / area_flat (NaN when area_flat == 0)
  double upper_bound = 0.0;  ///< (3/2) area_flat + 6 pi |chi|
};

struct BoundReport {
  double min_3psi2_minus_psi1 = 0.0;
  double max_3psi2_minus_psi1 = 0.0;
  std::optional<double> min_g_over_flat;    ///< min g / (4|q|^{1/2}) over q != 0 nodes
  std::optional<double> min_g_over_const;   ///< min g / (-3 kappa sigma) on hyperbolic domains
  double max_kappa_g = 0.0;
  double max_f1_plus_f2 = 0.0;
  std::vector<RegionAreas> regions;
};

/// Evaluated over equation nodes. With no regions given, one region covering the active nodes.
BoundReport bound_report(const SolutionPair& pair, const ConformalBackground& bg, const QuarticInput& q,
                         const std::vector<Region>& regions = {});

/// u1 + u2 = psi1 + psi2 - (1/2) log ||q||^2; NaN where q = 0.
ScalarField flat_error(const SolutionPair& pair, const ConformalBackground& bg, const QuarticInput& q);

/// Bilinear interpolation; throws when a corner node is inactive.
double sample_bilinear(const Lattice& lattice, const ScalarField& f, std::complex<double> z);

/// Length of the straight segment a -> b in the flat metric |q|^{1/2} (an upper bound on the
/// flat distance).
double flat_segment_length(const QuarticInput& q, std::complex<double> a, std::complex<double> b);

/// Flat distance estimate from z to the nearest zero of q (straight segments); +inf when q has none.
double flat_distance_to_zeros(const QuarticInput& q, std::complex<double> z);

struct DecayProfile {
  std::complex<double> center;
  std::complex<double> direction;  ///< unit vector of the sampling ray
  std::vector<double> radii;       ///< Euclidean offsets from the center, sorted
  std::vector<double> flat_distance;  ///< flat distance of each sample from the zeros
  std::vector<double> r0;           ///< flat_distance / ||q||^{1/2}
  std::vector<double> u;            ///< measured u1 + u2
  double q_mass = 0.0;              ///< ||q|| = area of |q|^{1/2}
  double rate = 0.0;                ///< -slope of log u against r0 over the inner half
  int fit_points = 0;
  // Bessel comparison at the center.
  double oracle_C = 0.0;
  double oracle_a = 0.0;
  double oracle_r = 0.0;  ///< flat radius of the comparison ball
  double ball_radius = 0.0;  ///< Euclidean radius of the comparison ball
  double center_value = 0.0;
  double oracle_center = 0.0;  ///< eta(0)
  std::vector<double> oracle;  ///< eta at each radius (NaN beyond the ball)
};

/// Samples u1 + u2 along the ray from `center` pointing away from the nearest zero of q.
DecayProfile decay_compare(const SolutionPair& pair, const ConformalBackground& bg, const QuarticInput& q,
                           std::complex<double> center, const std::vector<double>& radii);

struct DecayScaling {
  std::vector<double> mass_factors;    ///< requested ||q|| multipliers
  std::vector<double> coefficients;    ///< c in q = c z^4
  std::vector<DecayProfile> profiles;
  std::vector<double> rate_ratio;      ///< rate_i / rate_0
  std::vector<double> expected_ratio;  ///< (||q||_i / ||q||_0)^{1/2}
  int iterations = 0;                  ///< total Newton iterations
};

/// q = c z^4 on the Poincare disk of radius 0.9 with c = c0 f^2 for each mass factor f. The
/// ray starts at flat distance 1 from the zero and its samples are uniform in flat distance
/// over [1, 5].
DecayScaling decay_scaling(int n, double c0, const std::vector<double>& mass_factors, int samples = 17);

/// Nodes whose flat distance to the zeros is >= 2 eps, eps = eps_fraction * (largest flat
/// distance to the zeros over the active nodes). Every active node when q has no zeros.
RegionMask far_from_zeros_mask(const Lattice& lattice, const QuarticInput& q, double eps_fraction = 0.15);

struct RaySweepOptions {
  SolverOptions solver;
  bool parallel = false;  ///< solve all t concurrently, no warm start
  unsigned threads = 0;   ///< cap on concurrent solves (0: hardware concurrency)
  double eps_fraction = 0.15;
};

struct RayStep {
  double t = 0.0;
  bool ok = false;
  std::string error;
  SolutionPair solution;
  double min_increment = 0.0;    ///< min over equation nodes of the change in psi1 - psi2 vs previous t
  bool has_increment = false;
  double ratio_deviation = 0.0;  ///< max |g_t/(4 t^{1/2}|q|^{1/2}) - 1| on the far mask
  double area_ratio = 0.0;       ///< Area(g_t) / Area(4 t^{1/2}|q|^{1/2})
};

struct RaySweepReport {
  std::vector<RayStep> steps;
  RegionMask far_mask;
  bool all_ok() const;
};

RaySweepReport ray_sweep(const ConformalBackground& bg, const QuarticInput& q, const std::vector<double>& t_list,
                         const RaySweepOptions& opts = {});

}  // namespace hitchin
