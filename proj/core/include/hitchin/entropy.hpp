#pragma once

#include <cstdint>
#include <vector>

#include "hitchin/flat_surface.hpp"
#include "hitchin/saddle.hpp"

namespace hitchin {

/// N(L): primitive unoriented closed geodesics of length <= L, one per cylinder family.
struct CountTable {
  std::vector<double> cutoffs;
  std::vector<std::int64_t> counts;
};

/// Counts at every cutoff from one enumeration at the largest. Cutoffs must be increasing.
CountTable count_closed_geodesics(const FlatSurface& surface, const std::vector<double>& cutoffs,
                                  const GeodesicOptions& opts = {});
std::int64_t count_closed_geodesics(const FlatSurface& surface, double L, const GeodesicOptions& opts = {});

/// n evenly spaced cutoffs ending at L_max (the first is L_max / n).
std::vector<double> even_cutoffs(double L_max, int n);

struct EntropyWindow {
  double end = 0.0;    ///< window is [end / 2, end]
  double slope = 0.0;  ///< least-squares slope of log N against L
  int points = 0;
};

struct EntropyFit {
  std::vector<EntropyWindow> windows;
  double headline = 0.0;  ///< slope of the last window
  /// (max - min) / |headline| over windows ending in the upper half of the cutoff range.
  double spread = 0.0;
};

/// Needs at least 4 cutoffs and a non-constant count table.
EntropyFit entropy_fit(const CountTable& table);

/// Upper bound t -> flat_entropy / (4 sqrt t) for the metric 4 t^{1/2} |q|^{1/2}, with t scaling
/// the length element.
double flat_entropy_bound(double flat_entropy, double t);

}  // namespace hitchin
