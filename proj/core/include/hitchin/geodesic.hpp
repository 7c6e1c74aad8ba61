#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "hitchin/flat_surface.hpp"
#include "hitchin/saddle.hpp"

namespace hitchin {

/// Closed corridor: the cyclic sequence of edge ids crossed, each leaving its own polygon.
struct Corridor {
  std::vector<int> edges;
};

/// Class p * w1 + q * w2 on a built-in torus with periods (w1, w2).
struct TorusClass {
  int p = 0;
  int q = 0;
};

using CurveClass = std::variant<Corridor, TorusClass>;

struct GeodesicLengthOptions {
  int max_moves = 10'000;
  /// Minimum allowed distance from the geodesic to a puncture.
  double puncture_radius = 0.0;
};

struct GeodesicResult {
  double length = 0.0;
  std::vector<int> cone_points;  ///< vertex classes touched with a bend, one period, in order
  std::vector<Point> path;       ///< developed path over one period (first point repeated at the end)
  int moves = 0;
  Corridor corridor;  ///< corridor after tightening
};

/// Length of the geodesic representative of a closed curve class.
GeodesicResult geodesic_length(const FlatSurface& surface, const CurveClass& curve,
                               const GeodesicLengthOptions& opts = {});

/// Corridor of a straight closed curve with holonomy h (polygon 0 frame) on a translation surface.
Corridor straight_corridor(const FlatSurface& surface, Point h);

/// Corridor of a closed chain of saddle connections pushed slightly to its left.
Corridor chain_corridor(const FlatSurface& surface, const GeodesicSearch& search, const ClosedGeodesic& chain);

/// Weighted torus class.
struct WeightedClass {
  int p = 0;
  int q = 0;
  double weight = 0.0;
};

/// Flat pieces plus a weighted multicurve of pairwise disjoint torus classes.
struct MixedStructure {
  std::vector<FlatSurface> pieces;
  std::vector<WeightedClass> multicurve;
};

struct PieceCurve {
  int piece = 0;
  CurveClass curve;
};

/// A curve split into its flat-piece components and its torus class in the multicurve region.
struct MixedCurve {
  std::vector<PieceCurve> flat;
  std::optional<TorusClass> complement;
};

/// Validates weights and disjointness.
void validate(const MixedStructure& mix);

/// Sum of flat geodesic lengths plus sum of w * |p q' - q p'| over the multicurve.
double mixed_length(const MixedStructure& mix, const MixedCurve& curve, const GeodesicLengthOptions& opts = {});

}  // namespace hitchin
