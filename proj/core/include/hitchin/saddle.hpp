#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hitchin/flat_surface.hpp"

namespace hitchin {

/// Oriented straight segment between vertices, with no vertex in its interior.
struct SaddleConnection {
  int id = 0;
  int start_vertex = 0;
  int end_vertex = 0;
  Corner start_corner;
  Corner end_corner;
  double start_angle = 0.0;  ///< direction at the start, as an angle around the start vertex
  double end_angle = 0.0;    ///< direction back along the segment, around the end vertex
  Point vector;              ///< displacement in the start polygon's frame
  double length = 0.0;
  std::vector<int> crossings;  ///< edges crossed, in order
  int reverse = -1;            ///< id of the same segment traversed backwards
};

struct SaddleOptions {
  /// Cap on unfolding steps (wedge propagations) before BudgetExceeded.
  std::int64_t budget = 20'000'000;
};

/// Every oriented saddle connection of length <= L, sorted by (start vertex, start angle).
std::vector<SaddleConnection> saddle_connections(const FlatSurface& surface, double L,
                                                 const SaddleOptions& opts = {});

enum class ChainKind {
  rigid,              ///< both sides exceed pi somewhere: the unique geodesic of its class
  cylinder_boundary,  ///< one side is exactly pi at every junction
  cylinder_interior,  ///< only marked points: sweeps a cylinder of a flat torus
};

/// Cyclic concatenation of saddle connections whose junction angles are >= pi on both sides.
struct ClosedGeodesic {
  std::vector<int> saddles;  ///< canonical rotation, ids into the saddle list
  double length = 0.0;
  ChainKind kind = ChainKind::rigid;
  std::vector<double> left_angles;  ///< angle on the left at each junction (before saddles[i])
  Point holonomy;                   ///< developed displacement (meaningful on translation surfaces)
};

struct GeodesicSearch {
  std::vector<SaddleConnection> saddles;
  std::vector<ClosedGeodesic> closed;  ///< primitive, unoriented, length <= L
};

struct GeodesicOptions {
  SaddleOptions saddle;
  /// Cap on chain-search nodes before BudgetExceeded.
  std::int64_t budget = 400'000'000;
};

/// Primitive unoriented closed geodesics through vertices with length <= L.
GeodesicSearch closed_geodesics(const FlatSurface& surface, double L, const GeodesicOptions& opts = {});

/// Unoriented saddle connections (one per reverse pair), sorted by length, plus the systole.
struct SaddleReport {
  std::vector<SaddleConnection> saddles;
  std::optional<double> systole;  ///< shortest closed geodesic with length <= L
  std::vector<ClosedGeodesic> closed;
};

SaddleReport systole_and_saddles(const FlatSurface& surface, double L, const GeodesicOptions& opts = {});

/// Lengths of distinct free homotopy classes among the closed geodesics (cylinder families
/// counted once), sorted.
std::vector<double> class_lengths(const FlatSurface& surface, const GeodesicSearch& search);
/// Same, enumerating at cutoff L without keeping the chains.
std::vector<double> class_lengths(const FlatSurface& surface, double L, const GeodesicOptions& opts = {});

}  // namespace hitchin
