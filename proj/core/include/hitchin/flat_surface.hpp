#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace hitchin {

using Point = std::complex<double>;

/// z -> rot * z + shift with rot a power of i.
struct Isometry {
  Point rot{1.0, 0.0};
  Point shift{0.0, 0.0};

  Point operator()(Point z) const { return rot * z + shift; }
  /// (this o other)(z) = this(other(z))
  Isometry compose(const Isometry& other) const { return {rot * other.rot, rot * other.shift + shift}; }
  Isometry inverse() const { return {std::conj(rot), -std::conj(rot) * shift}; }
};

/// Edge a and edge b (global ids) glued with reversed orientation; the gluing map carries
/// b's polygon onto a's side after a rotation by k * pi/2.
struct Pairing {
  int a = 0;
  int b = 0;
  int k = 0;
};

struct Corner {
  int polygon = 0;
  int vertex = 0;
  bool operator==(const Corner&) const = default;
};

/// One vertex class: its corners in counter-clockwise order around the point.
struct ConePoint {
  std::vector<Corner> corners;
  std::vector<double> offsets;  ///< angular position of each corner's outgoing edge
  double angle = 0.0;           ///< total angle, 2 pi + k pi/2
  int k = 0;
  bool marked() const { return k == 0; }
  bool puncture() const { return k < 0; }
};

/// Convex counter-clockwise polygons glued along edges by translations composed with
/// quarter-turn rotations. Immutable once built.
class FlatSurface {
 public:
  /// Validates pairings, cone angles and Gauss-Bonnet. Negative k (angle 2 pi - p pi/2,
  /// p <= 3) is accepted only with allow_punctures.
  static FlatSurface build(std::vector<std::vector<Point>> polygons, std::vector<Pairing> pairings,
                           bool allow_punctures = false);

  /// Regular octagon of side 1, opposite sides glued by translation.
  static FlatSurface octagon();
  /// n x n grid of unit squares glued into a torus of side n.
  static FlatSurface square_torus(int n = 1);

  /// Every coordinate multiplied by lambda > 0.
  FlatSurface scaled(double lambda) const;
  /// Scaled to unit area.
  FlatSurface unit_area() const;

  int polygon_count() const { return int(polygons_.size()); }
  const std::vector<Point>& polygon(int p) const { return polygons_[std::size_t(p)]; }
  const std::vector<Pairing>& pairings() const { return pairings_; }
  int edge_count() const { return int(edge_polygon_.size()); }
  int edge_id(int polygon, int index) const;
  int edge_polygon(int id) const { return edge_polygon_[std::size_t(id)]; }
  int edge_index(int id) const { return edge_index_[std::size_t(id)]; }
  Point edge_start(int id) const;
  Point edge_end(int id) const;
  int partner(int id) const { return partner_[std::size_t(id)]; }
  /// Carries the partner polygon's coordinates into the frame of edge id's polygon.
  const Isometry& gluing(int id) const { return gluing_[std::size_t(id)]; }

  const std::vector<ConePoint>& cone_points() const { return cones_; }
  int vertex_class(Corner c) const;
  /// Position of the corner in its vertex class's cycle.
  int corner_position(Corner c) const;
  double corner_angle(Corner c) const;
  /// Counter-clockwise neighbour of a corner around its vertex (across the incoming edge).
  Corner next_corner(Corner c) const;
  /// Clockwise neighbour (across the outgoing edge).
  Corner previous_corner(Corner c) const;
  /// Edge crossed when stepping counter-clockwise (incoming edge) or clockwise (outgoing edge).
  int incoming_edge(Corner c) const;
  int outgoing_edge(Corner c) const;

  int genus() const { return genus_; }
  int euler_characteristic() const { return euler_; }
  double area() const { return area_; }
  bool has_punctures() const;
  /// True cone points (k != 0).
  int singular_count() const;
  /// Relative geometric tolerance times the mean edge length.
  double length_tolerance() const { return length_tol_; }
  /// Rotation taking polygon p's frame into polygon 0's frame, when the holonomy is a
  /// translation group (flat tori); empty otherwise.
  std::optional<Point> frame_rotation(int p) const;
  /// Periods of a built-in torus (side vectors), for the (p, q) shorthand.
  const std::optional<std::pair<Point, Point>>& torus_periods() const { return periods_; }

 private:
  std::vector<std::vector<Point>> polygons_;
  std::vector<Pairing> pairings_;
  std::vector<int> edge_offset_;
  std::vector<int> edge_polygon_;
  std::vector<int> edge_index_;
  std::vector<int> partner_;
  std::vector<Isometry> gluing_;
  std::vector<ConePoint> cones_;
  std::vector<std::vector<int>> corner_class_;
  std::vector<std::vector<int>> corner_pos_;
  std::vector<Point> frame_;
  bool translation_frames_ = false;
  int genus_ = 0;
  int euler_ = 0;
  double area_ = 0.0;
  double length_tol_ = 0.0;
  bool allow_punctures_ = false;
  std::optional<std::pair<Point, Point>> periods_;
};

/// Counter-clockwise angle from u to v in [0, 2 pi).
double ccw_angle(Point u, Point v);

}  // namespace hitchin
