#include "hitchin/flat_surface.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <string>

#include "hitchin/error.hpp"

namespace hitchin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleTol = 1e-9;

double cross(Point u, Point v) { return u.real() * v.imag() - u.imag() * v.real(); }

Point quarter_turns(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

}  // namespace

double ccw_angle(Point u, Point v) {
  double a = std::atan2(cross(u, v), u.real() * v.real() + u.imag() * v.imag());
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

int FlatSurface::edge_id(int polygon, int index) const {
  const int n = int(polygons_[std::size_t(polygon)].size());
  return edge_offset_[std::size_t(polygon)] + ((index % n) + n) % n;
}

Point FlatSurface::edge_start(int id) const {
  const auto& poly = polygons_[std::size_t(edge_polygon(id))];
  return poly[std::size_t(edge_index(id))];
}

Point FlatSurface::edge_end(int id) const {
  const auto& poly = polygons_[std::size_t(edge_polygon(id))];
  return poly[(std::size_t(edge_index(id)) + 1) % poly.size()];
}

int FlatSurface::vertex_class(Corner c) const {
  return corner_class_[std::size_t(c.polygon)][std::size_t(c.vertex)];
}

int FlatSurface::corner_position(Corner c) const {
  return corner_pos_[std::size_t(c.polygon)][std::size_t(c.vertex)];
}

double FlatSurface::corner_angle(Corner c) const {
  const auto& poly = polygons_[std::size_t(c.polygon)];
  const std::size_t n = poly.size(), i = std::size_t(c.vertex);
  return ccw_angle(poly[(i + 1) % n] - poly[i], poly[(i + n - 1) % n] - poly[i]);
}

int FlatSurface::incoming_edge(Corner c) const { return edge_id(c.polygon, c.vertex - 1); }
int FlatSurface::outgoing_edge(Corner c) const { return edge_id(c.polygon, c.vertex); }

Corner FlatSurface::next_corner(Corner c) const {
  const int b = partner(incoming_edge(c));
  return {edge_polygon(b), edge_index(b)};
}

Corner FlatSurface::previous_corner(Corner c) const {
  const int b = partner(outgoing_edge(c));
  const int n = int(polygons_[std::size_t(edge_polygon(b))].size());
  return {edge_polygon(b), (edge_index(b) + 1) % n};
}

bool FlatSurface::has_punctures() const {
  for (const auto& c : cones_)
    if (c.puncture()) return true;
  return false;
}

int FlatSurface::singular_count() const {
  int n = 0;
  for (const auto& c : cones_) n += c.k != 0;
  return n;
}

std::optional<Point> FlatSurface::frame_rotation(int p) const {
  if (!translation_frames_) return std::nullopt;
  return frame_[std::size_t(p)];
}

FlatSurface FlatSurface::build(std::vector<std::vector<Point>> polygons, std::vector<Pairing> pairings,
                               bool allow_punctures) {
  FlatSurface s;
  if (polygons.empty()) throw GeometryError("surface has no polygons");
  s.allow_punctures_ = allow_punctures;
  int total = 0;
  double perimeter = 0.0;
  for (std::size_t p = 0; p < polygons.size(); ++p) {
    const auto& poly = polygons[p];
    const std::size_t n = poly.size();
    if (n < 3) throw GeometryError("polygon " + std::to_string(p) + " has fewer than 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = poly[i], b = poly[(i + 1) % n], c = poly[(i + 2) % n];
      if (!(std::isfinite(a.real()) && std::isfinite(a.imag())))
        throw GeometryError("polygon " + std::to_string(p) + " has a non-finite vertex");
      if (!(cross(b - a, c - b) > 0.0))
        throw GeometryError("polygon " + std::to_string(p) + " is not strictly convex and counter-clockwise");
      perimeter += std::abs(b - a);
    }
    s.edge_offset_.push_back(total);
    for (std::size_t i = 0; i < n; ++i) {
      s.edge_polygon_.push_back(int(p));
      s.edge_index_.push_back(int(i));
    }
    total += int(n);
  }
  s.polygons_ = std::move(polygons);
  s.length_tol_ = 1e-9 * perimeter / total;

  s.partner_.assign(std::size_t(total), -1);
  s.gluing_.assign(std::size_t(total), Isometry{});
  for (const auto& pr : pairings) {
    if (pr.a < 0 || pr.b < 0 || pr.a >= total || pr.b >= total)
      throw GeometryError("pairing refers to a missing edge");
    if (pr.a == pr.b) throw GeometryError("edge " + std::to_string(pr.a) + " paired with itself");
    if (s.partner_[std::size_t(pr.a)] >= 0 || s.partner_[std::size_t(pr.b)] >= 0)
      throw GeometryError("edge paired more than once (" + std::to_string(pr.a) + ", " + std::to_string(pr.b) + ")");
    const Point a0 = s.edge_start(pr.a), a1 = s.edge_end(pr.a);
    const Point b0 = s.edge_start(pr.b), b1 = s.edge_end(pr.b);
    if (std::abs(std::abs(a1 - a0) - std::abs(b1 - b0)) > s.length_tol_)
      throw GeometryError("paired edges " + std::to_string(pr.a) + " and " + std::to_string(pr.b) +
                          " differ in length");
    // Rotation taking b (reversed) onto a.
    const Point r = (a1 - a0) / (b0 - b1);
    const double turns = std::arg(r) / (kPi / 2.0);
    const double nearest = std::round(turns);
    if (std::abs(turns - nearest) > kAngleTol)
      throw GeometryError("pairing (" + std::to_string(pr.a) + ", " + std::to_string(pr.b) +
                          ") is not a rotation by a multiple of pi/2");
    const int k = int(nearest);
    if ((((pr.k - k) % 4) + 4) % 4 != 0)
      throw GeometryError("pairing (" + std::to_string(pr.a) + ", " + std::to_string(pr.b) + ") states k = " +
                          std::to_string(pr.k) + " but the edges need k = " + std::to_string(k));
    const Point rot = quarter_turns(k);
    const Isometry to_a{rot, a0 - rot * b1};
    s.partner_[std::size_t(pr.a)] = pr.b;
    s.partner_[std::size_t(pr.b)] = pr.a;
    s.gluing_[std::size_t(pr.a)] = to_a;
    s.gluing_[std::size_t(pr.b)] = to_a.inverse();
  }
  for (int e = 0; e < total; ++e)
    if (s.partner_[std::size_t(e)] < 0) throw GeometryError("edge " + std::to_string(e) + " is unmatched");
  s.pairings_ = std::move(pairings);

  // Connectivity and frames.
  const std::size_t np = s.polygons_.size();
  std::vector<int> seen(np, 0);
  s.frame_.assign(np, Point{1, 0});
  s.translation_frames_ = true;
  std::queue<int> todo;
  todo.push(0);
  seen[0] = 1;
  while (!todo.empty()) {
    const int p = todo.front();
    todo.pop();
    for (std::size_t i = 0; i < s.polygons_[std::size_t(p)].size(); ++i) {
      const int e = s.edge_id(p, int(i));
      const int q = s.edge_polygon(s.partner(e));
      // frame(q) maps q's coordinates into polygon 0: frame(p) * gluing(e).rot
      const Point fq = s.frame_[std::size_t(p)] * s.gluing_[std::size_t(e)].rot;
      if (!seen[std::size_t(q)]) {
        seen[std::size_t(q)] = 1;
        s.frame_[std::size_t(q)] = fq;
        todo.push(q);
      } else if (std::abs(s.frame_[std::size_t(q)] - fq) > 1e-12) {
        s.translation_frames_ = false;
      }
    }
  }
  for (std::size_t p = 0; p < np; ++p)
    if (!seen[p]) throw GeometryError("polygon " + std::to_string(p) + " is not connected to polygon 0");

  // Vertex classes.
  s.corner_class_.resize(np);
  s.corner_pos_.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    s.corner_class_[p].assign(s.polygons_[p].size(), -1);
    s.corner_pos_[p].assign(s.polygons_[p].size(), -1);
  }
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t i = 0; i < s.polygons_[p].size(); ++i) {
      if (s.corner_class_[p][i] >= 0) continue;
      ConePoint cone;
      const int id = int(s.cones_.size());
      Corner c{int(p), int(i)};
      double acc = 0.0;
      for (;;) {
        s.corner_class_[std::size_t(c.polygon)][std::size_t(c.vertex)] = id;
        s.corner_pos_[std::size_t(c.polygon)][std::size_t(c.vertex)] = int(cone.corners.size());
        cone.corners.push_back(c);
        cone.offsets.push_back(acc);
        acc += s.corner_angle(c);
        c = s.next_corner(c);
        if (c == Corner{int(p), int(i)}) break;
        if (s.corner_class_[std::size_t(c.polygon)][std::size_t(c.vertex)] >= 0)
          throw GeometryError("inconsistent vertex cycle");
      }
      cone.angle = acc;
      const double kk = (acc - 2.0 * kPi) / (kPi / 2.0);
      cone.k = int(std::round(kk));
      if (std::abs(kk - cone.k) > 1e-7)
        throw GeometryError("vertex " + std::to_string(id) + " has angle " + std::to_string(acc) +
                            ", not 2 pi + k pi/2");
      if (cone.k < 0 && (!allow_punctures || cone.k < -3))
        throw GeometryError("vertex " + std::to_string(id) + " has illegal cone angle " + std::to_string(acc));
      s.cones_.push_back(std::move(cone));
    }
  }

  const int V = int(s.cones_.size()), E = total / 2, F = int(np);
  s.euler_ = V - E + F;
  if (s.euler_ > 2 || (2 - s.euler_) % 2 != 0) throw GeometryError("Euler characteristic does not give a closed orientable surface");
  s.genus_ = (2 - s.euler_) / 2;
  int ksum = 0;
  for (const auto& c : s.cones_) ksum += c.k;
  if (ksum != 4 * (2 * s.genus_ - 2))
    throw GeometryError("Gauss-Bonnet fails: sum k = " + std::to_string(ksum) + ", genus " + std::to_string(s.genus_));

  for (const auto& poly : s.polygons_) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
    s.area_ += 0.5 * a;
  }
  return s;
}

FlatSurface FlatSurface::octagon() {
  const double s = std::sqrt(0.5);
  std::vector<Point> v = {{0, 0}, {1, 0}, {1 + s, s}, {1 + s, 1 + s}, {1, 1 + 2 * s}, {0, 1 + 2 * s}, {-s, 1 + s}, {-s, s}};
  return build({v}, {{0, 4, 0}, {1, 5, 0}, {2, 6, 0}, {3, 7, 0}});
}

FlatSurface FlatSurface::square_torus(int n) {
  if (n < 1) throw GeometryError("square torus needs n >= 1");
  std::vector<std::vector<Point>> polys;
  std::vector<Pairing> pairs;
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      polys.push_back({{double(a), double(b)}, {a + 1.0, double(b)}, {a + 1.0, b + 1.0}, {double(a), b + 1.0}});
  auto cell = [n](int a, int b) { return ((a + n) % n) + n * ((b + n) % n); };
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      pairs.push_back({4 * cell(a, b) + 1, 4 * cell(a + 1, b) + 3, 0});
      pairs.push_back({4 * cell(a, b) + 2, 4 * cell(a, b + 1) + 0, 0});
    }
  }
  FlatSurface s = build(std::move(polys), std::move(pairs));
  s.periods_ = std::make_pair(Point{double(n), 0.0}, Point{0.0, double(n)});
  return s;
}

FlatSurface FlatSurface::scaled(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw GeometryError("scale factor must be positive");
  auto polys = polygons_;
  for (auto& poly : polys)
    for (auto& z : poly) z *= lambda;
  FlatSurface s = build(std::move(polys), pairings_, allow_punctures_);
  if (periods_) s.periods_ = std::make_pair(periods_->first * lambda, periods_->second * lambda);
  return s;
}

FlatSurface FlatSurface::unit_area() const { return scaled(1.0 / std::sqrt(area_)); }

}  // namespace hitchin
