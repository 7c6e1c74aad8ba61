#include "hitchin/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hitchin/error.hpp"

namespace hitchin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleTol = 1e-9;

double cross(Point u, Point v) { return u.real() * v.imag() - u.imag() * v.real(); }

// Strictly counter-clockwise, beyond the angular tolerance.
bool ccw_of(Point u, Point v) { return cross(u, v) > kAngleTol * std::abs(u) * std::abs(v); }

double segment_distance(Point a, Point b) {
  const Point d = b - a;
  const double t = std::clamp(-(a.real() * d.real() + a.imag() * d.imag()) / std::norm(d), 0.0, 1.0);
  return std::abs(a + t * d);
}

double wrap(double a, double period) {
  a = std::fmod(a, period);
  if (a < 0.0) a += period;
  return a;
}

class SectorSearch {
 public:
  SectorSearch(const FlatSurface& s, double L, std::int64_t budget)
      : s_(s), slack_(L + s.length_tolerance()), budget_(budget) {}

  void from_corner(int vertex, Corner c) {
    const auto& poly = s_.polygon(c.polygon);
    const int n = int(poly.size());
    const Point origin = poly[std::size_t(c.vertex)];
    start_vertex_ = vertex;
    start_corner_ = c;
    start_lo_ = poly[std::size_t((c.vertex + 1) % n)] - origin;
    start_offset_ = s_.cone_points()[std::size_t(vertex)].offsets[std::size_t(s_.corner_position(c))];
    const Isometry T{{1, 0}, -origin};
    // Vertices of the start polygon: the outgoing edge direction is included, the incoming one is not.
    for (int j = 1; j < n - 1; ++j) {
      const int w = (c.vertex + j) % n;
      record(T, c.polygon, w);
    }
    for (int j = 1; j < n - 1; ++j) {
      const int e = s_.edge_id(c.polygon, c.vertex + j);
      const Point a = T(s_.edge_start(e)), b = T(s_.edge_end(e));
      propagate(T, e, a, b);
    }
  }

  std::vector<SaddleConnection> found;

 private:
  void record(const Isometry& T, int polygon, int w) {
    const auto& poly = s_.polygon(polygon);
    const int n = int(poly.size());
    const Point P = T(poly[std::size_t(w)]);
    const double len = std::abs(P);
    if (len > slack_) return;
    SaddleConnection sc;
    sc.start_vertex = start_vertex_;
    sc.start_corner = start_corner_;
    sc.start_angle = start_offset_ + ccw_angle(start_lo_, P);
    const Corner end{polygon, w};
    sc.end_corner = end;
    sc.end_vertex = s_.vertex_class(end);
    const auto& cone = s_.cone_points()[std::size_t(sc.end_vertex)];
    const Point lo_end = T(poly[std::size_t((w + 1) % n)]) - P;
    double back = ccw_angle(lo_end, -P);
    if (back > s_.corner_angle(end) + kAngleTol) back = 0.0;  // wrapped just below zero
    sc.end_angle = wrap(cone.offsets[std::size_t(s_.corner_position(end))] + back, cone.angle);
    sc.vector = P;
    sc.length = len;
    sc.crossings = path_;
    found.push_back(std::move(sc));
  }

  // Continue the open wedge (lo, hi) across edge e, whose placed endpoints are a and b.
  void propagate(const Isometry& T, int e, Point lo, Point hi) {
    if (++steps_ > budget_)
      throw BudgetExceeded("saddle connection search exceeded its budget of " + std::to_string(budget_) + " steps");
    const Point a = T(s_.edge_start(e)), b = T(s_.edge_end(e));
    if (segment_distance(a, b) > slack_) return;
    const Point lo2 = ccw_of(lo, a) ? a : lo;
    const Point hi2 = ccw_of(b, hi) ? b : hi;
    if (!ccw_of(lo2, hi2)) return;
    const int f = s_.partner(e);
    const int q = s_.edge_polygon(f);
    const Isometry Tq = T.compose(s_.gluing(e));
    path_.push_back(e);
    const auto& poly = s_.polygon(q);
    const int n = int(poly.size());
    const int fi = s_.edge_index(f);
    for (int j = 2; j < n; ++j) {
      const int w = (fi + j) % n;
      const Point P = Tq(poly[std::size_t(w)]);
      if (ccw_of(lo2, P) && ccw_of(P, hi2)) record(Tq, q, w);
    }
    for (int j = 1; j < n; ++j) {
      const int g = s_.edge_id(q, fi + j);
      const Point ga = Tq(s_.edge_start(g)), gb = Tq(s_.edge_end(g));
      const Point l3 = ccw_of(lo2, ga) ? ga : lo2;
      const Point h3 = ccw_of(gb, hi2) ? gb : hi2;
      if (ccw_of(l3, h3)) propagate(Tq, g, l3, h3);
    }
    path_.pop_back();
  }

  const FlatSurface& s_;
  double slack_;
  std::int64_t budget_;
  std::int64_t steps_ = 0;
  int start_vertex_ = 0;
  Corner start_corner_;
  Point start_lo_;
  double start_offset_ = 0.0;
  std::vector<int> path_;
};

std::vector<int> min_rotation(const std::vector<int>& v) {
  std::vector<int> best = v;
  std::vector<int> r(v.size());
  for (std::size_t s = 1; s < v.size(); ++s) {
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[(i + s) % v.size()];
    if (r < best) best = r;
  }
  return best;
}

bool is_primitive(const std::vector<int>& v) {
  const std::size_t n = v.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p) continue;
    bool periodic = true;
    for (std::size_t i = p; i < n && periodic; ++i) periodic = v[i] == v[i - p];
    if (periodic) return false;
  }
  return true;
}

}  // namespace

std::vector<SaddleConnection> saddle_connections(const FlatSurface& surface, double L, const SaddleOptions& opts) {
  if (!(L > 0.0) || !std::isfinite(L)) throw GeometryError("length bound must be positive");
  SectorSearch search(surface, L, opts.budget);
  const auto& cones = surface.cone_points();
  for (std::size_t v = 0; v < cones.size(); ++v)
    for (const Corner& c : cones[v].corners) search.from_corner(int(v), c);
  auto out = std::move(search.found);
  std::sort(out.begin(), out.end(), [](const SaddleConnection& a, const SaddleConnection& b) {
    if (a.start_vertex != b.start_vertex) return a.start_vertex < b.start_vertex;
    if (a.start_angle != b.start_angle) return a.start_angle < b.start_angle;
    return a.length < b.length;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = int(i);

  // Reverse pairing: same segment seen from the other end.
  const double tol_len = 1e-9 * std::max(L, 1e-300) + surface.length_tolerance();
  for (auto& sc : out) {
    const double theta = sc.end_angle;
    const double period = cones[std::size_t(sc.end_vertex)].angle;
    for (double target : {theta, theta - period, theta + period}) {
      auto lo = std::lower_bound(out.begin(), out.end(), std::pair{sc.end_vertex, target - kAngleTol},
                                 [](const SaddleConnection& a, const std::pair<int, double>& key) {
                                   return a.start_vertex < key.first ||
                                          (a.start_vertex == key.first && a.start_angle < key.second);
                                 });
      for (auto it = lo; it != out.end() && it->start_vertex == sc.end_vertex &&
                         it->start_angle <= target + kAngleTol;
           ++it) {
        if (std::abs(it->length - sc.length) <= tol_len) {
          sc.reverse = it->id;
          break;
        }
      }
      if (sc.reverse >= 0) break;
    }
  }
  return out;
}

namespace {

struct ChainInfo {
  double length = 0.0;
  ChainKind kind = ChainKind::rigid;
  Point holonomy;
};

// Depth-first search over concatenations with every junction angle >= pi on both sides.
// Calls visit(seq, info) once per primitive unoriented chain of length <= L.
template <class Visit>
void enumerate_chains(const FlatSurface& surface, const std::vector<SaddleConnection>& S, double L,
                      std::int64_t budget, Visit&& visit) {
  const auto& cones = surface.cone_points();
  const double slack = L + surface.length_tolerance();
  auto allowed = [&](int v, double theta_in, double theta_out) {
    const double period = cones[std::size_t(v)].angle;
    const double right = wrap(theta_out - theta_in, period);
    return right >= kPi - kAngleTol && right <= period - kPi + kAngleTol;
  };
  std::vector<std::vector<int>> succ(S.size());
  for (const auto& a : S) {
    for (const auto& b : S)
      if (b.start_vertex == a.end_vertex && allowed(a.end_vertex, a.end_angle, b.start_angle))
        succ[std::size_t(a.id)].push_back(b.id);
    std::sort(succ[std::size_t(a.id)].begin(), succ[std::size_t(a.id)].end(), [&](int x, int y) {
      return S[std::size_t(x)].length < S[std::size_t(y)].length ||
             (S[std::size_t(x)].length == S[std::size_t(y)].length && x < y);
    });
  }

  std::vector<int> chain, rev;
  auto canonical = [&]() {
    const std::size_t n = chain.size();
    for (std::size_t r = 1; r < n; ++r) {
      if (chain[r] != chain[0]) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const int x = chain[(i + r) % n], y = chain[i];
        if (x < y) return false;
        if (x > y) break;
      }
    }
    if (!is_primitive(chain)) return false;
    rev.clear();
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const int r = S[std::size_t(*it)].reverse;
      if (r < 0) return true;
      rev.push_back(r);
    }
    return !(min_rotation(rev) < chain);
  };
  auto info = [&]() {
    ChainInfo g;
    bool all_marked = true, left_pi = true, right_pi = true;
    const std::size_t n = chain.size();
    for (std::size_t i = 0; i < n; ++i) {
      const SaddleConnection& in = S[std::size_t(chain[(i + n - 1) % n])];
      const SaddleConnection& out = S[std::size_t(chain[i])];
      const ConePoint& cone = cones[std::size_t(out.start_vertex)];
      const double left = wrap(in.end_angle - out.start_angle, cone.angle);
      all_marked = all_marked && cone.marked();
      left_pi = left_pi && std::abs(left - kPi) <= 1e-7;
      right_pi = right_pi && std::abs(cone.angle - left - kPi) <= 1e-7;
      g.length += out.length;
      const auto rot = surface.frame_rotation(out.start_corner.polygon);
      g.holonomy += rot ? *rot * out.vector : Point{std::nan(""), std::nan("")};
    }
    g.kind = all_marked ? ChainKind::cylinder_interior
                        : (left_pi || right_pi ? ChainKind::cylinder_boundary : ChainKind::rigid);
    return g;
  };

  std::int64_t nodes = 0;
  auto dfs = [&](auto&& self, int first, double len) -> void {
    if (++nodes > budget)
      throw BudgetExceeded("closed geodesic search exceeded its budget of " + std::to_string(budget) + " nodes");
    const SaddleConnection& last = S[std::size_t(chain.back())];
    const SaddleConnection& head = S[std::size_t(first)];
    if (last.end_vertex == head.start_vertex && allowed(last.end_vertex, last.end_angle, head.start_angle) &&
        canonical())
      visit(chain, info());
    for (int t : succ[std::size_t(last.id)]) {
      const double next = len + S[std::size_t(t)].length;
      if (next > slack) break;
      if (t < first) continue;
      chain.push_back(t);
      self(self, first, next);
      chain.pop_back();
    }
  };
  for (const auto& sc : S) {
    chain.assign(1, sc.id);
    dfs(dfs, sc.id, sc.length);
  }
}

std::vector<double> lengths_of_classes(const FlatSurface& surface, std::vector<ChainInfo> chains) {
  std::vector<double> out, boundary;
  std::vector<std::pair<Point, double>> interior;
  const bool singular = surface.singular_count() > 0;
  for (const auto& g : chains) {
    switch (g.kind) {
      case ChainKind::rigid: out.push_back(g.length); break;
      case ChainKind::cylinder_boundary: boundary.push_back(g.length); break;
      case ChainKind::cylinder_interior:
        if (!singular) {
          Point h = g.holonomy;
          if (h.real() < 0.0 || (h.real() == 0.0 && h.imag() < 0)) h = -h;
          interior.emplace_back(h, g.length);
        }
        break;
    }
  }
  // A cylinder has two boundary chains of equal length.
  std::sort(boundary.begin(), boundary.end());
  for (std::size_t i = 0; i < boundary.size(); i += 2) out.push_back(boundary[i]);
  // Parallel cores of one cylinder family share a holonomy vector.
  const double tol = 1e-9;
  std::sort(interior.begin(), interior.end(), [](const auto& a, const auto& b) {
    return std::arg(a.first) < std::arg(b.first) ||
           (std::arg(a.first) == std::arg(b.first) && a.second < b.second);
  });
  for (std::size_t i = 0; i < interior.size(); ++i) {
    bool dup = false;
    for (std::size_t j = i; j-- > 0;) {
      if (std::arg(interior[i].first) - std::arg(interior[j].first) > tol) break;
      dup = dup || std::abs(interior[i].first - interior[j].first) <= tol * interior[i].second;
    }
    if (!dup) out.push_back(interior[i].second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

GeodesicSearch closed_geodesics(const FlatSurface& surface, double L, const GeodesicOptions& opts) {
  GeodesicSearch res;
  res.saddles = saddle_connections(surface, L, opts.saddle);
  const auto& S = res.saddles;
  const auto& cones = surface.cone_points();
  enumerate_chains(surface, S, L, opts.budget, [&](const std::vector<int>& seq, const ChainInfo& info) {
    ClosedGeodesic g;
    g.saddles = seq;
    g.length = info.length;
    g.kind = info.kind;
    g.holonomy = info.holonomy;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const SaddleConnection& in = S[std::size_t(seq[(i + seq.size() - 1) % seq.size()])];
      const SaddleConnection& out = S[std::size_t(seq[i])];
      g.left_angles.push_back(wrap(in.end_angle - out.start_angle, cones[std::size_t(out.start_vertex)].angle));
    }
    res.closed.push_back(std::move(g));
  });
  std::sort(res.closed.begin(), res.closed.end(), [](const ClosedGeodesic& a, const ClosedGeodesic& b) {
    if (a.length != b.length) return a.length < b.length;
    return a.saddles < b.saddles;
  });
  return res;
}

std::vector<double> class_lengths(const FlatSurface& surface, const GeodesicSearch& search) {
  std::vector<ChainInfo> chains;
  for (const auto& g : search.closed) chains.push_back({g.length, g.kind, g.holonomy});
  return lengths_of_classes(surface, std::move(chains));
}

std::vector<double> class_lengths(const FlatSurface& surface, double L, const GeodesicOptions& opts) {
  const auto S = saddle_connections(surface, L, opts.saddle);
  std::vector<ChainInfo> chains;
  enumerate_chains(surface, S, L, opts.budget,
                   [&](const std::vector<int>&, const ChainInfo& info) { chains.push_back(info); });
  return lengths_of_classes(surface, std::move(chains));
}

SaddleReport systole_and_saddles(const FlatSurface& surface, double L, const GeodesicOptions& opts) {
  GeodesicSearch g = closed_geodesics(surface, L, opts);
  SaddleReport r;
  for (const auto& sc : g.saddles)
    if (sc.reverse < 0 || sc.id < sc.reverse) r.saddles.push_back(sc);
  std::stable_sort(r.saddles.begin(), r.saddles.end(),
                   [](const SaddleConnection& a, const SaddleConnection& b) { return a.length < b.length; });
  for (const auto& c : g.closed)
    if (!r.systole || c.length < *r.systole) r.systole = c.length;
  r.closed = std::move(g.closed);
  return r;
}

}  // namespace hitchin
