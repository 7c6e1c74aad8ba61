#include "hitchin/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <string>

#include "hitchin/error.hpp"

namespace hitchin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleTol = 1e-9;

double cross(Point u, Point v) { return u.real() * v.imag() - u.imag() * v.real(); }
double dot(Point u, Point v) { return u.real() * v.real() + u.imag() * v.imag(); }

double wrap(double a, double period) {
  a = std::fmod(a, period);
  if (a < 0.0) a += period;
  return a;
}

Point centroid(const std::vector<Point>& poly) {
  Point c{0, 0};
  for (Point p : poly) c += p;
  return c / double(poly.size());
}

std::vector<int> reduce(const FlatSurface& s, std::vector<int> edges) {
  std::vector<int> st;
  for (;;) {
    st.clear();
    for (int e : edges) {
      if (!st.empty() && s.partner(st.back()) == e)
        st.pop_back();
      else
        st.push_back(e);
    }
    std::size_t head = 0;
    while (st.size() - head >= 2 && s.partner(st.back()) == st[head]) {
      st.pop_back();
      ++head;
    }
    std::vector<int> next(st.begin() + long(head), st.end());
    if (next == edges) return next;
    edges = std::move(next);
  }
}

void check_corridor(const FlatSurface& s, const std::vector<int>& edges) {
  if (edges.empty()) throw GeometryError("empty corridor");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const int e = edges[i];
    if (e < 0 || e >= s.edge_count()) throw GeometryError("corridor refers to a missing edge");
    const int next = edges[(i + 1) % edges.size()];
    if (next < 0 || next >= s.edge_count()) throw GeometryError("corridor refers to a missing edge");
    if (s.edge_polygon(s.partner(e)) != s.edge_polygon(next))
      throw GeometryError("corridor is not closed: edge " + std::to_string(next) + " does not follow edge " +
                          std::to_string(e));
  }
}

struct Sleeve {
  int period = 0;
  std::vector<int> edges;       // unfolded, m periods
  std::vector<Isometry> place;  // placement of the polygon left by edges[k]
  std::vector<Point> left, right;
};

Sleeve unfold(const FlatSurface& s, const std::vector<int>& corridor, int periods) {
  Sleeve sl;
  sl.period = int(corridor.size());
  const std::size_t N = corridor.size() * std::size_t(periods);
  sl.edges.resize(N);
  sl.place.resize(N + 1);
  sl.left.resize(N);
  sl.right.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const int e = corridor[k % corridor.size()];
    sl.edges[k] = e;
    sl.left[k] = sl.place[k](s.edge_end(e));
    sl.right[k] = sl.place[k](s.edge_start(e));
    sl.place[k + 1] = sl.place[k].compose(s.gluing(e));
  }
  return sl;
}

struct Apex {
  Point p;
  int index = -1;  // portal index in the sleeve
  int side = 0;    // +1 left endpoint, -1 right endpoint, 0 path end
};

class Funnel {
 public:
  explicit Funnel(double tol) : tol_(tol) {}

  std::vector<Apex> run(const Sleeve& sl, Point a, Point b) const {
    const int N = int(sl.edges.size());
    auto L = [&](int i) { return i == 0 ? a : i == N + 1 ? b : sl.left[std::size_t(i - 1)]; };
    auto R = [&](int i) { return i == 0 ? a : i == N + 1 ? b : sl.right[std::size_t(i - 1)]; };
    std::vector<Apex> path{{a, -1, 0}};
    Point apex = a, pl = a, pr = a;
    int ai = 0, li = 0, ri = 0;
    for (int i = 1; i <= N + 1; ++i) {
      const Point l = L(i), r = R(i);
      if (orient(pr - apex, r - apex) >= 0) {
        if (near(apex, pr) || orient(r - apex, pl - apex) > 0) {
          pr = r;
          ri = i;
        } else {
          apex = pl;
          ai = li;
          push(path, {apex, li - 1, +1});
          pl = pr = apex;
          li = ri = ai;
          i = ai;
          continue;
        }
      }
      if (orient(l - apex, pl - apex) >= 0) {
        if (near(apex, pl) || orient(pr - apex, l - apex) > 0) {
          pl = l;
          li = i;
        } else {
          apex = pr;
          ai = ri;
          push(path, {apex, ri - 1, -1});
          pl = pr = apex;
          li = ri = ai;
          i = ai;
          continue;
        }
      }
    }
    path.push_back({b, N, 0});
    return path;
  }

 private:
  // A fan can re-open the funnel at the same vertex; keep one apex per point.
  void push(std::vector<Apex>& path, const Apex& a) const {
    if (!near(path.back().p, a.p)) path.push_back(a);
  }
  bool near(Point u, Point v) const { return std::abs(u - v) <= tol_; }
  // Sign of cross(u, v) with a relative dead zone.
  int orient(Point u, Point v) const {
    const double nu = std::abs(u), nv = std::abs(v);
    if (nu <= tol_ || nv <= tol_) return 0;
    const double c = cross(u, v) / (nu * nv);
    return c > kAngleTol ? 1 : c < -kAngleTol ? -1 : 0;
  }
  double tol_;
};

bool bends(Point prev, Point p, Point next) {
  const Point u = p - prev, v = next - p;
  const double c = cross(u, v) / (std::abs(u) * std::abs(v));
  return std::abs(c) > kAngleTol || dot(u, v) < 0.0;
}

Corner left_corner(const FlatSurface& s, int e) {
  const int p = s.edge_polygon(e);
  return {p, (s.edge_index(e) + 1) % int(s.polygon(p).size())};
}
Corner right_corner(const FlatSurface& s, int e) { return {s.edge_polygon(e), s.edge_index(e)}; }

struct Touch {
  int j0 = 0, j1 = 0;  // run of portals sharing the vertex
  int side = 0;
  int vertex = 0;
  double beta = 0.0;  // angle on the sleeve side
};

Touch analyse_touch(const FlatSurface& s, const Sleeve& sl, const Apex& a, Point prev, Point next) {
  Touch t;
  t.side = a.side;
  const int N = int(sl.edges.size());
  auto corner = [&](int k) {
    return a.side > 0 ? left_corner(s, sl.edges[std::size_t(k)]) : right_corner(s, sl.edges[std::size_t(k)]);
  };
  auto step = [&](Corner c) { return a.side > 0 ? s.next_corner(c) : s.previous_corner(c); };
  t.j0 = t.j1 = a.index;
  while (t.j0 > 0 && step(corner(t.j0 - 1)) == corner(t.j0)) --t.j0;
  while (t.j1 + 1 < N && step(corner(t.j1)) == corner(t.j1 + 1)) ++t.j1;
  t.vertex = s.vertex_class(corner(a.index));
  const Point v = a.p;
  auto dir = [&](int k) {
    return (a.side > 0 ? sl.right[std::size_t(k)] : sl.left[std::size_t(k)]) - v;
  };
  // Sweep from the incoming ray to the outgoing ray through the run, on the sleeve side.
  auto turn = [&](Point u, Point w) { return a.side > 0 ? ccw_angle(u, w) : ccw_angle(w, u); };
  double beta = turn(prev - v, dir(t.j0));
  for (int k = t.j0; k < t.j1; ++k) beta += turn(dir(k), dir(k + 1));
  beta += turn(dir(t.j1), next - v);
  t.beta = beta;
  return t;
}

struct Analysis {
  bool done = false;
  double length = 0.0;
  std::vector<int> cones;
  std::vector<Point> path;
  std::vector<Point> punctures;
  std::optional<Touch> violation;
};

// Placed puncture endpoints of portals [from, to).
void collect_punctures(const FlatSurface& s, const Sleeve& sl, int from, int to, std::vector<Point>& out) {
  for (int k = from; k < to; ++k) {
    const int e = sl.edges[std::size_t(k)];
    for (Corner c : {left_corner(s, e), right_corner(s, e)})
      if (s.cone_points()[std::size_t(s.vertex_class(c))].puncture())
        out.push_back(sl.place[std::size_t(k)](s.polygon(c.polygon)[std::size_t(c.vertex)]));
  }
}

Analysis analyse(const FlatSurface& s, const std::vector<int>& corridor) {
  const int n = int(corridor.size());
  const Funnel funnel(s.length_tolerance());
  const auto& cones = s.cone_points();
  for (int m : {8, 16, 32, 64}) {
    const Sleeve sl = unfold(s, corridor, m);
    const Isometry H = sl.place[std::size_t(n)];
    const Point a = centroid(s.polygon(s.edge_polygon(corridor[0])));
    const Point b = sl.place.back()(a);
    const auto path = funnel.run(sl, a, b);

    std::vector<std::size_t> bending;
    for (std::size_t t = 1; t + 1 < path.size(); ++t)
      if (bends(path[t - 1].p, path[t].p, path[t + 1].p)) bending.push_back(t);

    const int lo = 2 * n, hi = (m - 2) * n;
    bool any_middle = false;
    for (std::size_t t : bending) any_middle = any_middle || (path[t].index >= lo && path[t].index < hi);

    Analysis r;
    if (!any_middle) {
      if (std::abs(H.rot - Point{1, 0}) > 1e-12) continue;
      if (std::abs(H.shift) <= s.length_tolerance()) throw GeometryError("curve class is trivial");
      r.done = true;
      r.length = std::abs(H.shift);
      r.path = {a, H(a)};
      collect_punctures(s, sl, 0, n, r.punctures);
      return r;
    }
    // First bend in the window, and its image one period later.
    std::size_t x = path.size();
    for (std::size_t t : bending)
      if (path[t].index >= 3 * n && path[t].index < 4 * n) {
        x = t;
        break;
      }
    if (x == path.size()) continue;
    std::size_t y = path.size();
    for (std::size_t t : bending)
      if (t > x && path[t].index > path[x].index && path[t].index < path[x].index + 2 * n &&
          path[t].side == path[x].side &&
          std::abs(path[t].p - H(path[x].p)) <= 1e3 * s.length_tolerance()) {
        y = t;
        break;
      }
    if (y == path.size()) continue;

    for (std::size_t t = x; t <= y; ++t) {
      r.path.push_back(path[t].p);
      if (t > x) r.length += std::abs(path[t].p - path[t - 1].p);
    }
    for (std::size_t t = x; t < y; ++t) {
      if (!bends(path[t - 1].p, path[t].p, path[t + 1].p)) continue;
      const Touch touch = analyse_touch(s, sl, path[t], path[t - 1].p, path[t + 1].p);
      const ConePoint& cone = cones[std::size_t(touch.vertex)];
      r.cones.push_back(touch.vertex);
      if (cone.puncture()) continue;
      if (cone.angle - touch.beta < kPi - 1e-9) {
        r.violation = touch;
        return r;
      }
    }
    collect_punctures(s, sl, path[x].index, path[y].index, r.punctures);
    r.done = true;
    return r;
  }
  throw GeometryError("geodesic in corridor did not stabilise (rotation holonomy without a cone point?)");
}

double polyline_distance(const std::vector<Point>& path, Point q) {
  double best = std::abs(path.front() - q);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Point a = path[i] - q, d = path[i + 1] - path[i];
    const double n2 = std::norm(d);
    const double t = n2 > 0.0 ? std::clamp(-dot(a, d) / n2, 0.0, 1.0) : 0.0;
    best = std::min(best, std::abs(a + t * d));
  }
  return best;
}

std::vector<int> apply_move(const FlatSurface& s, const std::vector<int>& corridor, const Touch& t) {
  const int n = int(corridor.size());
  const int count = t.j1 - t.j0 + 1;
  if (count >= n) throw GeometryError("curve class is trivial or peripheral around a single vertex");
  const int e0 = corridor[std::size_t(t.j0 % n)];
  Corner c = t.side > 0 ? left_corner(s, e0) : right_corner(s, e0);
  const int around = int(s.cone_points()[std::size_t(t.vertex)].corners.size());
  const int signed_steps = t.side > 0 ? count : -count;
  const int replaced = signed_steps - around * (signed_steps > 0 ? 1 : -1);
  std::vector<int> out;
  for (int k = 0; k < std::abs(replaced); ++k) {
    if (replaced > 0) {
      out.push_back(s.incoming_edge(c));
      c = s.next_corner(c);
    } else {
      out.push_back(s.outgoing_edge(c));
      c = s.previous_corner(c);
    }
  }
  for (int k = t.j1 + 1; k < t.j0 + n; ++k) out.push_back(corridor[std::size_t(k % n)]);
  return out;
}

Corridor torus_corridor(const FlatSurface& s, const TorusClass& c) {
  const auto& periods = s.torus_periods();
  if (!periods) throw GeometryError("torus shorthand needs a built-in torus");
  if (c.p == 0 && c.q == 0) throw GeometryError("class (0, 0) is trivial");
  return straight_corridor(s, double(c.p) * periods->first + double(c.q) * periods->second);
}

}  // namespace

GeodesicResult geodesic_length(const FlatSurface& surface, const CurveClass& curve, const GeodesicLengthOptions& opts) {
  std::vector<int> corridor = std::holds_alternative<Corridor>(curve)
                                  ? std::get<Corridor>(curve).edges
                                  : torus_corridor(surface, std::get<TorusClass>(curve)).edges;
  check_corridor(surface, corridor);
  corridor = reduce(surface, corridor);
  if (corridor.empty()) throw GeometryError("curve class is trivial");

  GeodesicResult res;
  for (;;) {
    Analysis a = analyse(surface, corridor);
    if (!a.violation) {
      for (Point q : a.punctures)
        if (polyline_distance(a.path, q) < opts.puncture_radius)
          throw GeometryError("geodesic enters the neighbourhood of a puncture");
      res.length = a.length;
      res.cone_points = std::move(a.cones);
      res.path = std::move(a.path);
      res.corridor.edges = corridor;
      return res;
    }
    if (res.moves >= opts.max_moves)
      throw BudgetExceeded("geodesic tightening exceeded " + std::to_string(opts.max_moves) + " corridor moves");
    ++res.moves;
    corridor = reduce(surface, apply_move(surface, corridor, *a.violation));
    if (corridor.empty()) throw GeometryError("curve class is trivial");
  }
}

Corridor straight_corridor(const FlatSurface& s, Point h) {
  if (!s.frame_rotation(0)) throw GeometryError("straight corridors need a translation surface");
  const double len = std::abs(h);
  if (!(len > 0.0) || !std::isfinite(len)) throw GeometryError("holonomy vector must be nonzero");
  const auto& p0 = s.polygon(0);
  const Point c0 = centroid(p0);
  const double tol = s.length_tolerance();
  static constexpr double kMix[][2] = {{0.1234, 0.0567}, {0.2718, 0.1414}, {0.0314, 0.3183}, {0.1732, 0.2236}};
  for (const auto& mix : kMix) {
    const Point start = c0 + mix[0] * (p0[0] - c0) + mix[1] * (p0[1] - c0);
    Corridor out;
    int poly = 0;
    Point x = start;
    Point u = (h / len) / *s.frame_rotation(0);
    double left = len;
    bool clean = true;
    while (clean) {
      if (out.edges.size() > 1'000'000) throw BudgetExceeded("straight corridor too long");
      const auto& P = s.polygon(poly);
      const int m = int(P.size());
      double best = INFINITY;
      int exit = -1;
      for (int j = 0; j < m; ++j) {
        const Point a = P[std::size_t(j)], d = P[std::size_t((j + 1) % m)] - a;
        const double den = cross(u, d);
        if (den <= 0.0) continue;  // not leaving through this edge
        const double t = cross(a - x, d) / den;
        const double sp = cross(a - x, u) / den;
        if (t <= tol) continue;
        if (t < best) {
          best = t;
          exit = j;
          clean = sp > 1e-6 && sp < 1.0 - 1e-6;
        }
      }
      if (exit < 0) throw GeometryError("straight corridor trace failed");
      if (best >= left) {
        if (poly != 0 || std::abs(x + left * u - start) > 1e-6 * std::max(len, 1.0))
          throw GeometryError("holonomy vector is not a period of the surface");
        return out;
      }
      if (!clean) break;
      const int e = s.edge_id(poly, exit);
      out.edges.push_back(e);
      const Isometry back = s.gluing(e).inverse();
      x = back(x + best * u);
      u = back.rot * u;
      left -= best;
      poly = s.edge_polygon(s.partner(e));
    }
  }
  throw GeometryError("straight corridor keeps hitting vertices");
}

Corridor chain_corridor(const FlatSurface& s, const GeodesicSearch& search, const ClosedGeodesic& chain) {
  Corridor out;
  const auto& S = search.saddles;
  const std::size_t m = chain.saddles.size();
  for (std::size_t i = 0; i < m; ++i) {
    const SaddleConnection& in = S[std::size_t(chain.saddles[i])];
    const SaddleConnection& next = S[std::size_t(chain.saddles[(i + 1) % m])];
    out.edges.insert(out.edges.end(), in.crossings.begin(), in.crossings.end());
    const ConePoint& cone = s.cone_points()[std::size_t(in.end_vertex)];
    const double period = cone.angle;
    const double theta_in = wrap(in.end_angle, period);
    const double left = wrap(theta_in - next.start_angle, period);
    const int L = int(cone.corners.size());
    int k = -1;
    for (int j = 0; j < L && k < 0; ++j) {
      const double d = wrap(theta_in - cone.offsets[std::size_t(j)], period);
      if (d > kAngleTol && d <= s.corner_angle(cone.corners[std::size_t(j)]) + kAngleTol) k = j;
    }
    if (k < 0) throw GeometryError("chain junction angle outside every corner");
    Corner c = cone.corners[std::size_t(k)];
    double walked = wrap(theta_in - cone.offsets[std::size_t(k)], period);
    while (walked < left - kAngleTol) {
      out.edges.push_back(s.outgoing_edge(c));
      c = s.previous_corner(c);
      walked += s.corner_angle(c);
    }
    if (!(c == next.start_corner)) throw GeometryError("chain junction does not reach the next saddle connection");
  }
  return out;
}

void validate(const MixedStructure& mix) {
  for (const auto& w : mix.multicurve) {
    if (!(w.weight > 0.0) || !std::isfinite(w.weight)) throw GeometryError("multicurve weights must be positive");
    if (w.p == 0 && w.q == 0) throw GeometryError("multicurve class (0, 0) is trivial");
  }
  for (std::size_t i = 0; i < mix.multicurve.size(); ++i)
    for (std::size_t j = i + 1; j < mix.multicurve.size(); ++j) {
      const auto& a = mix.multicurve[i];
      const auto& b = mix.multicurve[j];
      if (std::int64_t(a.p) * b.q - std::int64_t(a.q) * b.p != 0)
        throw GeometryError("multicurve components intersect");
    }
}

double mixed_length(const MixedStructure& mix, const MixedCurve& curve, const GeodesicLengthOptions& opts) {
  validate(mix);
  double total = 0.0;
  for (const auto& part : curve.flat) {
    if (part.piece < 0 || part.piece >= int(mix.pieces.size()))
      throw GeometryError("curve component lies on an undeclared piece");
    total += geodesic_length(mix.pieces[std::size_t(part.piece)], part.curve, opts).length;
  }
  if (curve.complement) {
    if (mix.multicurve.empty()) throw GeometryError("curve crosses into an undeclared multicurve region");
    for (const auto& w : mix.multicurve)
      total += w.weight * double(std::llabs(std::int64_t(w.p) * curve.complement->q -
                                            std::int64_t(w.q) * curve.complement->p));
  }
  return total;
}

}  // namespace hitchin
