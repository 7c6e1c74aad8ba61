#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "hitchin/error.hpp"
#include "hitchin/geodesic.hpp"
#include "hitchin/saddle.hpp"

using namespace hitchin;

namespace {

constexpr double kPi = std::numbers::pi;

// Primitive integer vectors with |v| <= L, one of each +-v pair.
std::vector<std::pair<int, int>> primitive_unoriented(double L) {
  std::vector<std::pair<int, int>> out;
  const int R = int(std::floor(L));
  for (int a = 0; a <= R; ++a)
    for (int b = -R; b <= R; ++b) {
      if (a == 0 && b <= 0) continue;
      if (std::gcd(a, b) != 1) continue;
      if (std::hypot(a, b) <= L + 1e-12) out.emplace_back(a, b);
    }
  return out;
}

// Straight-line flow from a corner along direction u, for `len`; returns the distance at
// which the ray first meets a vertex (infinity if none before len).
double first_vertex_hit(const FlatSurface& s, Corner start, Point u, double len) {
  int poly = start.polygon;
  Point x = s.polygon(poly)[std::size_t(start.vertex)];
  double travelled = 0.0;
  int skip_vertex = start.vertex;
  for (int guard = 0; guard < 100000; ++guard) {
    const auto& P = s.polygon(poly);
    const int n = int(P.size());
    // vertex on the ray inside this polygon
    for (int j = 0; j < n; ++j) {
      if (j == skip_vertex) continue;
      const Point d = P[std::size_t(j)] - x;
      const double t = d.real() * u.real() + d.imag() * u.imag();
      const double off = d.real() * u.imag() - d.imag() * u.real();
      if (t > 1e-12 && std::abs(off) < 1e-9) return travelled + t;
    }
    double best = INFINITY;
    int exit = -1;
    for (int j = 0; j < n; ++j) {
      const Point a = P[std::size_t(j)], e = P[std::size_t((j + 1) % n)] - a;
      const double den = u.real() * e.imag() - u.imag() * e.real();
      if (den <= 1e-15) continue;
      const Point w = a - x;
      const double t = (w.real() * e.imag() - w.imag() * e.real()) / den;
      if (t > 1e-12 && t < best) {
        best = t;
        exit = j;
      }
    }
    if (exit < 0 || travelled + best > len + 1e-9) return INFINITY;
    const int e = s.edge_id(poly, exit);
    const Isometry back = s.gluing(e).inverse();
    x = back(x + best * u);
    u = back.rot * u;
    travelled += best;
    poly = s.edge_polygon(s.partner(e));
    skip_vertex = -1;
  }
  return INFINITY;
}

FlatSurface pillowcase() {
  // two squares side by side; the outer sides fold by half turns
  const std::vector<Point> a = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<Point> b = {{1, 0}, {2, 0}, {2, 1}, {1, 1}};
  return FlatSurface::build({a, b}, {{1, 7, 0}, {3, 5, 0}, {0, 4, 2}, {2, 6, 2}}, true);
}

}  // namespace

TEST_CASE("octagon and square torus invariants") {
  const auto o = FlatSurface::octagon();
  CHECK(o.genus() == 2);
  REQUIRE(o.cone_points().size() == 1);
  CHECK(o.cone_points()[0].k == 8);
  CHECK(o.cone_points()[0].angle == doctest::Approx(6 * kPi).epsilon(1e-14));
  CHECK(std::abs(o.area() - 2 * (1 + std::sqrt(2.0))) <= 1e-9);
  int ksum = 0;
  for (const auto& c : o.cone_points()) ksum += c.k;
  CHECK(ksum == 4 * (2 * o.genus() - 2));

  const auto t = FlatSurface::square_torus();
  CHECK(t.genus() == 1);
  CHECK(t.singular_count() == 0);
  CHECK(t.area() == 1.0);
  const auto t3 = FlatSurface::square_torus(3);
  CHECK(t3.genus() == 1);
  CHECK(t3.cone_points().size() == 9);
  CHECK(t3.area() == 9.0);

  const auto u = o.unit_area();
  CHECK(u.area() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kPi / 2 * u.area() == doctest::Approx(kPi / 2).epsilon(1e-14));
}

TEST_CASE("surface validation errors") {
  const std::vector<Point> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK_THROWS_AS(FlatSurface::build({sq}, {{0, 2, 0}}), GeometryError);  // unmatched
  const std::vector<Point> rect = {{0, 0}, {1, 0}, {1, 1.5}, {0, 1.5}};
  CHECK_THROWS_AS(FlatSurface::build({rect}, {{0, 1, 1}, {2, 3, 1}}), GeometryError);  // length mismatch
  // a pi/3 turn between paired sides
  const double c = std::cos(kPi / 3), s = std::sin(kPi / 3);
  const std::vector<Point> rhomb = {{0, 0}, {1, 0}, {1 + c, s}, {c, s}};
  CHECK_THROWS_AS(FlatSurface::build({rhomb}, {{0, 1, 0}, {2, 3, 0}}), GeometryError);
  // quarter-turn folding of a square: cone angles below 2 pi
  CHECK_THROWS_AS(FlatSurface::build({sq}, {{0, 3, 1}, {1, 2, 1}}), GeometryError);
  CHECK_THROWS_AS(FlatSurface::build({sq}, {{0, 2, 1}, {1, 3, 0}}), GeometryError);  // wrong stated k
  CHECK_THROWS_AS(FlatSurface::build({{{0, 0}, {1, 0}, {1, 1}, {2, 1}}}, {}), GeometryError);  // not convex
  CHECK_THROWS_AS(FlatSurface::octagon().scaled(-1.0), GeometryError);
}

TEST_CASE("punctured pieces") {
  const auto p = pillowcase();
  CHECK(p.genus() == 0);
  CHECK(p.has_punctures());
  int ksum = 0;
  for (const auto& c : p.cone_points()) {
    CHECK(c.k == -2);
    ksum += c.k;
  }
  CHECK(ksum == -8);
  CHECK_THROWS_AS(FlatSurface::build({p.polygon(0), p.polygon(1)}, p.pairings()), GeometryError);

  const auto g = geodesic_length(p, Corridor{{1, 5}});
  CHECK(g.length == doctest::Approx(2.0).epsilon(1e-14));
  GeodesicLengthOptions near;
  near.puncture_radius = 0.3;
  CHECK(geodesic_length(p, Corridor{{1, 5}}, near).length == doctest::Approx(2.0));
  near.puncture_radius = 0.6;
  CHECK_THROWS_AS(geodesic_length(p, Corridor{{1, 5}}, near), GeometryError);
}

TEST_CASE("saddle connections on the square torus match the lattice") {
  const auto t = FlatSurface::square_torus();
  const auto rep = systole_and_saddles(t, 1.5);
  REQUIRE(rep.saddles.size() == 4);
  std::set<std::pair<long, long>> got;
  std::vector<double> lengths;
  for (const auto& sc : rep.saddles) {
    Point v = sc.vector;
    if (v.real() < -0.5 || (std::abs(v.real()) < 0.5 && v.imag() < 0)) v = -v;
    got.insert({std::lround(v.real()), std::lround(v.imag())});
    lengths.push_back(sc.length);
  }
  CHECK(got == std::set<std::pair<long, long>>{{1, 0}, {0, 1}, {1, 1}, {1, -1}});
  CHECK(lengths[0] == 1.0);
  CHECK(lengths[1] == 1.0);
  CHECK(lengths[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(lengths[3] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  REQUIRE(rep.systole);
  CHECK(*rep.systole == 1.0);

  for (double L : {3.0, 7.5, 12.0}) {
    const auto oracle = primitive_unoriented(L);
    CHECK(saddle_connections(t, L).size() == 2 * oracle.size());
    // every grid point is a marked vertex on the 2 x 2 torus
    CHECK(saddle_connections(FlatSurface::square_torus(2), L).size() == 4 * 2 * oracle.size());
  }
}

TEST_CASE("octagon saddle connections: flow check and rotational symmetry") {
  const auto o = FlatSurface::octagon();
  const auto S = saddle_connections(o, 4.0);
  REQUIRE(!S.empty());
  for (const auto& sc : S) {
    const double hit = first_vertex_hit(o, sc.start_corner, sc.vector / sc.length, sc.length);
    CHECK(hit == doctest::Approx(sc.length).epsilon(1e-9));
    REQUIRE(sc.reverse >= 0);
    CHECK(S[std::size_t(sc.reverse)].reverse == sc.id);
    CHECK(std::abs(S[std::size_t(sc.reverse)].vector + sc.vector) < 1e-9);
  }
  // The rotation by pi/4 is an isometry of the surface: the holonomy set is invariant.
  auto key = [](Point v) { return std::make_pair(std::lround(v.real() * 1e6), std::lround(v.imag() * 1e6)); };
  std::multiset<std::pair<long, long>> base, turned;
  const Point w = std::polar(1.0, kPi / 4);
  for (const auto& sc : S) {
    base.insert(key(sc.vector));
    turned.insert(key(w * sc.vector));
  }
  CHECK(base == turned);

  const auto rep = systole_and_saddles(o, 1.1);
  REQUIRE(rep.systole);
  CHECK(std::abs(*rep.systole - 1.0) <= 1e-12);
  CHECK(rep.closed.size() == 4);
  const auto rep2 = systole_and_saddles(o.scaled(2.0), 2.2);
  REQUIRE(rep2.systole);
  CHECK(*rep2.systole == 2.0 * *rep.systole);

  GeodesicOptions tight;
  tight.saddle.budget = 100;
  CHECK_THROWS_AS(saddle_connections(o, 6.0, tight.saddle), BudgetExceeded);
  tight.saddle.budget = 20'000'000;
  tight.budget = 100;
  CHECK_THROWS_AS(closed_geodesics(o, 6.0, tight), BudgetExceeded);
  CHECK_THROWS_AS(saddle_connections(o, 0.0), GeometryError);
}

TEST_CASE("geodesic length examples") {
  const auto t = FlatSurface::square_torus();
  CHECK(geodesic_length(t, TorusClass{1, 0}).length == 1.0);
  CHECK(geodesic_length(t, TorusClass{3, 4}).length == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(geodesic_length(t, Corridor{{1, 1, 1, 2, 2, 2, 2}}).length == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(geodesic_length(t, Corridor{{2, 1, 2, 2, 1, 2, 1}}).length == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(geodesic_length(FlatSurface::square_torus(3), TorusClass{1, 1}).length ==
        doctest::Approx(3 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(geodesic_length(t, TorusClass{0, 0}), GeometryError);
  CHECK_THROWS_AS(geodesic_length(t, Corridor{{1, 3}}), GeometryError);  // backtrack only
  CHECK_THROWS_AS(geodesic_length(t, Corridor{{}}), GeometryError);

  const auto o = FlatSurface::octagon();
  const auto side = geodesic_length(o, Corridor{{1, 6, 3}});
  CHECK(side.length == doctest::Approx(1.0).epsilon(1e-14));
  // the same class pushed across the cone point
  const auto search = closed_geodesics(o, 1.1);
  for (const auto& g : search.closed)
    CHECK(geodesic_length(o, chain_corridor(o, search, g)).length == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(geodesic_length(FlatSurface::square_torus(2), Corridor{{1}}), GeometryError);  // not closed
  CHECK_THROWS_AS(geodesic_length(t, Corridor{{0, 0, 3, 2, 2, 1}}), GeometryError);  // contractible
  GeodesicLengthOptions capped;
  capped.max_moves = 0;
  CHECK_THROWS_AS(geodesic_length(t, Corridor{{0, 0, 0, 1, 1}}, capped), BudgetExceeded);
  const auto moved = geodesic_length(t, Corridor{{0, 0, 0, 1, 1}});
  CHECK(moved.moves >= 1);
  CHECK(moved.length == doctest::Approx(std::sqrt(13.0)).epsilon(1e-14));
  CHECK(geodesic_length(t, Corridor{{1, 2, 3, 0, 1}}).length == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("corridor re-expression leaves the length unchanged") {
  std::mt19937 rng(11);
  for (int n : {1, 2}) {
    const auto t = FlatSurface::square_torus(n);
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 60; ++trial) {
      std::vector<int> c;
      int p = 0;
      const int len = 1 + int(rng() % 14);
      for (int i = 0; i < len; ++i) {
        const int e = t.edge_id(p, int(rng() % 4));
        c.push_back(e);
        p = t.edge_polygon(t.partner(e));
      }
      if (p != 0) continue;
      Isometry H;
      for (int e : c) H = H.compose(t.gluing(e));
      if (std::abs(H.shift) < 0.5) continue;
      ++checked;
      CHECK(geodesic_length(t, Corridor{c}).length == doctest::Approx(std::abs(H.shift)).epsilon(1e-13));
    }
    CHECK(checked >= 30);
  }
}

TEST_CASE("corridor geodesics agree with saddle-connection chains") {
  const auto o = FlatSurface::octagon();
  const auto search = closed_geodesics(o, 3.0);
  REQUIRE(search.closed.size() > 50);
  const auto o2 = o.scaled(2.0);
  const auto search2 = closed_geodesics(o2, 6.0);
  REQUIRE(search2.closed.size() == search.closed.size());
  for (std::size_t i = 0; i < search.closed.size(); ++i) {
    const auto& g = search.closed[i];
    const double len = geodesic_length(o, chain_corridor(o, search, g)).length;
    CHECK(std::abs(len - g.length) <= 1e-12);
    CHECK(geodesic_length(o2, chain_corridor(o2, search2, search2.closed[i])).length == 2.0 * len);
    CHECK(search2.closed[i].length == 2.0 * g.length);
  }
}

TEST_CASE("mixed structures") {
  const auto t = FlatSurface::square_torus();
  MixedStructure single{{FlatSurface::octagon()}, {}};
  MixedCurve on_piece{{{0, Corridor{{1, 6, 3}}}}, std::nullopt};
  CHECK(mixed_length(single, on_piece) == geodesic_length(single.pieces[0], Corridor{{1, 6, 3}}).length);

  MixedStructure weighted{{}, {{1, 0, 2.0}}};
  CHECK(mixed_length(weighted, MixedCurve{{}, TorusClass{0, 1}}) == 2.0);
  CHECK(mixed_length(weighted, MixedCurve{{}, TorusClass{1, 0}}) == 0.0);
  CHECK(mixed_length(weighted, MixedCurve{{}, TorusClass{3, 5}}) == 10.0);

  MixedStructure both{{t}, {{1, 0, 2.0}}};
  CHECK(mixed_length(both, MixedCurve{{{0, TorusClass{3, 4}}}, std::nullopt}) ==
        doctest::Approx(5.0).epsilon(1e-15));
  CHECK(mixed_length(both, MixedCurve{{{0, TorusClass{3, 4}}}, TorusClass{0, 1}}) ==
        doctest::Approx(7.0).epsilon(1e-15));

  CHECK_THROWS_AS(mixed_length(single, MixedCurve{{{1, TorusClass{1, 0}}}, std::nullopt}), GeometryError);
  CHECK_THROWS_AS(mixed_length(single, MixedCurve{{}, TorusClass{1, 0}}), GeometryError);
  CHECK_THROWS_AS(validate(MixedStructure{{}, {{1, 0, 1.0}, {0, 1, 1.0}}}), GeometryError);
  CHECK_THROWS_AS(validate(MixedStructure{{}, {{1, 0, -1.0}}}), GeometryError);
  CHECK_NOTHROW(validate(MixedStructure{{}, {{1, 0, 1.0}, {1, 0, 3.0}}}));
}

TEST_CASE("octagon saddle connections are complete") {
  // Candidates: every vertex of every translated copy reachable by up to 9 edge crossings;
  // each candidate direction is traced independently.
  const auto o = FlatSurface::octagon();
  const double L = 6.0;
  const auto& P = o.polygon(0);
  const int n = int(P.size());
  std::map<std::pair<long, long>, Point> copies{{{0, 0}, 0.0}};
  std::vector<Point> frontier{0.0};
  for (int depth = 0; depth < 9; ++depth) {
    std::vector<Point> next;
    for (Point t : frontier)
      for (int e = 0; e < n; ++e) {
        const Point u = t + o.gluing(o.edge_id(0, e)).shift;
        if (std::abs(u) > L + 2.7) continue;
        const auto k = std::make_pair(std::lround(u.real() * 1e7), std::lround(u.imag() * 1e7));
        if (copies.emplace(k, u).second) next.push_back(u);
      }
    frontier = next;
  }
  std::set<std::pair<int, long>> found;
  std::multiset<long> lengths;
  for (int c = 0; c < n; ++c) {
    const Point vc = P[std::size_t(c)], out = P[std::size_t((c + 1) % n)] - vc;
    const double sector = o.corner_angle({0, c});
    for (const auto& [key, t] : copies)
      for (int j = 0; j < n; ++j) {
        const Point p = P[std::size_t(j)] + t - vc;
        const double d = std::abs(p);
        if (d < 1e-9 || d > L + 1e-9) continue;
        double a = std::arg(p / out);
        if (a < -1e-12) a += 2 * kPi;
        if (a >= sector - 1e-12) continue;
        const double hit = first_vertex_hit(o, {0, c}, p / d, L);
        if (hit <= L + 1e-9 && found.emplace(c, std::lround(std::max(a, 0.0) * 1e8)).second)
          lengths.insert(std::lround(hit * 1e6));
      }
  }
  const auto S = saddle_connections(o, L);
  CHECK(S.size() == found.size());
  std::multiset<long> mine;
  for (const auto& sc : S) mine.insert(std::lround(sc.length * 1e6));
  CHECK(mine == lengths);
}
