#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hitchin/background.hpp"
#include "hitchin/error.hpp"
#include "hitchin/quartic.hpp"

using namespace hitchin;

namespace {

double max_abs_interior(const Lattice& lat, const ScalarField& f, double shift = 0.0) {
  double m = 0.0;
  for (std::size_t k = 0; k < lat.size(); ++k)
    if (lat.carries_equation(k)) m = std::max(m, std::abs(f[k] + shift));
  return m;
}

// Independent Poincare factor.
double poincare(double x, double y) {
  const double d = 1.0 - x * x - y * y;
  return 2.0 / (d * d);
}

}  // namespace

TEST_CASE("torus background") {
  auto bg = build_torus_background(1, 1, 64, 1);
  for (std::size_t k = 0; k < bg.lattice().size(); ++k) REQUIRE(bg.kappa()[k] == 0.0);
  CHECK(bg.flat());

  auto bg2 = build_torus_background(1, 1, 32, 2);
  ScalarField two_sigma(bg2.lattice());
  for (std::size_t k = 0; k < two_sigma.size(); ++k) two_sigma[k] = 2.0 * bg2.sigma()[k];
  CHECK(area_of(two_sigma, bg2.lattice()) == doctest::Approx(4.0).epsilon(1e-14));

  CHECK_THROWS_WITH_AS(build_torus_background(1, 1, 4, 1), doctest::Contains("resolution too small"), DomainError);
  CHECK_THROWS_AS(build_torus_background(-1, 1, 16, 1), DomainError);
  CHECK_THROWS_AS(build_torus_background(1, 1, 16, 0), DomainError);
}

TEST_CASE("disk background") {
  auto bg = build_disk_background(0.5, 128);
  CHECK(max_abs_interior(bg.lattice(), bg.kappa(), 2.0) <= 1e-3);
  CHECK(bg.hyperbolic());

  auto odd = build_disk_background(0.5, 129);
  const auto c = odd.lattice().index(64, 64);
  CHECK(std::abs(odd.lattice().z(c)) < 1e-15);
  CHECK(odd.sigma()[c] == 2.0);

  CHECK_THROWS_AS(build_disk_background(0.95, 128), DomainError);
  CHECK_THROWS_AS(build_disk_background(0.5, 8), DomainError);

  // Roles: boundary nodes touch the outside, interior nodes do not.
  const auto& lat = bg.lattice();
  int boundary = 0;
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (lat.role(k) == NodeRole::boundary) {
      ++boundary;
      CHECK(std::isfinite(bg.kappa()[k]));
    }
    if (lat.role(k) == NodeRole::interior)
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) CHECK(lat.neighbor(k, di, dj) >= 0);
  }
  CHECK(boundary > 0);
}

TEST_CASE("stored kappa equals curvature_conformal bit for bit") {
  const auto disk = build_disk_background(0.7, 64);
  for (std::size_t k = 0; k < disk.lattice().size(); ++k)
    if (disk.lattice().active(k)) REQUIRE(disk.kappa()[k] == -2.0);
  CHECK(disk.hyperbolic());
  CHECK(disk.kappa_min() == disk.kappa_max());
  const ConformalBackground sampled(disk.lattice(), disk.sigma());
  for (const auto& bg : {sampled, build_torus_background(2, 1, 16, 3)}) {
    const ScalarField k2 = curvature_conformal(bg.sigma(), bg.lattice());
    for (std::size_t k = 0; k < bg.lattice().size(); ++k)
      if (bg.lattice().carries_equation(k)) REQUIRE(k2[k] == bg.kappa()[k]);
  }
}

TEST_CASE("curvature_conformal examples") {
  auto lat = Lattice::disk(0.9, 65);
  ScalarField cst(lat, 3.0), ex(lat, 1.0), bad(lat, 1.0);
  for (std::size_t k = 0; k < lat.size(); ++k) ex[k] = std::exp(lat.z(k).real());
  CHECK(max_abs_interior(lat, curvature_conformal(cst, lat)) == 0.0);
  CHECK(max_abs_interior(lat, curvature_conformal(ex, lat)) <= 1e-9);
  bad[lat.index(32, 32)] = 0.0;
  CHECK_THROWS_AS(curvature_conformal(bad, lat), DomainError);

  // Poincare factor sampled independently.
  auto pk = [](const Lattice& l) {
    ScalarField p(l, 1.0);
    for (std::size_t k = 0; k < l.size(); ++k)
      if (l.active(k)) p[k] = poincare(l.z(k).real(), l.z(k).imag());
    return max_abs_interior(l, curvature_conformal(p, l), 2.0);
  };
  CHECK(pk(Lattice::disk(0.5, 128)) <= 1e-3);
  const double e65 = pk(lat), e129 = pk(Lattice::disk(0.9, 129));
  CHECK(e65 / e129 > 4.0);
}

TEST_CASE("discrete dbar-d of harmonic functions converges at order 2") {
  auto err = [](int n, auto f) {
    auto lat = Lattice::disk(0.9, n);
    ScalarField v(lat, 0.0);
    for (std::size_t k = 0; k < lat.size(); ++k) v[k] = f(lat.z(k).real(), lat.z(k).imag());
    double e = 0.0;
    for (std::size_t k = 0; k < lat.size(); ++k)
      if (lat.carries_equation(k)) e = std::max(e, std::abs(0.25 * laplacian5(lat, v, k)));
    return e;
  };
  CHECK(err(65, [](double x, double) { return x; }) <= 1e-9);
  CHECK(err(65, [](double x, double y) { return x * x - y * y; }) <= 1e-9);
  CHECK(err(65, [](double x, double y) { return x * y; }) <= 1e-9);
  auto g = [](double x, double y) { return std::exp(2 * x) * std::sin(2 * y); };
  const double e1 = err(33, g), e2 = err(65, g), e3 = err(129, g);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("qnorm_sq examples") {
  auto torus = build_torus_background(1, 1, 16, 1);
  auto q16 = QuarticInput::constant(16.0, torus.lattice());
  const ScalarField f = qnorm_sq(torus, q16);
  for (std::size_t k = 0; k < f.size(); ++k) REQUIRE(f[k] == 256.0);

  auto disk = build_disk_background(0.5, 17);
  const auto& lat = disk.lattice();
  auto z4 = QuarticInput::polynomial({0, 0, 0, 0, 1}, lat);
  CHECK(qnorm_sq(disk, z4)[lat.index(8, 8)] == 0.0);
  CHECK(z4.vanishes_somewhere());

  // q = z at z = 1/2: sigma(1/2) = 2/(3/4)^2 = 32/9.
  auto zq = QuarticInput::polynomial({0, 1}, lat);
  const auto k = lat.index(16, 8);
  REQUIRE(lat.z(k) == std::complex<double>(0.5, 0.0));
  const double sigma = 32.0 / 9.0;
  CHECK(qnorm_sq(disk, zq)[k] == doctest::Approx(0.25 / std::pow(sigma, 4)).epsilon(1e-14));
  CHECK(std::abs(qnorm_sq(disk, zq)[k] - 1.5643e-3) <= 0.5e-7);
}

TEST_CASE("qnorm_sq is phase invariant") {
  auto disk = build_disk_background(0.8, 33);
  auto q = QuarticInput::polynomial({1.0, {0.5, -0.25}, 0, {0, 2}}, disk.lattice());
  const ScalarField base = qnorm_sq(disk, q);
  for (double th : {std::numbers::pi / 7, std::numbers::pi / 2, 2.0, -5.0}) {
    auto r = q.rotated(th);
    CHECK(qnorm_sq(disk, r) == base);
    const auto k = disk.lattice().index(20, 12);
    CHECK(std::abs(r.value(k) - std::polar(1.0, th) * q.value(k)) < 1e-14);
  }
}

TEST_CASE("quartic zeros and holomorphic flag") {
  auto lat = Lattice::disk(0.9, 33);
  auto q = QuarticInput::polynomial({-1, 0, 0, 0, 1}, lat);
  auto zs = q.zeros();
  REQUIRE(zs.size() == 4);
  for (auto z : zs) CHECK(std::abs(std::pow(z, 4) - 1.0) < 1e-12);
  CHECK(QuarticInput::polynomial({0, 0, 0, 0, 3}, lat).zeros() == std::vector<std::complex<double>>(4, 0.0));
  CHECK(QuarticInput::constant(2.0, lat).zeros().empty());

  std::vector<std::complex<double>> hol(lat.size()), anti(lat.size());
  for (std::size_t k = 0; k < lat.size(); ++k) {
    hol[k] = lat.z(k) * lat.z(k) + 1.0;
    anti[k] = std::conj(lat.z(k)) + 1.0;
  }
  CHECK(QuarticInput::sampled(hol, lat).holomorphic());
  CHECK_FALSE(QuarticInput::sampled(anti, lat).holomorphic());
  CHECK(QuarticInput::polynomial({0, 1}, lat).holomorphic());
}

TEST_CASE("area_of") {
  auto t = Lattice::torus(1, 1, 32);
  CHECK(area_of(ScalarField(t, 16.0), t) == doctest::Approx(16.0).epsilon(1e-14));
  RegionMask half(t.size(), 0);
  for (std::size_t k = 0; k < t.size(); ++k) half[k] = t.column(k) < 16;
  CHECK(area_of(ScalarField(t, 2.0), t, half) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(area_of(ScalarField(t, 2.0), t, RegionMask(t.size(), 0)), DomainError);

  auto disk = build_disk_background(0.5, 128);
  ScalarField g(disk.lattice(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = 4.0 * disk.sigma()[k];
  const double r = 0.5;
  const double exact = 8.0 * std::numbers::pi * r * r / (1 - r * r);
  CHECK(std::abs(area_of(g, disk.lattice()) / exact - 1.0) <= 0.01);
}
