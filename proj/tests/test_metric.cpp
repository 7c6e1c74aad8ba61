#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hitchin/bessel.hpp"
#include "hitchin/error.hpp"
#include "hitchin/metric.hpp"

using namespace hitchin;

namespace {

// I_0(x) = (1/pi) int_0^pi e^{x cos t} dt, composite Simpson; scaled by e^{-x}.
double i0_scaled_quadrature(double x) {
  const int n = 20000;
  const double h = std::numbers::pi / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(x * (std::cos(i * h) - 1.0));
  }
  return s * h / 3.0 / std::numbers::pi;
}

SolutionPair constant_pair(const Lattice& lat, double a, double b) {
  SolutionPair p;
  p.psi1 = ScalarField(lat, a);
  p.psi2 = ScalarField(lat, b);
  return p;
}

}  // namespace

TEST_CASE("induced metric on the torus with q = 16") {
  auto torus = build_torus_background(1, 1, 32, 1);
  auto q = QuarticInput::constant(16.0, torus.lattice());
  auto pair = constant_pair(torus.lattice(), 3 * std::log(2.0), std::log(2.0));
  auto m = induced_metric(pair, torus, q);
  for (std::size_t k = 0; k < m.g.size(); ++k) {
    REQUIRE(m.g[k] == doctest::Approx(16.0).epsilon(1e-14));
    REQUIRE(m.f1[k] == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(m.f2[k] == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(std::abs(m.kappa_g[k]) <= 1e-14);
    REQUIRE(std::abs(m.kappa_g_discrete[k]) <= 1e-12);
  }
  auto u = flat_error(pair, torus, q);
  for (std::size_t k = 0; k < u.size(); ++k) REQUIRE(std::abs(u[k]) <= 1e-14);

  auto r = bound_report(pair, torus, q);
  CHECK(std::abs(r.min_3psi2_minus_psi1) <= 1e-14);
  CHECK(r.min_g_over_flat.has_value());
  CHECK(*r.min_g_over_flat == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(r.min_g_over_const.has_value());
  REQUIRE(r.regions.size() == 1);
  CHECK(r.regions[0].area_g == doctest::Approx(16.0));
  CHECK(r.regions[0].upper_bound == doctest::Approx(24.0));
  CHECK(r.regions[0].area_g <= r.regions[0].upper_bound);
}

TEST_CASE("induced metric for q = 0 on the Poincare disk") {
  auto disk = build_disk_background(0.5, 65);
  auto q = QuarticInput::constant(0.0, disk.lattice());
  auto sol = solve_hitchin(disk, q);
  auto m = induced_metric(sol, disk, q);
  const Lattice& lat = disk.lattice();
  double e_kg = 0, e_disc = 0, e_f2 = 0;
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.carries_equation(k)) continue;
    REQUIRE(m.f1[k] == 0.0);
    e_f2 = std::max(e_f2, std::abs(m.f2[k] - 4.0 / 3.0));
    e_kg = std::max(e_kg, std::abs(m.kappa_g[k] + 1.0 / 3.0));
    e_disc = std::max(e_disc, std::abs(m.kappa_g_discrete[k] + 1.0 / 3.0));
    REQUIRE(m.g[k] == doctest::Approx(6.0 * disk.sigma()[k]).epsilon(1e-9));
  }
  CHECK(e_f2 <= 1e-9);
  CHECK(e_kg <= 1e-9);
  CHECK(e_disc <= 2e-3);

  auto r = bound_report(sol, disk, q);
  CHECK(r.min_3psi2_minus_psi1 == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-9));
  CHECK(std::log(4.0 / 3.0) == doctest::Approx(0.287682).epsilon(1e-6));
  CHECK_FALSE(r.min_g_over_flat.has_value());
  REQUIRE(r.min_g_over_const.has_value());
  CHECK(*r.min_g_over_const == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bounds for q = z^4 on the disk") {
  auto disk = build_disk_background(0.9, 97);
  auto q = QuarticInput::polynomial({0, 0, 0, 0, 1}, disk.lattice());
  auto sol = solve_hitchin(disk, q);
  const Lattice& lat = disk.lattice();
  RegionMask inner(lat.size(), 0);
  for (std::size_t k = 0; k < lat.size(); ++k) inner[k] = lat.active(k) && std::abs(lat.z(k)) < 0.5;
  auto r = bound_report(sol, disk, q, {{"inner", inner, 1.0}, {"all", active_mask(lat), 1.0}});
  CHECK(r.min_3psi2_minus_psi1 >= -1e-6);
  CHECK(r.max_3psi2_minus_psi1 <= std::log(4.0 / 3.0) + 1e-6);
  REQUIRE(r.min_g_over_flat.has_value());
  CHECK(*r.min_g_over_flat >= 1 - 1e-6);
  REQUIRE(r.min_g_over_const.has_value());
  CHECK(*r.min_g_over_const >= 1 - 1e-6);
  CHECK(r.max_kappa_g < 0.0);
  CHECK(r.max_f1_plus_f2 < 2.0);
  REQUIRE(r.regions.size() == 2);
  for (const auto& a : r.regions) CHECK(a.ratio >= 1.0);
  CHECK(r.regions[0].area_g < r.regions[1].area_g);
}

TEST_CASE("two curvature routes agree to second order") {
  auto err = [](int n) {
    auto disk = build_disk_background(0.9, n);
    auto q = QuarticInput::polynomial({1, 0, 0, 0, 1}, disk.lattice());
    auto sol = solve_hitchin(disk, q);
    auto m = induced_metric(sol, disk, q);
    double e = 0;
    for (std::size_t k = 0; k < disk.lattice().size(); ++k)
      if (disk.lattice().carries_equation(k) && std::abs(disk.lattice().z(k)) <= 0.5)
        e = std::max(e, std::abs(m.kappa_g[k] - m.kappa_g_discrete[k]));
    return e;
  };
  const double e1 = err(49), e2 = err(97);
  CHECK(e2 < 2e-3);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("Bessel I0") {
  CHECK(bessel_i0_series(0.0) == 1.0);
  CHECK(bessel_i0_series(1.0) == doctest::Approx(1.2660658777520082).epsilon(1e-15));
  for (double x : {0.5, 3.0, 8.4853, 20.0, 29.0})
    CHECK(bessel_i0_series(x) * std::exp(-x) == doctest::Approx(i0_scaled_quadrature(x)).epsilon(1e-12));
  for (double x : {30.0, 45.0, 80.0, 700.0})
    CHECK(bessel_i0_scaled(x) == doctest::Approx(i0_scaled_quadrature(x)).epsilon(1e-10));

  const double s = bessel_i0_series(30.0), a = bessel_i0_asymptotic(30.0);
  CHECK(std::abs(s - a) / s <= 1e-8);
  // A single correction term is not enough at x = 30.
  CHECK(std::abs(s - bessel_i0_asymptotic(30.0, 1)) / s > 1e-5);
  CHECK(bessel_i0(30.0) == doctest::Approx(s).epsilon(1e-8));

  const double arg = 2.0 * std::sqrt(2.0) * 3.0;
  CHECK(arg == doctest::Approx(8.4853).epsilon(1e-5));
  const double eta0 = bessel_barrier(1.0, 1.0, 3.0, 0.0);
  CHECK(eta0 == doctest::Approx(1.0 / (std::exp(arg) * i0_scaled_quadrature(arg))).epsilon(1e-10));
  // 1.5e-3 to two significant digits
  CHECK(std::abs(eta0 - 1.5e-3) <= 0.05e-3);
  CHECK(bessel_barrier(2.0, 1.0, 3.0, 3.0) == doctest::Approx(2.0));
  CHECK(bessel_barrier(1.0, 1e-4, 0.5, 0.25) < 1.0);
  CHECK_THROWS_AS(bessel_barrier(1.0, 1.0, 3.0, 3.5), DomainError);
  CHECK(bessel_i0_series(-2.5) == bessel_i0_series(2.5));
}

TEST_CASE("flat lengths and sampling") {
  auto lat = Lattice::disk(0.9, 65);
  auto q = QuarticInput::polynomial({0, 0, 0, 0, 16.0}, lat);
  // |q|^{1/4} = 2 r along a ray: length r^2.
  CHECK(flat_segment_length(q, 0.0, {0.6, 0.0}) == doctest::Approx(0.36).epsilon(1e-10));
  CHECK(flat_distance_to_zeros(q, {0.0, 0.7}) == doctest::Approx(0.49).epsilon(1e-10));
  CHECK(std::isinf(flat_distance_to_zeros(QuarticInput::constant(1.0, lat), 0.3)));

  ScalarField lin(lat, 0.0);
  for (std::size_t k = 0; k < lat.size(); ++k) lin[k] = 2 * lat.z(k).real() - lat.z(k).imag();
  CHECK(sample_bilinear(lat, lin, {0.123, -0.2}) == doctest::Approx(2 * 0.123 + 0.2).epsilon(1e-12));
  CHECK(sample_bilinear(lat, lin, lat.z(lat.index(32, 32))) == lin[lat.index(32, 32)]);
  CHECK_THROWS_AS(sample_bilinear(lat, lin, {0.89, 0.89}), DomainError);

  auto far = far_from_zeros_mask(lat, q, 0.15);
  // Distance r^2 >= 0.3 * 0.9^2 (largest distance near the rim).
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    const double d = std::norm(lat.z(k));
    if (d > 0.3 * 0.81 * 1.02) REQUIRE(far[k]);
    if (d < 0.3 * 0.81 * 0.9) REQUIRE_FALSE(far[k]);
  }
}

TEST_CASE("decay of u scales with the square root of the mass") {
  auto d = decay_scaling(129, 1e5, {1, 4, 16});
  REQUIRE(d.profiles.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& p = d.profiles[i];
    CHECK(p.flat_distance.front() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p.flat_distance.back() == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(p.fit_points >= 5);
    CHECK(p.rate > 0.0);
    CHECK(p.center_value > 0.0);
    CHECK(p.center_value <= p.oracle_center);
    CHECK(d.expected_ratio[i] == doctest::Approx(std::sqrt(d.mass_factors[i])).epsilon(0.01));
    CHECK(std::abs(d.rate_ratio[i] / d.expected_ratio[i] - 1.0) <= 0.2);
    // u decreases along the inner half of the ray.
    for (std::size_t j = 1; j < p.u.size() / 2; ++j) CHECK(p.u[j] < p.u[j - 1]);
  }
  CHECK_THROWS_AS(decay_scaling(129, 1e2, {1}), DomainError);
}

TEST_CASE("decay_compare rejects bad input") {
  auto disk = build_disk_background(0.9, 49);
  auto q = QuarticInput::polynomial({0, 0, 0, 0, 1e3}, disk.lattice());
  SolverOptions o;
  o.check_bracket = false;
  auto sol = solve_hitchin(disk, q, o);
  CHECK_THROWS_AS(decay_compare(sol, disk, q, 0.0, {0.0, 0.1}), DomainError);
  CHECK_THROWS_AS(decay_compare(sol, disk, q, 0.3, {0.2, 0.1}), DomainError);
  CHECK_THROWS_AS(decay_compare(sol, disk, q, 0.3, {}), DomainError);
}

TEST_CASE("ray sweep on the torus") {
  auto torus = build_torus_background(1, 1, 16, 1);
  auto q = QuarticInput::constant(16.0, torus.lattice());
  auto rep = ray_sweep(torus, q, {1, 2, 4, 8});
  REQUIRE(rep.all_ok());
  CHECK_FALSE(rep.steps[0].has_increment);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(rep.steps[i].has_increment);
    CHECK(rep.steps[i].min_increment == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));
  }
  for (const auto& s : rep.steps) {
    CHECK(s.ratio_deviation <= 1e-9);
    CHECK(s.area_ratio == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(ray_sweep(torus, q, {2, 1}), DomainError);
  CHECK_THROWS_AS(ray_sweep(torus, q, {}), DomainError);
  CHECK_THROWS_AS(ray_sweep(torus, q, {0, 1}), DomainError);
}

TEST_CASE("ray sweep on the disk with q = z^4") {
  auto disk = build_disk_background(0.9, 65);
  auto q = QuarticInput::polynomial({0, 0, 0, 0, 1}, disk.lattice());
  RaySweepOptions opts;
  auto seq = ray_sweep(disk, q, {1, 2, 4, 8}, opts);
  REQUIRE(seq.all_ok());
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(seq.steps[i].min_increment > 0.0);
    CHECK(seq.steps[i].ratio_deviation < seq.steps[i - 1].ratio_deviation);
  }
  opts.parallel = true;
  opts.threads = 2;
  auto par = ray_sweep(disk, q, {1, 2, 4, 8}, opts);
  REQUIRE(par.all_ok());
  CHECK(par.far_mask == seq.far_mask);
  for (std::size_t i = 0; i < 4; ++i) {
    double d = 0;
    for (std::size_t k = 0; k < disk.lattice().size(); ++k)
      if (disk.lattice().carries_equation(k))
        d = std::max(d, std::abs(par.steps[i].solution.psi1[k] - seq.steps[i].solution.psi1[k]));
    CHECK(d <= 1e-8);
    CHECK(par.steps[i].ratio_deviation == doctest::Approx(seq.steps[i].ratio_deviation).epsilon(1e-6));
  }
}
