#include "hitchin/metric.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <thread>

#include "hitchin/bessel.hpp"
#include "hitchin/error.hpp"

namespace hitchin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::complex<double>> distinct_zeros(const QuarticInput& q) {
  std::vector<std::complex<double>> out;
  for (auto z : q.zeros()) {
    bool dup = false;
    for (auto w : out) dup = dup || std::abs(z - w) < 1e-9;
    if (!dup) out.push_back(z);
  }
  return out;
}

double segment_length(const QuarticInput& q, std::complex<double> a, std::complex<double> b) {
  constexpr int n = 256;  // Simpson, even
  const double len = std::abs(b - a);
  if (len == 0.0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const auto z = a + (b - a) * (double(i) / n);
    sum += w * std::sqrt(std::sqrt(std::abs(q.evaluate(z))));
  }
  return sum * len / (3.0 * n);
}

double distance_to(const QuarticInput& q, const std::vector<std::complex<double>>& zeros, std::complex<double> z) {
  double best = kInf;
  for (auto z0 : zeros) best = std::min(best, segment_length(q, z0, z));
  return best;
}

}  // namespace

InducedMetric induced_metric(const SolutionPair& pair, const ConformalBackground& bg, const QuarticInput& q) {
  const Lattice& lat = bg.lattice();
  if (!pair.psi1.matches(lat) || !pair.psi2.matches(lat) || !q.modulus_sq().matches(lat))
    throw DomainError("induced_metric: shape mismatch");
  const ScalarField qn = qnorm_sq(bg, q);
  InducedMetric m;
  m.g = ScalarField(lat, kNaN);
  m.f1 = ScalarField(lat, kNaN);
  m.f2 = ScalarField(lat, kNaN);
  m.kappa_g = ScalarField(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    const double E = std::exp(pair.psi1[k] - pair.psi2[k]);
    m.g[k] = 4.0 * E * bg.sigma()[k];
    m.f1[k] = std::exp(-2.0 * pair.psi1[k]) * qn[k] / E;
    m.f2[k] = std::exp(2.0 * pair.psi2[k]) / E;
    m.kappa_g[k] = 0.5 * (m.f1[k] + m.f2[k] - 2.0);
  }
  m.kappa_g_discrete = curvature_conformal(m.g, lat);
  return m;
}

BoundReport bound_report(const SolutionPair& pair, const ConformalBackground& bg, const QuarticInput& q,
                         const std::vector<Region>& regions) {
  const Lattice& lat = bg.lattice();
  const InducedMetric im = induced_metric(pair, bg, q);
  const ScalarField& mod = q.modulus_sq();
  BoundReport r;
  r.min_3psi2_minus_psi1 = kInf;
  r.max_3psi2_minus_psi1 = -kInf;
  r.max_kappa_g = -kInf;
  r.max_f1_plus_f2 = -kInf;
  double min_flat = kInf, min_const = kInf;
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.carries_equation(k)) continue;
    const double d = 3.0 * pair.psi2[k] - pair.psi1[k];
    r.min_3psi2_minus_psi1 = std::min(r.min_3psi2_minus_psi1, d);
    r.max_3psi2_minus_psi1 = std::max(r.max_3psi2_minus_psi1, d);
    r.max_kappa_g = std::max(r.max_kappa_g, im.kappa_g[k]);
    r.max_f1_plus_f2 = std::max(r.max_f1_plus_f2, im.f1[k] + im.f2[k]);
    if (mod[k] > 0.0) min_flat = std::min(min_flat, im.g[k] / (4.0 * std::sqrt(std::sqrt(mod[k]))));
    if (bg.hyperbolic()) min_const = std::min(min_const, im.g[k] / (-3.0 * bg.kappa()[k] * bg.sigma()[k]));
  }
  if (min_flat < kInf) r.min_g_over_flat = min_flat;
  if (bg.hyperbolic()) r.min_g_over_const = min_const;

  ScalarField flat(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k)
    if (lat.active(k)) flat[k] = 4.0 * std::sqrt(std::sqrt(mod[k]));
  std::vector<Region> regs = regions;
  if (regs.empty()) regs.push_back({"domain", active_mask(lat), 0.0});
  for (const auto& reg : regs) {
    RegionAreas a;
    a.name = reg.name;
    a.area_g = area_of(im.g, lat, reg.mask);
    a.area_flat = area_of(flat, lat, reg.mask);
    a.ratio = a.area_flat > 0.0 ? a.area_g / a.area_flat : kNaN;
    a.upper_bound = 1.5 * a.area_flat + 6.0 * std::numbers::pi * std::abs(reg.chi);
    r.regions.push_back(a);
  }
  return r;
}

ScalarField flat_error(const SolutionPair& pair, const ConformalBackground& bg, const QuarticInput& q) {
  const Lattice& lat = bg.lattice();
  const ScalarField qn = qnorm_sq(bg, q);
  ScalarField u(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k)
    if (lat.active(k) && qn[k] > 0.0) u[k] = pair.psi1[k] + pair.psi2[k] - 0.5 * std::log(qn[k]);
  return u;
}

double sample_bilinear(const Lattice& lat, const ScalarField& f, std::complex<double> z) {
  const double fx = (z.real() - lat.x(0)) / lat.hx();
  const double fy = (z.imag() - lat.y(0)) / lat.hy();
  int i = int(std::floor(fx)), j = int(std::floor(fy));
  double tx = fx - i, ty = fy - j;
  // Snap to lattice lines to avoid touching a neighbour column for exact hits.
  if (tx < 1e-12) tx = 0.0;
  if (ty < 1e-12) ty = 0.0;
  auto at = [&](int a, int b) -> double {
    if (lat.kind() == DomainKind::torus) {
      a = ((a % lat.nx()) + lat.nx()) % lat.nx();
      b = ((b % lat.ny()) + lat.ny()) % lat.ny();
    } else if (a < 0 || b < 0 || a >= lat.nx() || b >= lat.ny() || !lat.active(lat.index(a, b))) {
      throw DomainError("sample point outside the active lattice");
    }
    return f[lat.index(a, b)];
  };
  const double f00 = at(i, j);
  const double f10 = tx > 0.0 ? at(i + 1, j) : 0.0;
  const double f01 = ty > 0.0 ? at(i, j + 1) : 0.0;
  const double f11 = (tx > 0.0 && ty > 0.0) ? at(i + 1, j + 1) : 0.0;
  return (1 - tx) * (1 - ty) * f00 + tx * (1 - ty) * f10 + (1 - tx) * ty * f01 + tx * ty * f11;
}

double flat_segment_length(const QuarticInput& q, std::complex<double> a, std::complex<double> b) {
  return segment_length(q, a, b);
}

double flat_distance_to_zeros(const QuarticInput& q, std::complex<double> z) {
  return distance_to(q, distinct_zeros(q), z);
}

DecayProfile decay_compare(const SolutionPair& pair, const ConformalBackground& bg, const QuarticInput& q,
                           std::complex<double> center, const std::vector<double>& radii) {
  if (q.form() == QuarticForm::sampled) throw DomainError("decay_compare needs an analytic (holomorphic) q");
  if (radii.empty()) throw DomainError("decay_compare: no radii");
  if (!std::is_sorted(radii.begin(), radii.end()) || radii.front() < 0.0)
    throw DomainError("decay_compare: radii must be sorted and non-negative");
  const Lattice& lat = bg.lattice();
  const auto zeros = distinct_zeros(q);
  if (q.identically_zero()) throw DomainError("decay_compare: q == 0");

  DecayProfile p;
  p.center = center;
  p.direction = 1.0;
  double zero_dist = kInf;
  for (auto z0 : zeros) {
    const double d = std::abs(center - z0);
    if (d < zero_dist) {
      zero_dist = d;
      if (d > 0.0) p.direction = (center - z0) / d;
    }
  }
  if (zero_dist < 1e-12 || std::abs(q.evaluate(center)) == 0.0) throw DomainError("decay_compare: center on a zero of q");
  p.radii = radii;

  ScalarField root(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k)
    if (lat.active(k)) root[k] = std::sqrt(std::sqrt(q.modulus_sq()[k]));
  p.q_mass = area_of(root, lat);
  const double scale = std::sqrt(p.q_mass);

  const ScalarField u = flat_error(pair, bg, q);
  for (double rho : radii) {
    const auto z = center + rho * p.direction;
    const double d = distance_to(q, zeros, z);
    p.flat_distance.push_back(d);
    p.r0.push_back(d / scale);
    p.u.push_back(sample_bilinear(lat, u, z));
  }

  // Least squares of log u against r0 over the inner half.
  const std::size_t half = (radii.size() + 1) / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < half; ++i) {
    if (!(p.u[i] > 1e-13) || !std::isfinite(p.r0[i])) continue;
    const double x = p.r0[i], y = std::log(p.u[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  p.fit_points = n;
  const double den = n * sxx - sx * sx;
  p.rate = (n >= 2 && den > 0.0) ? -(n * sxy - sx * sy) / den : kNaN;

  // Comparison ball: Euclidean, clear of zeros and of the domain edge.
  double room = zero_dist;
  if (lat.kind() == DomainKind::disk) room = std::min(room, lat.radius() - std::abs(center) - lat.hx());
  else room = std::min(room, 0.5 * std::min(lat.extent_x(), lat.extent_y()));
  if (!(room > 0.0)) throw DomainError("decay_compare: center too close to the domain edge");
  p.ball_radius = 0.95 * room;
  double C = -kInf;
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k) || std::isnan(u[k])) continue;
    if (std::abs(lat.z(k) - center) <= p.ball_radius) C = std::max(C, u[k]);
  }
  if (C == -kInf) throw DomainError("decay_compare: comparison ball contains no nodes");
  C = std::max(C, 0.0);
  // Minimum modulus principle: min |q| over a zero-free disk sits on its boundary circle.
  double qmin = kInf;
  for (int i = 0; i < 1440; ++i) {
    const auto z = center + std::polar(p.ball_radius, 2.0 * std::numbers::pi * i / 1440.0);
    qmin = std::min(qmin, std::abs(q.evaluate(z)));
  }
  p.oracle_C = C;
  p.oracle_a = std::exp(-2.0 * C);
  p.oracle_r = 0.999 * p.ball_radius * std::sqrt(std::sqrt(qmin));
  p.center_value = sample_bilinear(lat, u, center);
  p.oracle_center = bessel_barrier(C, p.oracle_a, p.oracle_r, 0.0);
  for (double rho : radii) {
    const double dc = segment_length(q, center, center + rho * p.direction);
    p.oracle.push_back(dc <= p.oracle_r ? bessel_barrier(C, p.oracle_a, p.oracle_r, dc) : kNaN);
  }
  return p;
}

DecayScaling decay_scaling(int n, double c0, const std::vector<double>& mass_factors, int samples) {
  if (!(c0 > 0.0)) throw DomainError("decay_scaling: c0 must be positive");
  if (mass_factors.empty()) throw DomainError("decay_scaling: no mass factors");
  if (samples < 4) throw DomainError("decay_scaling: need at least 4 samples");
  const ConformalBackground disk = build_disk_background(0.9, n);
  DecayScaling out;
  out.mass_factors = mass_factors;
  for (double f : mass_factors) {
    if (!(f > 0.0)) throw DomainError("decay_scaling: mass factors must be positive");
    const double c = c0 * f * f;
    const QuarticInput q = QuarticInput::polynomial({0, 0, 0, 0, c}, disk.lattice());
    SolverOptions so;
    // The flat branch of the sub-solution is only O(h^2) sub-harmonic on the lattice.
    so.check_bracket = false;
    const SolutionPair sol = solve_hitchin(disk, q, so);
    out.iterations += sol.iterations;
    // Flat distance from 0 along a ray is c^{1/4} r^2 / 2.
    const double c4 = std::sqrt(std::sqrt(c));
    auto radius_at = [&](double d) { return std::sqrt(2.0 * d / c4); };
    const double r_c = radius_at(1.0);
    if (radius_at(5.0) + disk.h() >= disk.lattice().radius())
      throw DomainError("decay_scaling: c0 too small, the ray leaves the disk");
    std::vector<double> radii;
    for (int i = 0; i < samples; ++i) radii.push_back(radius_at(1.0 + 4.0 * i / (samples - 1)) - r_c);
    out.coefficients.push_back(c);
    out.profiles.push_back(decay_compare(sol, disk, q, {r_c, 0.0}, radii));
  }
  const DecayProfile& base = out.profiles.front();
  for (const auto& p : out.profiles) {
    out.rate_ratio.push_back(p.rate / base.rate);
    out.expected_ratio.push_back(std::sqrt(p.q_mass / base.q_mass));
  }
  return out;
}

RegionMask far_from_zeros_mask(const Lattice& lat, const QuarticInput& q, double eps_fraction) {
  RegionMask mask = active_mask(lat);
  if (q.form() == QuarticForm::sampled) {
    for (std::size_t k = 0; k < lat.size(); ++k)
      if (mask[k] && !(q.modulus_sq()[k] > 0.0)) mask[k] = 0;
    return mask;
  }
  const auto zeros = distinct_zeros(q);
  if (zeros.empty()) return mask;
  std::vector<double> d(lat.size(), kNaN);
  double dmax = 0.0;
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    d[k] = distance_to(q, zeros, lat.z(k));
    dmax = std::max(dmax, d[k]);
  }
  const double cut = 2.0 * eps_fraction * dmax;
  for (std::size_t k = 0; k < lat.size(); ++k)
    if (mask[k] && !(d[k] >= cut)) mask[k] = 0;
  return mask;
}

bool RaySweepReport::all_ok() const {
  return std::all_of(steps.begin(), steps.end(), [](const RayStep& s) { return s.ok; });
}

namespace {

void measure_step(RayStep& step, const ConformalBackground& bg, const QuarticInput& qt, const RegionMask& far) {
  const Lattice& lat = bg.lattice();
  const InducedMetric im = induced_metric(step.solution, bg, qt);
  ScalarField flat(lat, kNaN);
  double dev = 0.0;
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    flat[k] = 4.0 * std::sqrt(std::sqrt(qt.modulus_sq()[k]));
    if (lat.carries_equation(k) && far[k] && flat[k] > 0.0) dev = std::max(dev, std::abs(im.g[k] / flat[k] - 1.0));
  }
  step.ratio_deviation = dev;
  step.area_ratio = area_of(im.g, lat) / area_of(flat, lat);
}

}  // namespace

RaySweepReport ray_sweep(const ConformalBackground& bg, const QuarticInput& q, const std::vector<double>& t_list,
                         const RaySweepOptions& opts) {
  if (t_list.empty()) throw DomainError("ray_sweep: empty t list");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] > 0.0)) throw DomainError("ray_sweep: t values must be positive");
    if (i > 0 && !(t_list[i] > t_list[i - 1])) throw DomainError("ray_sweep: t values must increase strictly");
  }
  if (q.identically_zero()) throw DomainError("ray_sweep: q == 0");
  const Lattice& lat = bg.lattice();

  RaySweepReport rep;
  rep.far_mask = far_from_zeros_mask(lat, q, opts.eps_fraction);
  rep.steps.resize(t_list.size());

  auto run = [&](std::size_t i, const SolutionPair* warm) {
    RayStep& step = rep.steps[i];
    step.t = t_list[i];
    try {
      const QuarticInput qt = q.scaled(step.t);
      SolverOptions so = opts.solver;
      if (warm) so.initial = std::make_pair(warm->psi1, warm->psi2);
      step.solution = solve_hitchin(bg, qt, so);
      measure_step(step, bg, qt, rep.far_mask);
      step.ok = true;
    } catch (const Error& e) {
      step.ok = false;
      step.error = e.what();
    }
  };

  if (opts.parallel) {
    unsigned cap = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t first = 0; first < t_list.size(); first += cap) {
      std::vector<std::future<void>> jobs;
      for (std::size_t i = first; i < std::min(t_list.size(), first + cap); ++i)
        jobs.push_back(std::async(std::launch::async, run, i, nullptr));
      for (auto& j : jobs) j.get();
    }
  } else {
    const SolutionPair* prev = nullptr;
    for (std::size_t i = 0; i < t_list.size(); ++i) {
      run(i, prev);
      prev = rep.steps[i].ok ? &rep.steps[i].solution : prev;
    }
  }

  const RayStep* prev = nullptr;
  for (auto& step : rep.steps) {
    if (!step.ok) continue;
    if (prev) {
      double inc = kInf;
      for (std::size_t k = 0; k < lat.size(); ++k) {
        if (!lat.carries_equation(k)) continue;
        const double now = step.solution.psi1[k] - step.solution.psi2[k];
        const double before = prev->solution.psi1[k] - prev->solution.psi2[k];
        inc = std::min(inc, now - before);
      }
      step.min_increment = inc;
      step.has_increment = true;
    }
    prev = &step;
  }
  return rep;
}

}  // namespace hitchin
