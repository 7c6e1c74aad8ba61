#include "suites.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hitchin/bessel.hpp"
#include "hitchin/entropy.hpp"
#include "hitchin/error.hpp"
#include "hitchin/metric.hpp"
#include "hitchin/saddle.hpp"

namespace lab {

using namespace hitchin;

double Check::margin() const {
  if (relation == "<=" || relation == "<") return bound - value;
  if (relation == ">=" || relation == ">") return value - bound;
  return std::nan("");
}

std::string describe_node(const Lattice& lattice, std::size_t k) {
  std::ostringstream s;
  s << "node " << k << " (i=" << lattice.column(k) << ", j=" << lattice.row(k) << ", x=" << num(lattice.z(k).real())
    << ", y=" << num(lattice.z(k).imag()) << ")";
  return s.str();
}

namespace {

const double kLog43 = std::log(4.0 / 3.0);

struct Case {
  std::string name;
  ConformalBackground bg;
  QuarticInput q;
  std::optional<SolutionPair> sol;
  std::string error;
};

struct Extreme {
  double value = std::nan("");
  std::size_t node = 0;
};

// Min (or max) of f over equation nodes; a NaN value wins so that it is reported.
template <class F>
Extreme extreme(const Lattice& lat, F f, bool minimum, const RegionMask* mask = nullptr) {
  Extreme e;
  bool first = true;
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.carries_equation(k) || (mask && !(*mask)[k])) continue;
    const double v = f(k);
    if (std::isnan(v)) return {v, k};
    if (first || (minimum ? v < e.value : v > e.value)) {
      e = {v, k};
      first = false;
    }
  }
  return e;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

// Count of nodes whose bit patterns differ, and the first of them.
std::pair<double, std::string> bit_diff(const Lattice& lat, const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) return {double(std::max(a.size(), b.size())), "shape mismatch"};
  double n = 0;
  std::string where;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!same_bits(a[k], b[k])) {
      if (n == 0) where = describe_node(lat, k);
      ++n;
    }
  return {n, where};
}

std::string curve_name(const CurveClass& c) {
  if (const auto* t = std::get_if<TorusClass>(&c)) return "class (" + std::to_string(t->p) + "," + std::to_string(t->q) + ")";
  std::string s = "corridor [";
  const auto& e = std::get<Corridor>(c).edges;
  for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
  return s + "]";
}

}  // namespace

struct Verifier::State {
  VerifyContext ctx;
  std::vector<Case> cases;
  bool cases_ready = false;
  std::vector<Check> out;
  std::string suite;
  std::mt19937_64 rng;

  explicit State(VerifyContext c) : ctx(std::move(c)), rng(ctx.seed) {}

  const Tolerances& tol() const {
    static const Tolerances defaults;
    return ctx.config ? ctx.config->tol : defaults;
  }
  SolverOptions solver() const { return ctx.config ? ctx.config->solver : SolverOptions{}; }
  bool configured_case() const { return ctx.config && ctx.config->domain && ctx.config->differential; }

  void add(const std::string& inv, const std::string& subj, double value, const std::string& rel, double bound,
           const std::string& where = "") {
    Check c{suite, inv, subj, value, rel, bound, false, where};
    if (rel == "<=") c.pass = value <= bound;
    else if (rel == "<") c.pass = value < bound;
    else if (rel == ">=") c.pass = value >= bound;
    else if (rel == ">") c.pass = value > bound;
    else c.pass = true;
    if (ctx.on_check) ctx.on_check(c);
    out.push_back(std::move(c));
  }
  void le(const std::string& inv, const std::string& subj, double v, double b, const std::string& w = "") {
    add(inv, subj, v, "<=", b, w);
  }
  void ge(const std::string& inv, const std::string& subj, double v, double b, const std::string& w = "") {
    add(inv, subj, v, ">=", b, w);
  }
  void report(const std::string& inv, const std::string& subj, double v, const std::string& w = "") {
    add(inv, subj, v, "report", std::nan(""), w);
  }
  void failed(const std::string& inv, const std::string& subj, const std::string& why) {
    add(inv, subj, std::nan(""), "<=", 0.0, why);
  }

  std::vector<Case>& solved_cases();

  void domain_suite();
  void solver_suite();
  void bounds_suite();
  void metric_suite();
  void flat_suite();
  void entropy_suite();
};

std::vector<Case>& Verifier::State::solved_cases() {
  if (cases_ready) return cases;
  cases_ready = true;
  auto push = [&](std::string name, ConformalBackground bg, auto make_q) {
    QuarticInput q = make_q(bg.lattice());
    cases.push_back({std::move(name), std::move(bg), std::move(q), std::nullopt, ""});
  };
  if (configured_case()) {
    const auto& c = *ctx.config;
    push("config", make_background(*c.domain), [&](const Lattice& l) { return make_quartic(*c.differential, l); });
  } else {
    push("torus16", build_torus_background(1, 1, 64, 1), [](const Lattice& l) { return QuarticInput::constant(16.0, l); });
    push("disk-q0", build_disk_background(0.5, 65), [](const Lattice& l) { return QuarticInput::constant(0.0, l); });
    push("disk-z4", build_disk_background(0.9, 97),
         [](const Lattice& l) { return QuarticInput::polynomial({0, 0, 0, 0, 1}, l); });
    push("disk-mixed", build_disk_background(0.9, 65),
         [](const Lattice& l) { return QuarticInput::polynomial({0.5, 0, 0, 0, 3}, l); });
  }
  for (auto& c : cases) {
    try {
      c.sol = solve_hitchin(c.bg, c.q, solver());
    } catch (const Error& e) {
      c.error = e.what();
    }
  }
  return cases;
}

void Verifier::State::domain_suite() {
  // Backgrounds whose curvature is computed from the factor.
  {
    const auto disk = build_disk_background(0.7, 64);
    const ConformalBackground sampled(disk.lattice(), disk.sigma());
    const auto torus = build_torus_background(2, 1, 16, 3);
    for (const auto* bg : {&sampled, &torus}) {
      const auto k2 = curvature_conformal(bg->sigma(), bg->lattice());
      double n = 0;
      std::string where;
      for (std::size_t k = 0; k < k2.size(); ++k)
        if (bg->lattice().carries_equation(k) && !same_bits(k2[k], bg->kappa()[k])) {
          if (n == 0) where = describe_node(bg->lattice(), k);
          ++n;
        }
      le("stored kappa equals curvature_conformal (nodes differing)",
         bg == &torus ? "torus 2x1 n=16" : "sampled Poincare disk n=64", n, 0, where);
    }
  }
  // Poincare disk: exact kappa stored; the discrete curvature of its factor converges to it.
  {
    auto err = [](int n) {
      const auto bg = build_disk_background(0.9, n);
      const auto k2 = curvature_conformal(bg.sigma(), bg.lattice());
      return extreme(bg.lattice(), [&](std::size_t k) { return std::abs(k2[k] + 2.0); }, false).value;
    };
    const double e1 = err(65), e2 = err(129);
    report("max |kappa_discrete + 2|", "Poincare disk n=129", e2);
    ge("discrete kappa error ratio under halving h", "Poincare disk 65/129", e1 / e2, 3.0);
  }
  // Harmonic samples.
  {
    auto err = [](int n, auto f) {
      const auto lat = Lattice::disk(0.9, n);
      ScalarField v(lat, 0.0);
      for (std::size_t k = 0; k < lat.size(); ++k) v[k] = f(lat.z(k).real(), lat.z(k).imag());
      return extreme(lat, [&](std::size_t k) { return std::abs(0.25 * laplacian5(lat, v, k)); }, false).value;
    };
    le("dbar-d of harmonic quadratic", "x", err(65, [](double x, double) { return x; }), 1e-9);
    le("dbar-d of harmonic quadratic", "x^2-y^2", err(65, [](double x, double y) { return x * x - y * y; }), 1e-9);
    le("dbar-d of harmonic quadratic", "xy", err(65, [](double x, double y) { return x * y; }), 1e-9);
    auto g = [](double x, double y) { return std::exp(2 * x) * std::sin(2 * y); };
    const double e1 = err(33, g), e2 = err(65, g), e3 = err(129, g);
    ge("dbar-d convergence order (h -> h/2)", "e^{2x} sin 2y, 33/65", std::log2(e1 / e2), 1.8);
    ge("dbar-d convergence order (h -> h/2)", "e^{2x} sin 2y, 65/129", std::log2(e2 / e3), 1.8);
  }
  for (auto& c : solved_cases()) {
    const auto base = qnorm_sq(c.bg, c.q);
    for (double th : ctx.config ? ctx.config->phases : RunConfig{}.phases) {
      const auto [n, w] = bit_diff(c.bg.lattice(), qnorm_sq(c.bg, c.q.rotated(th)), base);
      le("qnorm_sq phase invariance, theta=" + num(th) + " (nodes differing)", c.name, n, 0, w);
    }
  }
}

void Verifier::State::solver_suite() {
  const auto& T = tol();
  for (auto& c : solved_cases()) {
    if (!c.sol) {
      failed("newton convergence", c.name, c.error);
      continue;
    }
    const auto& lat = c.bg.lattice();
    const auto& s = *c.sol;
    le("newton residual", c.name, s.residual_inf, T.residual);
    report("newton iterations", c.name, s.iterations);

    // Closed-form solutions.
    if (c.bg.flat() && c.q.form() == QuarticForm::constant && !c.q.identically_zero()) {
      const double r = std::sqrt(std::abs(c.q.coefficients().front()));
      double e1 = 0, e2 = 0;
      for (std::size_t k = 0; k < lat.size(); ++k) {
        const double m = std::log(r / c.bg.sigma()[k]);
        e1 = std::max(e1, std::abs(s.psi1[k] - 1.5 * m));
        e2 = std::max(e2, std::abs(s.psi2[k] - 0.5 * m));
      }
      le("exact solution ((3/2) log|q|^{1/2}/sigma, (1/2) log|q|^{1/2}/sigma)", c.name, e1 + e2, 1e-8);
    }
    if (c.bg.hyperbolic() && c.q.identically_zero() && c.bg.kappa_min() == c.bg.kappa_max()) {
      const double kap = c.bg.kappa_min();
      const auto a = extreme(lat, [&](std::size_t k) { return std::abs(s.psi2[k] - 0.5 * std::log(-kap)); }, false);
      const auto b = extreme(
          lat, [&](std::size_t k) { return std::abs(s.psi1[k] - s.psi2[k] - std::log(-0.75 * kap)); }, false);
      le("exact solution psi2 = (1/2) log(-kappa)", c.name, a.value, 1e-6, describe_node(lat, a.node));
      le("exact solution psi1 - psi2 = log(-3 kappa/4)", c.name, b.value, 1e-6, describe_node(lat, b.node));
    }

    // Bracket.
    if (c.q.holomorphic()) {
      const auto sub = flat_subsolution(c.bg, c.q);
      const auto sup = constant_supersolution(c.bg, c.q);
      const auto lo = extreme(
          lat, [&](std::size_t k) { return std::min(s.psi1[k] - sub.psi1[k], s.psi2[k] - sub.psi2[k]); }, true);
      const auto hi = extreme(
          lat, [&](std::size_t k) { return std::min(sup.pair.psi1[k] - s.psi1[k], sup.pair.psi2[k] - s.psi2[k]); },
          true);
      ge("bracket: solution - flat sub-solution", c.name, lo.value, -T.bound, describe_node(lat, lo.node));
      ge("bracket: constant super-solution - solution", c.name, hi.value, -T.bound, describe_node(lat, hi.node));

      SolverOptions o = solver();
      o.initial = std::make_pair(sup.pair.psi1, sup.pair.psi2);
      try {
        const auto from_super = solve_hitchin(c.bg, c.q, o);
        const auto d = extreme(
            lat,
            [&](std::size_t k) {
              return std::max(std::abs(from_super.psi1[k] - s.psi1[k]), std::abs(from_super.psi2[k] - s.psi2[k]));
            },
            false);
        le("uniqueness: sub- and super-initialised runs agree", c.name, d.value, T.uniqueness,
           describe_node(lat, d.node));
      } catch (const Error& e) {
        failed("uniqueness: sub- and super-initialised runs agree", c.name, e.what());
      }
    }

    for (double th : ctx.config ? ctx.config->phases : RunConfig{}.phases) {
      try {
        const auto r = solve_hitchin(c.bg, c.q.rotated(th), solver());
        auto [n1, w1] = bit_diff(lat, r.psi1, s.psi1);
        auto [n2, w2] = bit_diff(lat, r.psi2, s.psi2);
        le("phase invariance, theta=" + num(th) + " (values differing)", c.name, n1 + n2, 0, w1.empty() ? w2 : w1);
      } catch (const Error& e) {
        failed("phase invariance, theta=" + num(th), c.name, e.what());
      }
    }

    // Jacobian against central differences, one column per sampled unknown.
    const auto nodes = equation_nodes(lat);
    const auto J = hitchin_jacobian(c.bg, c.q, s.psi1, s.psi2);
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
    const int points = ctx.config ? ctx.config->jacobian_points : RunConfig{}.jacobian_points;
    const double eps = 1e-5;
    double worst = 0.0;
    std::string where;
    for (int trial = 0; trial < points; ++trial) {
      const std::size_t i = pick(rng);
      for (int f = 0; f < 2; ++f) {
        ScalarField a1 = s.psi1, a2 = s.psi2, b1 = s.psi1, b2 = s.psi2;
        (f == 0 ? a1 : a2)[nodes[i]] += eps;
        (f == 0 ? b1 : b2)[nodes[i]] -= eps;
        const auto ra = residual(c.bg, c.q, a1, a2);
        const auto rb = residual(c.bg, c.q, b1, b2);
        const Eigen::VectorXd col = J.col(long(2 * i + std::size_t(f)));
        double num2 = 0, den2 = 0;
        for (std::size_t t = 0; t < nodes.size(); ++t)
          for (int g = 0; g < 2; ++g) {
            const auto& A = g == 0 ? ra.first : ra.second;
            const auto& B = g == 0 ? rb.first : rb.second;
            const double fd = (A[nodes[t]] - B[nodes[t]]) / (2 * eps);
            const double an = col[long(2 * t + std::size_t(g))];
            num2 += (fd - an) * (fd - an);
            den2 += an * an;
          }
        const double rel = std::sqrt(num2 / den2);
        if (!(rel <= worst)) {
          worst = rel;
          where = describe_node(lat, nodes[i]) + (f == 0 ? " psi1" : " psi2");
        }
      }
    }
    le("jacobian vs central differences (" + std::to_string(points) + " nodes)", c.name, worst, T.jacobian, where);
  }

  // Order of accuracy on a torus with varying |q| from three nested grids.
  {
    std::vector<ScalarField> sol;
    std::vector<Lattice> lats;
    for (int n : {16, 32, 64}) {
      auto bg = build_torus_background(1, 1, n, 1);
      const auto& lat = bg.lattice();
      std::vector<std::complex<double>> v(lat.size());
      for (std::size_t k = 0; k < lat.size(); ++k) {
        const double x = lat.z(k).real(), y = lat.z(k).imag();
        v[k] = 16.0 * (1.0 + 0.5 * std::cos(2 * std::numbers::pi * x) * std::sin(2 * std::numbers::pi * y));
      }
      sol.push_back(solve_hitchin(bg, QuarticInput::sampled(v, lat)).psi1);
      lats.push_back(lat);
    }
    auto diff = [&](std::size_t a) {
      double e = 0;
      const int n = lats[a].nx();
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          e = std::max(e, std::abs(sol[a][lats[a].index(i, j)] - sol[a + 1][lats[a + 1].index(2 * i, 2 * j)]));
      return e;
    };
    const double d1 = diff(0), d2 = diff(1);
    ge("grid convergence order (three nested grids)", "torus, varying |q|, n=16/32/64", std::log2(d1 / d2), 1.8);
  }
}

void Verifier::State::bounds_suite() {
  const auto& T = tol();
  for (auto& c : solved_cases()) {
    if (!c.sol) {
      failed("newton convergence", c.name, c.error);
      continue;
    }
    const auto& lat = c.bg.lattice();
    const auto& s = *c.sol;
    const auto m = induced_metric(s, c.bg, c.q);
    const std::string tag = c.q.holomorphic() ? "" : " (q not holomorphic: reported)";
    auto check = [&](const std::string& inv, double v, const std::string& rel, double b, std::size_t node) {
      if (c.q.holomorphic()) add(inv, c.name, v, rel, b, describe_node(lat, node));
      else report(inv + tag, c.name, v, describe_node(lat, node));
    };
    auto chain = [&](std::size_t k) { return 3 * s.psi2[k] - s.psi1[k]; };
    const auto lo = extreme(lat, chain, true), hi = extreme(lat, chain, false);
    check("bound chain: min (3 psi2 - psi1) >= 0", lo.value, ">=", -T.bound, lo.node);
    check("bound chain: max (3 psi2 - psi1) <= log(4/3)", hi.value, "<=", kLog43 + T.bound, hi.node);
    if (c.bg.flat() && c.q.form() == QuarticForm::constant && !c.q.identically_zero()) {
      const auto t = extreme(lat, [&](std::size_t k) { return std::abs(chain(k)); }, false);
      check("bound chain tight at 0 (max |3 psi2 - psi1|)", t.value, "<=", T.bound, t.node);
    }
    if (c.bg.hyperbolic() && c.q.identically_zero()) {
      const auto t = extreme(lat, [&](std::size_t k) { return std::abs(chain(k) - kLog43); }, false);
      check("bound chain tight at log(4/3) (max |3 psi2 - psi1 - log(4/3)|)", t.value, "<=", T.bound, t.node);
    }
    const auto& q2 = c.q.modulus_sq();
    bool any_q = false;
    for (std::size_t k = 0; k < lat.size() && !any_q; ++k) any_q = lat.carries_equation(k) && q2[k] > 0.0;
    if (any_q) {
      const auto r = extreme(
          lat, [&](std::size_t k) { return q2[k] > 0.0 ? m.g[k] / (4 * std::pow(q2[k], 0.25)) : INFINITY; }, true);
      check("min g / (4|q|^{1/2}) over q != 0", r.value, ">=", 1 - T.bound, r.node);
    }
    if (c.bg.hyperbolic()) {
      const auto r = extreme(lat, [&](std::size_t k) { return m.g[k] / (-3 * c.bg.kappa()[k] * c.bg.sigma()[k]); }, true);
      check("min g / (-3 kappa sigma)", r.value, ">=", 1 - T.bound, r.node);
    }
    const auto rep = bound_report(s, c.bg, c.q);
    for (const auto& a : rep.regions) {
      const std::string inv = "area(g) <= (3/2) area(4|q|^{1/2}) + 6 pi |chi|, region " + a.name;
      if (lat.kind() == DomainKind::torus && c.q.holomorphic()) le(inv, c.name, a.area_g, a.upper_bound);
      else add(inv + " (patch: reported)", c.name, a.area_g, "report", a.upper_bound);
      report("area(g) / area(4|q|^{1/2}), region " + a.name, c.name, a.ratio);
    }
  }
}

void Verifier::State::metric_suite() {
  for (auto& c : solved_cases()) {
    if (!c.sol) {
      failed("newton convergence", c.name, c.error);
      continue;
    }
    const auto& lat = c.bg.lattice();
    const auto& s = *c.sol;
    const auto m = induced_metric(s, c.bg, c.q);
    const double h = c.bg.h();
    if (c.bg.hyperbolic() && c.q.holomorphic()) {
      const auto kg = extreme(lat, [&](std::size_t k) { return m.kappa_g[k]; }, false);
      le("curvature negativity: max kappa(g)", c.name, kg.value, -1e-8 + h * h, describe_node(lat, kg.node));
      const auto ff = extreme(lat, [&](std::size_t k) { return m.f1[k] + m.f2[k]; }, false);
      add("max f1 + f2", c.name, ff.value, "<", 2.0, describe_node(lat, ff.node));
    }
    if (c.bg.flat() && c.q.form() == QuarticForm::constant && !c.q.identically_zero()) {
      const double g0 = 4 * std::sqrt(std::abs(c.q.coefficients().front()));
      const auto g = extreme(lat, [&](std::size_t k) { return std::abs(m.g[k] - g0); }, false);
      le("induced metric g = 4|q|^{1/2} (max deviation)", c.name, g.value, 1e-6, describe_node(lat, g.node));
      const auto kd = extreme(lat, [&](std::size_t k) { return std::abs(m.kappa_g_discrete[k]); }, false);
      le("kappa(g) = 0 (discrete route)", c.name, kd.value, 1e-6, describe_node(lat, kd.node));
    }
    if (c.bg.hyperbolic() && c.q.identically_zero() && c.bg.kappa_min() == -2.0 && c.bg.kappa_max() == -2.0) {
      const auto kd = extreme(lat, [&](std::size_t k) { return std::abs(m.kappa_g_discrete[k] + 1.0 / 3.0); }, false);
      le("kappa(g) = -1/3 (discrete route)", c.name, kd.value, 2e-3, describe_node(lat, kd.node));
    }
    const auto kd = extreme(lat, [&](std::size_t k) { return std::abs(m.kappa_g[k] - m.kappa_g_discrete[k]); }, false);
    report("max |kappa(g) pointwise - kappa(g) discrete|", c.name, kd.value, describe_node(lat, kd.node));

    // Every report is unchanged by a phase rotation.
    const double th = (ctx.config ? ctx.config->phases : RunConfig{}.phases).front();
    try {
      const auto qr = c.q.rotated(th);
      const auto sr = solve_hitchin(c.bg, qr, solver());
      const auto mr = induced_metric(sr, c.bg, qr);
      double n = 0;
      std::string where;
      using FieldPair = std::pair<const ScalarField*, const ScalarField*>;
      for (auto [a, b] : std::initializer_list<FieldPair>{{&m.g, &mr.g}, {&m.f1, &mr.f1}, {&m.f2, &mr.f2},
                                                          {&m.kappa_g, &mr.kappa_g},
                                                          {&m.kappa_g_discrete, &mr.kappa_g_discrete}}) {
        const auto [d, w] = bit_diff(lat, *a, *b);
        if (n == 0) where = w;
        n += d;
      }
      const auto r0 = bound_report(s, c.bg, c.q), r1 = bound_report(sr, c.bg, qr);
      const auto same = same_bits;
      n += !same(r0.min_3psi2_minus_psi1, r1.min_3psi2_minus_psi1) + !same(r0.max_3psi2_minus_psi1, r1.max_3psi2_minus_psi1) +
           !same(r0.max_kappa_g, r1.max_kappa_g) + !same(r0.max_f1_plus_f2, r1.max_f1_plus_f2) +
           !same(r0.min_g_over_flat.value_or(0), r1.min_g_over_flat.value_or(0)) +
           !same(r0.min_g_over_const.value_or(0), r1.min_g_over_const.value_or(0)) +
           !same(r0.regions.at(0).area_g, r1.regions.at(0).area_g);
      le("phase invariance of metric reports, theta=" + num(th) + " (values differing)", c.name, n, 0, where);
    } catch (const Error& e) {
      failed("phase invariance of metric reports", c.name, e.what());
    }
  }

  // Two curvature routes converge to each other at second order.
  {
    auto err = [](int n) {
      const auto disk = build_disk_background(0.9, n);
      const auto q = QuarticInput::polynomial({1, 0, 0, 0, 1}, disk.lattice());
      const auto m = induced_metric(solve_hitchin(disk, q), disk, q);
      RegionMask inner(disk.lattice().size(), 0);
      for (std::size_t k = 0; k < inner.size(); ++k) inner[k] = std::abs(disk.lattice().z(k)) <= 0.5;
      return extreme(disk.lattice(), [&](std::size_t k) { return std::abs(m.kappa_g[k] - m.kappa_g_discrete[k]); },
                     false, &inner)
          .value;
    };
    const double e1 = err(49), e2 = err(97);
    report("two-route curvature gap, |z| <= 0.5", "disk, q = 1 + z^4, n=97", e2);
    ge("two-route curvature gap ratio under halving h", "disk, q = 1 + z^4, n=49/97", e1 / e2, 3.0);
  }

  // Ray t -> t q.
  {
    std::optional<ConformalBackground> bg;
    std::optional<QuarticInput> q;
    std::string subj;
    if (configured_case()) {
      bg = make_background(*ctx.config->domain);
      q = make_quartic(*ctx.config->differential, bg->lattice());
      subj = "config";
    } else {
      bg = build_disk_background(0.9, 65);
      q = QuarticInput::polynomial({0, 0, 0, 0, 1}, bg->lattice());
      subj = "disk-z4 n=65";
    }
    RaySweepOptions o;
    o.solver = solver();
    o.parallel = ctx.config && ctx.config->sweep_parallel;
    o.threads = ctx.threads;
    o.eps_fraction = ctx.config ? ctx.config->eps_fraction : 0.15;
    const auto ts = ctx.config ? ctx.config->t_list : RunConfig{}.t_list;
    const auto rep = ray_sweep(*bg, *q, ts, o);
    const bool equality = bg->flat() && q->form() == QuarticForm::constant;
    for (std::size_t i = 0; i < rep.steps.size(); ++i) {
      const auto& st = rep.steps[i];
      const std::string at = subj + ", t=" + num(st.t);
      if (!st.ok) {
        failed("ray sweep solve", at, st.error);
        continue;
      }
      if (st.has_increment) add("monotonicity in t: min increment of psi1 - psi2", at, st.min_increment, ">", 0.0);
      if (equality) le("far-mask conformal ratio deviation (equality case)", at, st.ratio_deviation, 1e-9);
      else if (i > 0 && rep.steps[i - 1].ok)
        add("far-mask conformal ratio deviation shrinks", at, st.ratio_deviation, "<", rep.steps[i - 1].ratio_deviation);
      else report("far-mask conformal ratio deviation", at, st.ratio_deviation);
      report("area(g_t) / area(4 t^{1/2}|q|^{1/2})", at, st.area_ratio);
    }
  }

  // Decay of u1 + u2 and the Bessel comparison.
  {
    const auto d = decay_scaling(129, 1e5, {1, 4, 16});
    for (std::size_t i = 0; i < d.profiles.size(); ++i) {
      const auto& p = d.profiles[i];
      const std::string subj = "q = c z^4, ||q|| x" + num(d.mass_factors[i]);
      le("decay rate / ||q||^{1/2} scaling (relative deviation)", subj,
         std::abs(d.rate_ratio[i] / d.expected_ratio[i] - 1.0), 0.2);
      le("center value of u1 + u2 <= Bessel barrier", subj, p.center_value, p.oracle_center);
    }
    const double s = bessel_i0_series(30.0);
    le("Bessel I0 series vs asymptotic at x=30 (relative)", "I0(30)", std::abs(s - bessel_i0_asymptotic(30.0)) / s,
       1e-8);
  }
}

void Verifier::State::flat_suite() {
  std::vector<std::pair<std::string, FlatSurface>> surfaces{{"octagon", FlatSurface::octagon()},
                                                            {"square-torus(1)", FlatSurface::square_torus(1)},
                                                            {"square-torus(2)", FlatSurface::square_torus(2)}};
  if (ctx.config && ctx.config->surface) surfaces.emplace_back("config", make_surface(*ctx.config->surface));
  const double L = ctx.config ? ctx.config->flat.saddle_length : FlatSpec{}.saddle_length;

  for (const auto& [name, s] : surfaces) {
    int sum_k = 0;
    double worst = 0;
    std::string where;
    for (std::size_t v = 0; v < s.cone_points().size(); ++v) {
      const auto& c = s.cone_points()[v];
      sum_k += c.k;
      const double e = std::abs(c.angle - (2 + 0.5 * c.k) * std::numbers::pi);
      if (e >= worst) {
        worst = e;
        where = "cone point " + std::to_string(v);
      }
    }
    le("Gauss-Bonnet |sum k - 4(2g - 2)|", name, std::abs(sum_k - 4 * (2 * s.genus() - 2)), 0);
    le("cone angle = 2 pi + k pi/2", name, worst, 1e-9, where);
    report("area", name, s.area());
    GeodesicOptions so;
    so.saddle.budget = ctx.config ? ctx.config->flat.budget : FlatSpec{}.budget;
    try {
      const auto rep = systole_and_saddles(s, L, so);
      report("saddle connections up to L=" + num(L), name, double(rep.saddles.size()));
      if (rep.systole) report("systole", name, *rep.systole);
      if (name == "octagon") {
        le("octagon systole = 1", name, rep.systole ? std::abs(*rep.systole - 1.0) : INFINITY, 1e-12);
      }
    } catch (const Error& e) {
      failed("saddle connection search", name, e.what());
    }
  }

  const auto o = FlatSurface::octagon();
  le("octagon genus = 2", "octagon", std::abs(o.genus() - 2), 0);
  le("octagon single cone point of angle 6 pi", "octagon",
     o.cone_points().size() == 1 ? std::abs(o.cone_points()[0].angle - 6 * std::numbers::pi) : INFINITY, 1e-9);
  le("octagon area = 2(1 + sqrt 2)", "octagon", std::abs(o.area() - 2 * (1 + std::sqrt(2.0))), 1e-9);
  const auto t1 = FlatSurface::square_torus(1);
  le("torus class (3,4) length = 5", "square-torus(1)", std::abs(geodesic_length(t1, TorusClass{3, 4}).length - 5.0),
     0);

  // Chain corridors on the octagon, their lengths, and exact scaling.
  {
    const auto search = closed_geodesics(o, 3.0);
    const auto o2 = o.scaled(2.0);
    double chain_gap = 0, scale_gap = 0;
    std::string w1, w2;
    for (const auto& g : search.closed) {
      const auto c = chain_corridor(o, search, g);
      const double len = geodesic_length(o, c).length;
      const double len2 = geodesic_length(o2, c).length;
      if (std::abs(len - g.length) >= chain_gap) {
        chain_gap = std::abs(len - g.length);
        w1 = curve_name(c);
      }
      if (std::abs(len2 - 2 * len) >= scale_gap) {
        scale_gap = std::abs(len2 - 2 * len);
        w2 = curve_name(c);
      }
    }
    report("closed geodesics up to L=3", "octagon", double(search.closed.size()));
    le("corridor geodesic = saddle chain length", "octagon, L <= 3", chain_gap, 1e-12, w1);
    le("scaling: length(2 S) - 2 length(S)", "octagon, L <= 3", scale_gap, 0, w2);
    const auto t2 = t1.scaled(2.0);
    double tg = 0;
    for (auto [p, q] : std::initializer_list<std::pair<int, int>>{{1, 0}, {3, 4}, {5, -2}, {7, 11}})
      tg = std::max(tg, std::abs(geodesic_length(t2, TorusClass{p, q}).length -
                                 2 * geodesic_length(t1, TorusClass{p, q}).length));
    le("scaling: length(2 S) - 2 length(S)", "square-torus(1)", tg, 0);
  }

  // Random explicit corridors against the torus shorthand with the same holonomy.
  {
    double worst = 0;
    std::string where;
    int checked = 0;
    for (int trial = 0; trial < 2000 && checked < 60; ++trial) {
      std::vector<int> c;
      const int len = 1 + int(rng() % 14);
      for (int i = 0; i < len; ++i) c.push_back(t1.edge_id(0, int(rng() % 4)));
      Isometry H;
      for (int e : c) H = H.compose(t1.gluing(e));
      if (std::abs(H.shift) < 0.5) continue;
      ++checked;
      const int p = int(std::lround(H.shift.real())), q = int(std::lround(H.shift.imag()));
      const double a = geodesic_length(t1, Corridor{c}).length, b = geodesic_length(t1, TorusClass{p, q}).length;
      const double e = std::abs(a - b);
      if (e >= worst) {
        worst = e;
        where = curve_name(Corridor{c}) + " vs " + curve_name(TorusClass{p, q});
      }
    }
    le("corridor re-expression vs torus shorthand (" + std::to_string(checked) + " corridors)", "square-torus(1)",
       worst, 1e-12, where);
  }

  // Unit-area normalisation.
  {
    const auto u = o.unit_area();
    le("unit area normalisation |area - 1|", "octagon", std::abs(u.area() - 1.0), 1e-12);
    const Corridor c{{0}};
    const double r = geodesic_length(u, c).length * std::sqrt(o.area()) / geodesic_length(o, c).length;
    le("lengths divided by sqrt(area)", "octagon " + curve_name(c), std::abs(r - 1.0), 1e-12);
    report("(pi/2) area after normalisation", "octagon", std::numbers::pi / 2 * u.area());
  }

  // Configured curve queries.
  if (ctx.config && ctx.config->surface) {
    const auto s = make_surface(*ctx.config->surface);
    GeodesicLengthOptions go;
    go.puncture_radius = ctx.config->flat.puncture_radius;
    for (const auto& g : ctx.config->flat.geodesics) {
      try {
        report("geodesic length", "config " + g.name, geodesic_length(s, g.curve, go).length, curve_name(g.curve));
      } catch (const Error& e) {
        failed("geodesic length", "config " + g.name, curve_name(g.curve) + ": " + e.what());
      }
    }
  }
}

void Verifier::State::entropy_suite() {
  const auto t1 = FlatSurface::square_torus(1);
  const auto torus = count_closed_geodesics(t1, even_cutoffs(40.0, 40));
  {
    // Primitive lattice vectors up to sign.
    double bad = 0;
    std::string where;
    for (std::size_t i = 0; i < torus.cutoffs.size(); ++i) {
      const double L = torus.cutoffs[i];
      std::int64_t n = 0;
      for (int a = 0; a <= int(L); ++a)
        for (int b = -int(L); b <= int(L); ++b)
          if (!(a == 0 && b <= 0) && std::gcd(a, b) == 1 && a * a + b * b <= L * L) ++n;
      if (n != torus.counts[i]) {
        if (bad == 0) where = "L=" + num(L);
        ++bad;
      }
    }
    le("torus counts = primitive lattice vectors (cutoffs differing)", "square-torus(1), L <= 40", bad, 0, where);
  }
  const auto ft = entropy_fit(torus);
  le("torus headline entropy at L=40", "square-torus(1)", ft.headline, 0.1);

  const auto& es = ctx.config && ctx.config->entropy ? *ctx.config->entropy : EntropySpec{};
  for (double t : es.t) {
    const double s = 4 * std::sqrt(t);
    std::vector<double> cut;
    for (double L : torus.cutoffs) cut.push_back(s * L);
    const auto f = entropy_fit(count_closed_geodesics(t1.scaled(s), cut));
    const double b = flat_entropy_bound(ft.headline, t);
    le("torus: Ent(g_t) equals the flat bound (relative gap)", "t=" + num(t), std::abs(f.headline - b) / b, 1e-12);
  }

  const auto o = FlatSurface::octagon();
  {
    const auto cut = even_cutoffs(5.0, 20);
    std::vector<double> cut2;
    for (double L : cut) cut2.push_back(2 * L);
    const auto a = count_closed_geodesics(o, cut), b = count_closed_geodesics(o.scaled(2.0), cut2);
    double diff = 0;
    for (std::size_t i = 0; i < cut.size(); ++i) diff += a.counts[i] != b.counts[i];
    le("scaling: counts on matched tables (cutoffs differing)", "octagon x2, L <= 5", diff, 0);
    const auto fa = entropy_fit(a), fb = entropy_fit(b);
    double gap = std::abs(fb.headline - fa.headline / 2);
    for (std::size_t i = 0; i < std::min(fa.windows.size(), fb.windows.size()); ++i)
      gap = std::max(gap, std::abs(fb.windows[i].slope - fa.windows[i].slope / 2));
    if (fa.windows.size() != fb.windows.size()) gap = INFINITY;
    le("scaling: estimate(2 S) - estimate(S)/2", "octagon x2, L <= 5", gap, 0);

    const auto c = count_closed_geodesics(o.scaled(2.0), cut);
    double viol = 0;
    for (std::size_t i = 0; i < cut.size(); ++i) viol += c.counts[i] > a.counts[i];
    le("domination: N_A(L) <= N_B(L) (cutoffs violating)", "A = 2 octagon, B = octagon", viol, 0);
    le("domination: Ent(A) <= Ent(B)", "A = 2 octagon, B = octagon", fb.headline, fa.headline);
  }

  GeodesicOptions go;
  go.budget = es.budget;
  try {
    const auto f = entropy_fit(count_closed_geodesics(o, even_cutoffs(es.L_max, es.cutoffs), go));
    const std::string subj = "octagon, L <= " + num(es.L_max);
    report("headline entropy", subj, f.headline);
    le("window spread", subj, f.spread, 0.10);
    for (double t : es.t) report("flat entropy bound h/(4 sqrt t)", subj + ", t=" + num(t), flat_entropy_bound(f.headline, t));
  } catch (const Error& e) {
    failed("octagon entropy fit", "octagon", e.what());
  }

  if (ctx.config && ctx.config->surface) {
    try {
      const auto f = entropy_fit(count_closed_geodesics(make_surface(*ctx.config->surface),
                                                        even_cutoffs(es.L_max, es.cutoffs), go));
      report("headline entropy", "config", f.headline);
      report("window spread", "config", f.spread);
    } catch (const Error& e) {
      failed("entropy fit", "config", e.what());
    }
  }
}

Verifier::Verifier(VerifyContext ctx) : s_(std::make_unique<State>(std::move(ctx))) {}
Verifier::~Verifier() = default;

const std::vector<std::string>& Verifier::suites() {
  static const std::vector<std::string> names{"domain", "solver", "bounds", "metric", "flat", "entropy"};
  return names;
}

std::vector<Check> Verifier::run(const std::string& suite) {
  if (suite != "all" && std::find(suites().begin(), suites().end(), suite) == suites().end())
    throw std::invalid_argument("unknown suite \"" + suite + "\"");
  const std::size_t first = s_->out.size();
  for (const auto& name : suites()) {
    if (suite != "all" && suite != name) continue;
    s_->suite = name;
    try {
      if (name == "domain") s_->domain_suite();
      else if (name == "solver") s_->solver_suite();
      else if (name == "bounds") s_->bounds_suite();
      else if (name == "metric") s_->metric_suite();
      else if (name == "flat") s_->flat_suite();
      else s_->entropy_suite();
    } catch (const std::exception& e) {
      s_->failed("suite ran to completion", name, e.what());
    }
  }
  return {s_->out.begin() + long(first), s_->out.end()};
}

}  // namespace lab
