// hitchin_lab: command-line front end for the solver, metric, flat-surface and entropy modules.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <thread>

#include "hitchin/bessel.hpp"
#include "hitchin/entropy.hpp"
#include "hitchin/error.hpp"
#include "hitchin/metric.hpp"
#include "hitchin/saddle.hpp"
#include "lab/config.hpp"
#include "lab/io.hpp"
#include "lab/suites.hpp"

namespace fs = std::filesystem;
using namespace hitchin;
using lab::ConfigError;
using lab::json;
using lab::num;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::string suite = "all";
  bool quiet = false;
};

// Exit 1 with the failing invariant named.
struct InvariantFailure {
  std::string what;
};

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HITCHIN_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("HITCHIN_LAB_THREADS must be a positive integer");
    n = std::min(n, unsigned(v));
  }
  return n;
}

lab::RunConfig load(const Flags& f, bool required) {
  lab::RunConfig c;
  if (!f.config.empty()) c = lab::load_config(f.config);
  else if (required) throw ConfigError("--config is required for this subcommand");
  if (f.tol) {
    if (!(*f.tol > 0.0)) throw ConfigError("--tol must be positive");
    c.solver.tolerance = *f.tol;
    c.tol.residual = *f.tol;
  }
  if (!f.out.empty()) c.out_dir = f.out;
  return c;
}

fs::path out_dir(const lab::RunConfig& c) {
  fs::path p(c.out_dir);
  fs::create_directories(p);
  return p;
}

void need_problem(const lab::RunConfig& c) {
  if (!c.domain) throw ConfigError("config error at domain: required for this subcommand");
  if (!c.differential) throw ConfigError("config error at differential: required for this subcommand");
}

// Inputs are built before any computation; library rejections count as config errors.
template <class F>
auto build_input(F f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid input: ") + e.what());
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("invalid input: ") + e.what());
  }
}

json bracket_json(const SolutionPair& s) {
  return {{"sub_margin", s.bracket.sub_margin}, {"super_margin", s.bracket.super_margin}};
}

json bounds_json(const BoundReport& r) {
  json j;
  j["min_3psi2_minus_psi1"] = r.min_3psi2_minus_psi1;
  j["max_3psi2_minus_psi1"] = r.max_3psi2_minus_psi1;
  j["min_g_over_flat"] = r.min_g_over_flat ? json(*r.min_g_over_flat) : json(nullptr);
  j["min_g_over_const"] = r.min_g_over_const ? json(*r.min_g_over_const) : json(nullptr);
  j["max_kappa_g"] = r.max_kappa_g;
  j["max_f1_plus_f2"] = r.max_f1_plus_f2;
  json regions = json::array();
  for (const auto& a : r.regions)
    regions.push_back({{"name", a.name},
                       {"area_g", a.area_g},
                       {"area_flat", a.area_flat},
                       {"ratio", a.ratio},
                       {"upper_bound", a.upper_bound}});
  j["regions"] = regions;
  return j;
}

int cmd_solve(const Flags& f) {
  auto c = load(f, true);
  need_problem(c);
  auto bg = build_input([&] { return lab::make_background(*c.domain); });
  auto q = build_input([&] { return lab::make_quartic(*c.differential, bg.lattice()); });
  const auto dir = out_dir(c);

  SolutionPair s;
  try {
    s = solve_hitchin(bg, q, c.solver);
  } catch (const NonConvergence& e) {
    throw InvariantFailure{std::string("solver convergence: ") + e.what()};
  } catch (const BracketViolation& e) {
    throw InvariantFailure{"bracket: solution left [sub, super] at " + lab::describe_node(bg.lattice(), e.node()) +
                           " (margin " + num(e.margin()) + ")"};
  }
  const auto m = induced_metric(s, bg, q);
  const auto rep = bound_report(s, bg, q);

  lab::write_background_csv(dir / "background.csv", bg);
  lab::write_solution_csv(dir / "solution.csv", bg, s);
  {
    const auto& lat = bg.lattice();
    lab::CsvWriter w(dir / "metric.csv", {"x", "y", "g", "f1", "f2", "kappa_g", "kappa_g_discrete", "chain"});
    for (std::size_t k = 0; k < lat.size(); ++k) {
      if (!lat.active(k)) continue;
      w << lat.z(k).real() << lat.z(k).imag() << m.g[k] << m.f1[k] << m.f2[k] << m.kappa_g[k] << m.kappa_g_discrete[k]
        << 3 * s.psi2[k] - s.psi1[k];
      w.end_row();
    }
  }
  json j;
  j["schema_version"] = lab::kSchemaVersion;
  j["command"] = "solve";
  j["domain"] = lab::describe(*c.domain);
  j["differential"] = lab::describe(*c.differential);
  j["residual"] = s.residual_inf;
  j["iterations"] = s.iterations;
  j["history"] = s.history;
  j["bracket"] = bracket_json(s);
  j["bounds"] = bounds_json(rep);
  lab::write_json(dir / "summary.json", j);
  if (!f.quiet) {
    std::cout << "residual " << num(s.residual_inf) << " after " << s.iterations << " iterations\n"
              << "bracket margins: sub " << num(s.bracket.sub_margin) << ", super " << num(s.bracket.super_margin)
              << "\n"
              << "wrote " << (dir / "solution.csv").string() << ", " << (dir / "summary.json").string() << "\n";
  }
  if (!(s.residual_inf <= c.solver.tolerance))
    throw InvariantFailure{"solver convergence: residual " + num(s.residual_inf) + " above tolerance"};
  return 0;
}

int cmd_sweep(const Flags& f) {
  auto c = load(f, true);
  need_problem(c);
  auto bg = build_input([&] { return lab::make_background(*c.domain); });
  auto q = build_input([&] { return lab::make_quartic(*c.differential, bg.lattice()); });
  if (q.identically_zero()) throw ConfigError("sweep needs a nonzero differential");
  const auto dir = out_dir(c);

  RaySweepOptions o;
  o.solver = c.solver;
  o.parallel = c.sweep_parallel;
  o.threads = thread_cap();
  o.eps_fraction = c.eps_fraction;
  const auto rep = ray_sweep(bg, q, c.t_list, o);

  lab::CsvWriter w(dir / "sweep.csv", {"t", "ok", "residual", "iterations", "min_increment", "ratio_deviation",
                                       "area_ratio"});
  lab::CsvWriter dev(dir / "ray_deviation.csv", {"t", "ratio_deviation"});
  lab::CsvWriter area(dir / "ray_area.csv", {"t", "area_ratio"});
  std::vector<std::string> failures;
  json steps = json::array();
  for (const auto& st : rep.steps) {
    const double inc = st.has_increment ? st.min_increment : std::nan("");
    w << st.t << (st.ok ? 1 : 0) << (st.ok ? st.solution.residual_inf : std::nan("")) << st.solution.iterations << inc
      << st.ratio_deviation << st.area_ratio;
    w.end_row();
    if (!st.ok) {
      failures.push_back("solver convergence at t=" + num(st.t) + ": " + st.error);
      continue;
    }
    dev << st.t << st.ratio_deviation;
    dev.end_row();
    area << st.t << st.area_ratio;
    area.end_row();
    if (st.has_increment && !(st.min_increment > 0.0))
      failures.push_back("monotonicity in t: min increment of psi1 - psi2 is " + num(st.min_increment) +
                         " at t=" + num(st.t));
    steps.push_back({{"t", st.t},
                     {"residual", st.solution.residual_inf},
                     {"iterations", st.solution.iterations},
                     {"min_increment", st.has_increment ? json(st.min_increment) : json(nullptr)},
                     {"ratio_deviation", st.ratio_deviation},
                     {"area_ratio", st.area_ratio}});
  }
  json j;
  j["schema_version"] = lab::kSchemaVersion;
  j["command"] = "sweep";
  j["domain"] = lab::describe(*c.domain);
  j["differential"] = lab::describe(*c.differential);
  j["eps_fraction"] = c.eps_fraction;
  j["far_mask_nodes"] = std::count(rep.far_mask.begin(), rep.far_mask.end(), 1);
  j["steps"] = steps;
  lab::write_json(dir / "sweep.json", j);
  if (!f.quiet)
    for (const auto& st : rep.steps)
      std::cout << "t=" << num(st.t) << (st.ok ? "" : " FAILED") << " min_increment="
                << (st.has_increment ? num(st.min_increment) : "-") << " ratio_deviation=" << num(st.ratio_deviation)
                << "\n";
  if (!failures.empty()) throw InvariantFailure{failures.front()};
  return 0;
}

int cmd_verify(const Flags& f) {
  const auto c = load(f, false);
  const bool configured = !f.config.empty();
  if (configured) {
    if (c.domain && c.differential) {
      auto bg = build_input([&] { return lab::make_background(*c.domain); });
      build_input([&] { return lab::make_quartic(*c.differential, bg.lattice()); });
    }
    if (c.surface) build_input([&] { return lab::make_surface(*c.surface); });
  }
  lab::VerifyContext ctx;
  ctx.config = configured || f.tol ? &c : nullptr;
  ctx.seed = f.seed;
  ctx.threads = thread_cap();
  ctx.on_check = [&](const lab::Check& k) {
    if (f.quiet && k.pass) return;
    const bool rep = k.relation == "report";
    std::cout << (rep ? "INFO" : k.pass ? "PASS" : "FAIL") << " [" << k.suite << "] " << k.invariant << " | "
              << k.subject << " | " << num(k.value);
    if (!rep) std::cout << " " << k.relation << " " << num(k.bound) << " (margin " << num(k.margin()) << ")";
    if (!k.where.empty()) std::cout << " | " << k.where;
    std::cout << "\n" << std::flush;
  };
  lab::Verifier v(ctx);
  std::vector<lab::Check> checks;
  try {
    checks = v.run(f.suite);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--suite: ") + e.what());
  }
  const auto failed = std::count_if(checks.begin(), checks.end(), [](const auto& k) { return !k.pass; });
  if (!f.out.empty() || (configured && c.out_dir != lab::RunConfig{}.out_dir)) {
    const auto dir = out_dir(c);
    lab::CsvWriter w(dir / "verify.csv",
                     {"suite", "invariant", "subject", "value", "relation", "bound", "margin", "status", "where"});
    auto quote = [](std::string s) {
      std::string o = "\"";
      for (char ch : s) o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return o + "\"";
    };
    json list = json::array();
    for (const auto& k : checks) {
      const std::string status = k.relation == "report" ? "info" : k.pass ? "pass" : "fail";
      w << k.suite << quote(k.invariant) << quote(k.subject) << k.value << quote(k.relation) << k.bound << k.margin()
        << status << quote(k.where);
      w.end_row();
      list.push_back({{"suite", k.suite},
                      {"invariant", k.invariant},
                      {"subject", k.subject},
                      {"value", k.value},
                      {"relation", k.relation},
                      {"bound", k.bound},
                      {"margin", k.margin()},
                      {"status", status},
                      {"where", k.where}});
    }
    json j;
    j["schema_version"] = lab::kSchemaVersion;
    j["command"] = "verify";
    j["suite"] = f.suite;
    j["seed"] = f.seed;
    j["checks"] = checks.size();
    j["failed"] = failed;
    j["results"] = list;
    lab::write_json(dir / "verify.json", j);
  }
  std::cout << "verify " << f.suite << ": " << checks.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

std::string curve_text(const CurveClass& c) {
  if (const auto* t = std::get_if<TorusClass>(&c)) return std::to_string(t->p) + " " + std::to_string(t->q);
  std::string s;
  for (int e : std::get<Corridor>(c).edges) s += (s.empty() ? "" : " ") + std::to_string(e);
  return s;
}

int cmd_flat(const Flags& f) {
  const auto c = load(f, true);
  if (!c.surface) throw ConfigError("config error at surface: required for this subcommand");
  const auto s = build_input([&] { return lab::make_surface(*c.surface); });
  const auto dir = out_dir(c);

  GeodesicOptions so;
  so.saddle.budget = c.flat.budget;
  SaddleReport rep;
  try {
    rep = systole_and_saddles(s, c.flat.saddle_length, so);
  } catch (const BudgetExceeded& e) {
    throw InvariantFailure{std::string("saddle connection budget: ") + e.what()};
  }
  lab::CsvWriter w(dir / "saddles.csv", {"dx", "dy", "length", "start_vertex", "end_vertex"});
  for (const auto& sc : rep.saddles) {
    w << sc.vector.real() << sc.vector.imag() << sc.length << sc.start_vertex << sc.end_vertex;
    w.end_row();
  }

  GeodesicLengthOptions go;
  go.puncture_radius = c.flat.puncture_radius;
  lab::CsvWriter g(dir / "geodesics.csv", {"name", "kind", "curve", "length", "moves", "cone_points"});
  std::vector<std::string> failures;
  json curves = json::array();
  for (const auto& q : c.flat.geodesics) {
    const std::string kind = std::holds_alternative<TorusClass>(q.curve) ? "torus_class" : "corridor";
    try {
      const auto r = geodesic_length(s, q.curve, go);
      std::string cones;
      for (int v : r.cone_points) cones += (cones.empty() ? "" : " ") + std::to_string(v);
      g << q.name << kind << curve_text(q.curve) << r.length << r.moves << cones;
      g.end_row();
      curves.push_back({{"name", q.name}, {"length", r.length}, {"moves", r.moves}, {"cone_points", r.cone_points}});
      if (!f.quiet) std::cout << "geodesic " << q.name << ": length " << num(r.length) << "\n";
    } catch (const Error& e) {
      failures.push_back("geodesic " + q.name + " (" + kind + " " + curve_text(q.curve) + "): " + e.what());
    }
  }

  json j;
  j["schema_version"] = lab::kSchemaVersion;
  j["command"] = "flat";
  j["genus"] = s.genus();
  j["euler_characteristic"] = s.euler_characteristic();
  j["area"] = s.area();
  j["normalised_intersection"] = std::numbers::pi / 2 * s.area();
  json cones = json::array();
  int sum_k = 0;
  for (const auto& cp : s.cone_points()) {
    cones.push_back({{"angle", cp.angle}, {"k", cp.k}, {"corners", cp.corners.size()}});
    sum_k += cp.k;
  }
  j["cone_points"] = cones;
  j["sum_k"] = sum_k;
  j["saddle_length"] = c.flat.saddle_length;
  j["saddle_connections"] = rep.saddles.size();
  j["systole"] = rep.systole ? json(*rep.systole) : json(nullptr);
  j["geodesics"] = curves;
  lab::write_json(dir / "surface.json", j);
  if (!f.quiet)
    std::cout << "genus " << s.genus() << ", area " << num(s.area()) << ", " << rep.saddles.size()
              << " saddle connections up to " << num(c.flat.saddle_length) << ", systole "
              << (rep.systole ? num(*rep.systole) : "-") << "\n";
  if (!failures.empty()) throw InvariantFailure{failures.front()};
  return 0;
}

int cmd_entropy(const Flags& f) {
  const auto c = load(f, true);
  if (!c.surface) throw ConfigError("config error at surface: required for this subcommand");
  const auto s = build_input([&] { return lab::make_surface(*c.surface); });
  const auto es = c.entropy.value_or(lab::EntropySpec{});
  const auto dir = out_dir(c);

  GeodesicOptions go;
  go.budget = es.budget;
  CountTable t;
  EntropyFit fit;
  try {
    t = count_closed_geodesics(s, even_cutoffs(es.L_max, es.cutoffs), go);
    fit = entropy_fit(t);
  } catch (const BudgetExceeded& e) {
    throw InvariantFailure{std::string("enumeration budget: ") + e.what()};
  } catch (const GeometryError& e) {
    throw InvariantFailure{std::string("entropy fit: ") + e.what()};
  }
  lab::CsvWriter w(dir / "entropy.csv", {"L", "N", "window_slope"});
  for (std::size_t i = 0; i < t.cutoffs.size(); ++i) {
    double slope = std::nan("");
    for (const auto& win : fit.windows)
      if (win.end == t.cutoffs[i]) slope = win.slope;
    w << t.cutoffs[i] << static_cast<long long>(t.counts[i]) << slope;
    w.end_row();
  }
  lab::CsvWriter b(dir / "entropy_bound.csv", {"t", "bound"});
  json curve = json::array();
  for (double tt : es.t) {
    b << tt << flat_entropy_bound(fit.headline, tt);
    b.end_row();
    curve.push_back({{"t", tt}, {"bound", flat_entropy_bound(fit.headline, tt)}});
  }
  json j;
  j["schema_version"] = lab::kSchemaVersion;
  j["command"] = "entropy";
  j["L_max"] = es.L_max;
  j["cutoffs"] = es.cutoffs;
  j["headline"] = fit.headline;
  j["spread"] = fit.spread;
  j["windows"] = fit.windows.size();
  j["bound_curve"] = curve;
  lab::write_json(dir / "entropy.json", j);
  if (!f.quiet)
    std::cout << "N(" << num(es.L_max) << ") = " << t.counts.back() << ", headline " << num(fit.headline)
              << ", spread " << num(fit.spread) << "\n";
  return 0;
}

int cmd_bessel(const Flags& f) {
  const auto c = load(f, false);
  const auto dir = out_dir(c);
  std::vector<double> xs = c.bessel_x;
  if (xs.empty())
    for (int i = 1; i <= 40; ++i) xs.push_back(i);
  lab::CsvWriter w(dir / "bessel.csv", {"x", "series", "asymptotic", "relative_difference", "scaled"});
  for (double x : xs) {
    const double s = bessel_i0_series(x), a = bessel_i0_asymptotic(x);
    w << x << s << a << std::abs(s - a) / s << bessel_i0_scaled(x);
    w.end_row();
  }

  // Decay of u1 + u2 against the barrier, one plot-ready file per mass factor.
  const auto d = decay_scaling(129, 1e5, {1, 4, 16});
  json profiles = json::array();
  for (std::size_t i = 0; i < d.profiles.size(); ++i) {
    const auto& p = d.profiles[i];
    lab::CsvWriter u(dir / ("decay_" + std::to_string(i) + ".csv"), {"flat_distance", "u"});
    for (std::size_t k = 0; k < p.u.size(); ++k) {
      u << p.flat_distance[k] << p.u[k];
      u.end_row();
    }
    profiles.push_back({{"mass_factor", d.mass_factors[i]},
                        {"coefficient", d.coefficients[i]},
                        {"rate", p.rate},
                        {"rate_ratio", d.rate_ratio[i]},
                        {"expected_ratio", d.expected_ratio[i]},
                        {"center_value", p.center_value},
                        {"oracle_center", p.oracle_center}});
  }
  const double s30 = bessel_i0_series(30.0);
  json j;
  j["schema_version"] = lab::kSchemaVersion;
  j["command"] = "bessel";
  j["relative_difference_at_30"] = std::abs(s30 - bessel_i0_asymptotic(30.0)) / s30;
  j["decay"] = profiles;
  lab::write_json(dir / "bessel.json", j);
  if (!f.quiet) std::cout << "I0 table: " << xs.size() << " rows; decay profiles: " << d.profiles.size() << "\n";
  for (std::size_t i = 0; i < d.profiles.size(); ++i)
    if (!(d.profiles[i].center_value <= d.profiles[i].oracle_center))
      throw InvariantFailure{"Bessel barrier: center value above the oracle for mass factor " +
                             num(d.mass_factors[i])};
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the cyclic Hitchin system, flat surfaces and entropy"};
  app.require_subcommand(1);
  Flags flags;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "seed for randomised test-point selection");
    sub->add_option("--tol", flags.tol, "Newton residual tolerance");
    sub->add_flag("--quiet", flags.quiet, "print failures and the final line only");
  };
  auto* solve = app.add_subcommand("solve", "one Hitchin solve: solution CSV and JSON summary");
  auto* sweep = app.add_subcommand("sweep", "ray sweep t -> t q: per-t CSV");
  auto* verify = app.add_subcommand("verify", "invariant suites; exit 0 iff every check passes");
  auto* flat = app.add_subcommand("flat", "surface build, saddle connections, systole and geodesic queries");
  auto* entropy = app.add_subcommand("entropy", "closed geodesic counting and entropy fit");
  auto* bessel = app.add_subcommand("bessel", "Bessel I0 oracle table and decay profiles");
  for (auto* s : {solve, sweep, verify, flat, entropy, bessel}) common(s);
  verify->add_option("--suite", flags.suite, "domain, solver, bounds, metric, flat, entropy or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return cmd_solve(flags);
    if (*sweep) return cmd_sweep(flags);
    if (*verify) return cmd_verify(flags);
    if (*flat) return cmd_flat(flags);
    if (*entropy) return cmd_entropy(flags);
    return cmd_bessel(flags);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantFailure& e) {
    std::cerr << "invariant failure: " << e.what << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
