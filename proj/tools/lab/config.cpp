#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "hitchin/error.hpp"

namespace lab {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config error at " + where + ": " + what);
}

std::string at(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const json& o, const std::string& path, std::set<std::string> keys) {
  if (!o.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = o.begin(); it != o.end(); ++it)
    if (!keys.count(it.key())) fail(at(path, it.key()), "unknown key");
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "must be finite");
  return x;
}

double positive(const json& v, const std::string& where) {
  const double x = number(v, where);
  if (!(x > 0.0)) fail(where, "must be positive");
  return x;
}

std::int64_t integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<std::int64_t>();
}

bool boolean(const json& v, const std::string& where) {
  if (!v.is_boolean()) fail(where, "expected true or false");
  return v.get<bool>();
}

std::complex<double> complex_number(const json& v, const std::string& where) {
  if (v.is_number()) return number(v, where);
  if (!v.is_array() || v.size() != 2) fail(where, "expected a number or a [re, im] pair");
  return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
}

std::vector<double> increasing_positive(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(positive(v[i], where + "[" + std::to_string(i) + "]"));
    if (i > 0 && !(out[i] > out[i - 1])) fail(where, "must be strictly increasing");
  }
  return out;
}

DomainSpec parse_domain(const json& o) {
  only_keys(o, "domain", {"kind", "lx", "ly", "sigma", "radius", "n"});
  DomainSpec d;
  if (!o.contains("kind") || !o["kind"].is_string()) fail("domain.kind", "expected \"torus\" or \"disk\"");
  const auto kind = o["kind"].get<std::string>();
  if (kind == "torus") {
    d.kind = hitchin::DomainKind::torus;
    if (o.contains("radius")) fail("domain.radius", "not a torus parameter");
  } else if (kind == "disk") {
    d.kind = hitchin::DomainKind::disk;
    d.n = 97;
    for (const char* k : {"lx", "ly", "sigma"})
      if (o.contains(k)) fail(at("domain", k), "not a disk parameter");
  } else {
    fail("domain.kind", "expected \"torus\" or \"disk\", got \"" + kind + "\"");
  }
  if (o.contains("n")) {
    const auto n = integer(o["n"], "domain.n");
    if (n < 5 || n > 4097) fail("domain.n", "resolution must lie in [5, 4097], got " + std::to_string(n));
    d.n = int(n);
  }
  if (o.contains("lx")) d.lx = positive(o["lx"], "domain.lx");
  if (o.contains("ly")) d.ly = positive(o["ly"], "domain.ly");
  if (o.contains("sigma")) d.sigma = positive(o["sigma"], "domain.sigma");
  if (o.contains("radius")) {
    d.radius = positive(o["radius"], "domain.radius");
    if (!(d.radius < 1.0)) fail("domain.radius", "must lie in (0, 1)");
  }
  return d;
}

DifferentialSpec parse_differential(const json& o) {
  only_keys(o, "differential", {"form", "value", "coefficients", "phase"});
  DifferentialSpec d;
  if (!o.contains("form") || !o["form"].is_string()) fail("differential.form", "expected \"constant\" or \"polynomial\"");
  const auto form = o["form"].get<std::string>();
  if (form == "constant") {
    if (!o.contains("value")) fail("differential.value", "required for the constant form");
    if (o.contains("coefficients")) fail("differential.coefficients", "not used by the constant form");
    d.constant = true;
    d.coefficients = {complex_number(o["value"], "differential.value")};
  } else if (form == "polynomial") {
    if (!o.contains("coefficients")) fail("differential.coefficients", "required for the polynomial form");
    if (o.contains("value")) fail("differential.value", "not used by the polynomial form");
    const auto& c = o["coefficients"];
    if (!c.is_array() || c.empty()) fail("differential.coefficients", "expected a non-empty array");
    d.constant = false;
    d.coefficients.clear();
    for (std::size_t i = 0; i < c.size(); ++i)
      d.coefficients.push_back(complex_number(c[i], "differential.coefficients[" + std::to_string(i) + "]"));
  } else {
    fail("differential.form", "expected \"constant\" or \"polynomial\", got \"" + form + "\"");
  }
  if (o.contains("phase")) d.phase = number(o["phase"], "differential.phase");
  return d;
}

void parse_solver(const json& o, hitchin::SolverOptions& s) {
  only_keys(o, "solver",
            {"tolerance", "max_iterations", "min_step", "clip_to_bracket", "check_bracket", "bracket_tolerance"});
  if (o.contains("tolerance")) s.tolerance = positive(o["tolerance"], "solver.tolerance");
  if (o.contains("max_iterations")) {
    const auto m = integer(o["max_iterations"], "solver.max_iterations");
    if (m < 1 || m > 10000) fail("solver.max_iterations", "must lie in [1, 10000]");
    s.max_iterations = int(m);
  }
  if (o.contains("min_step")) {
    s.min_step = positive(o["min_step"], "solver.min_step");
    if (s.min_step > 1.0) fail("solver.min_step", "must not exceed 1");
  }
  if (o.contains("clip_to_bracket")) s.clip_to_bracket = boolean(o["clip_to_bracket"], "solver.clip_to_bracket");
  if (o.contains("check_bracket")) s.check_bracket = boolean(o["check_bracket"], "solver.check_bracket");
  if (o.contains("bracket_tolerance"))
    s.bracket_tolerance = positive(o["bracket_tolerance"], "solver.bracket_tolerance");
}

hitchin::Point point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) fail(where, "expected an [x, y] pair");
  return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
}

SurfaceSpec parse_surface(const json& o) {
  only_keys(o, "surface", {"builtin", "n", "polygons", "pairings", "allow_punctures", "scale", "unit_area"});
  SurfaceSpec s;
  if (o.contains("builtin")) {
    if (!o["builtin"].is_string()) fail("surface.builtin", "expected a string");
    s.builtin = o["builtin"].get<std::string>();
    if (s.builtin != "octagon" && s.builtin != "square-torus")
      fail("surface.builtin", "expected \"octagon\" or \"square-torus\", got \"" + s.builtin + "\"");
    if (o.contains("polygons") || o.contains("pairings")) fail("surface", "builtin and polygons are exclusive");
    if (o.contains("n")) {
      if (s.builtin != "square-torus") fail("surface.n", "only square-torus takes n");
      const auto n = integer(o["n"], "surface.n");
      if (n < 1 || n > 64) fail("surface.n", "must lie in [1, 64]");
      s.n = int(n);
    }
  } else {
    if (!o.contains("polygons") || !o.contains("pairings")) fail("surface", "need builtin, or polygons and pairings");
    if (o.contains("n")) fail("surface.n", "only square-torus takes n");
    const auto& P = o["polygons"];
    if (!P.is_array() || P.empty()) fail("surface.polygons", "expected a non-empty array");
    for (std::size_t i = 0; i < P.size(); ++i) {
      const std::string w = "surface.polygons[" + std::to_string(i) + "]";
      if (!P[i].is_array() || P[i].size() < 3) fail(w, "a polygon needs at least 3 vertices");
      std::vector<hitchin::Point> poly;
      for (std::size_t v = 0; v < P[i].size(); ++v) poly.push_back(point(P[i][v], w + "[" + std::to_string(v) + "]"));
      s.polygons.push_back(std::move(poly));
    }
    const auto& G = o["pairings"];
    if (!G.is_array()) fail("surface.pairings", "expected an array of [edge, edge, k] triples");
    for (std::size_t i = 0; i < G.size(); ++i) {
      const std::string w = "surface.pairings[" + std::to_string(i) + "]";
      if (!G[i].is_array() || G[i].size() != 3) fail(w, "expected [edge, edge, k]");
      s.pairings.push_back({int(integer(G[i][0], w + "[0]")), int(integer(G[i][1], w + "[1]")),
                            int(integer(G[i][2], w + "[2]"))});
    }
  }
  if (o.contains("allow_punctures")) s.allow_punctures = boolean(o["allow_punctures"], "surface.allow_punctures");
  if (o.contains("scale")) s.scale = positive(o["scale"], "surface.scale");
  if (o.contains("unit_area")) s.unit_area = boolean(o["unit_area"], "surface.unit_area");
  return s;
}

FlatSpec parse_flat(const json& o) {
  only_keys(o, "flat", {"saddle_length", "geodesics", "puncture_radius", "budget"});
  FlatSpec f;
  if (o.contains("saddle_length")) f.saddle_length = positive(o["saddle_length"], "flat.saddle_length");
  if (o.contains("puncture_radius")) {
    f.puncture_radius = number(o["puncture_radius"], "flat.puncture_radius");
    if (f.puncture_radius < 0.0) fail("flat.puncture_radius", "must be non-negative");
  }
  if (o.contains("budget")) {
    f.budget = integer(o["budget"], "flat.budget");
    if (f.budget < 1) fail("flat.budget", "must be positive");
  }
  if (o.contains("geodesics")) {
    const auto& G = o["geodesics"];
    if (!G.is_array()) fail("flat.geodesics", "expected an array");
    for (std::size_t i = 0; i < G.size(); ++i) {
      const std::string w = "flat.geodesics[" + std::to_string(i) + "]";
      only_keys(G[i], w, {"name", "corridor", "torus_class"});
      GeodesicQuery g;
      g.name = G[i].contains("name") && G[i]["name"].is_string() ? G[i]["name"].get<std::string>()
                                                                  : "curve" + std::to_string(i);
      if (G[i].contains("corridor") == G[i].contains("torus_class")) fail(w, "need exactly one of corridor, torus_class");
      if (G[i].contains("corridor")) {
        const auto& c = G[i]["corridor"];
        if (!c.is_array() || c.empty()) fail(w + ".corridor", "expected a non-empty array of edge ids");
        hitchin::Corridor cor;
        for (std::size_t k = 0; k < c.size(); ++k) cor.edges.push_back(int(integer(c[k], w + ".corridor")));
        g.curve = cor;
      } else {
        const auto& c = G[i]["torus_class"];
        if (!c.is_array() || c.size() != 2) fail(w + ".torus_class", "expected [p, q]");
        g.curve = hitchin::TorusClass{int(integer(c[0], w + ".torus_class")), int(integer(c[1], w + ".torus_class"))};
      }
      f.geodesics.push_back(std::move(g));
    }
  }
  return f;
}

EntropySpec parse_entropy(const json& o) {
  only_keys(o, "entropy", {"L_max", "cutoffs", "budget", "t"});
  EntropySpec e;
  if (o.contains("L_max")) e.L_max = positive(o["L_max"], "entropy.L_max");
  if (o.contains("cutoffs")) {
    const auto c = integer(o["cutoffs"], "entropy.cutoffs");
    if (c < 4 || c > 100000) fail("entropy.cutoffs", "must lie in [4, 100000]");
    e.cutoffs = int(c);
  }
  if (o.contains("budget")) {
    e.budget = integer(o["budget"], "entropy.budget");
    if (e.budget < 1) fail("entropy.budget", "must be positive");
  }
  if (o.contains("t")) e.t = increasing_positive(o["t"], "entropy.t");
  return e;
}

}  // namespace

RunConfig parse_config(const json& j) {
  only_keys(j, "", {"schema_version", "domain", "differential", "solver", "sweep", "surface", "flat", "entropy",
                    "bessel", "verify", "tolerances", "output", "description"});
  if (!j.contains("schema_version")) fail("schema_version", "required");
  if (integer(j["schema_version"], "schema_version") != kSchemaVersion)
    fail("schema_version", "unsupported version " + j["schema_version"].dump() + " (expected 1)");
  RunConfig c;
  if (j.contains("domain")) c.domain = parse_domain(j["domain"]);
  if (j.contains("differential")) c.differential = parse_differential(j["differential"]);
  if (c.differential && !c.domain) fail("differential", "needs a domain");
  if (c.differential && c.domain && c.domain->kind == hitchin::DomainKind::torus && !c.differential->constant &&
      c.differential->coefficients.size() > 1)
    fail("differential", "a non-constant polynomial is not periodic on a torus");
  if (j.contains("solver")) parse_solver(j["solver"], c.solver);
  if (j.contains("sweep")) {
    const auto& o = j["sweep"];
    only_keys(o, "sweep", {"t", "parallel", "eps_fraction"});
    if (o.contains("t")) c.t_list = increasing_positive(o["t"], "sweep.t");
    if (o.contains("parallel")) c.sweep_parallel = boolean(o["parallel"], "sweep.parallel");
    if (o.contains("eps_fraction")) {
      c.eps_fraction = positive(o["eps_fraction"], "sweep.eps_fraction");
      if (c.eps_fraction >= 0.5) fail("sweep.eps_fraction", "must lie in (0, 0.5)");
    }
  }
  if (j.contains("surface")) c.surface = parse_surface(j["surface"]);
  if (j.contains("flat")) c.flat = parse_flat(j["flat"]);
  if (j.contains("entropy")) c.entropy = parse_entropy(j["entropy"]);
  if (j.contains("bessel")) {
    const auto& o = j["bessel"];
    only_keys(o, "bessel", {"x"});
    if (o.contains("x")) c.bessel_x = increasing_positive(o["x"], "bessel.x");
  }
  if (j.contains("verify")) {
    const auto& o = j["verify"];
    only_keys(o, "verify", {"jacobian_points", "phases"});
    if (o.contains("jacobian_points")) {
      const auto n = integer(o["jacobian_points"], "verify.jacobian_points");
      if (n < 1 || n > 100000) fail("verify.jacobian_points", "must lie in [1, 100000]");
      c.jacobian_points = int(n);
    }
    if (o.contains("phases")) {
      const auto& p = o["phases"];
      if (!p.is_array() || p.empty()) fail("verify.phases", "expected a non-empty array");
      c.phases.clear();
      for (std::size_t i = 0; i < p.size(); ++i) c.phases.push_back(number(p[i], "verify.phases"));
    }
  }
  if (j.contains("tolerances")) {
    const auto& o = j["tolerances"];
    only_keys(o, "tolerances", {"residual", "bound", "jacobian", "uniqueness"});
    if (o.contains("residual")) c.tol.residual = positive(o["residual"], "tolerances.residual");
    if (o.contains("bound")) c.tol.bound = positive(o["bound"], "tolerances.bound");
    if (o.contains("jacobian")) c.tol.jacobian = positive(o["jacobian"], "tolerances.jacobian");
    if (o.contains("uniqueness")) c.tol.uniqueness = positive(o["uniqueness"], "tolerances.uniqueness");
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    only_keys(o, "output", {"dir"});
    if (o.contains("dir")) {
      if (!o["dir"].is_string() || o["dir"].get<std::string>().empty()) fail("output.dir", "expected a path");
      c.out_dir = o["dir"].get<std::string>();
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

hitchin::ConformalBackground make_background(const DomainSpec& d) {
  if (d.kind == hitchin::DomainKind::torus) return hitchin::build_torus_background(d.lx, d.ly, d.n, d.sigma);
  return hitchin::build_disk_background(d.radius, d.n);
}

hitchin::QuarticInput make_quartic(const DifferentialSpec& d, const hitchin::Lattice& lattice) {
  auto q = d.constant ? hitchin::QuarticInput::constant(d.coefficients.front(), lattice)
                      : hitchin::QuarticInput::polynomial(d.coefficients, lattice);
  return d.phase != 0.0 ? q.rotated(d.phase) : q;
}

hitchin::FlatSurface make_surface(const SurfaceSpec& s) {
  hitchin::FlatSurface f = s.builtin == "octagon"        ? hitchin::FlatSurface::octagon()
                           : s.builtin == "square-torus" ? hitchin::FlatSurface::square_torus(s.n)
                                                         : hitchin::FlatSurface::build(s.polygons, s.pairings,
                                                                                       s.allow_punctures);
  if (s.scale != 1.0) f = f.scaled(s.scale);
  if (s.unit_area) f = f.unit_area();
  return f;
}

json describe(const DomainSpec& d) {
  json j;
  if (d.kind == hitchin::DomainKind::torus) {
    j["kind"] = "torus";
    j["lx"] = d.lx;
    j["ly"] = d.ly;
    j["sigma"] = d.sigma;
  } else {
    j["kind"] = "disk";
    j["radius"] = d.radius;
  }
  j["n"] = d.n;
  return j;
}

json describe(const DifferentialSpec& d) {
  json j;
  j["form"] = d.constant ? "constant" : "polynomial";
  json c = json::array();
  for (auto z : d.coefficients) c.push_back(json::array({z.real(), z.imag()}));
  j["coefficients"] = c;
  j["phase"] = d.phase;
  return j;
}

}  // namespace lab
