#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hitchin/background.hpp"
#include "hitchin/flat_surface.hpp"
#include "hitchin/geodesic.hpp"
#include "hitchin/quartic.hpp"
#include "hitchin/solver.hpp"
#include "io.hpp"

namespace lab {

inline constexpr int kSchemaVersion = 1;

/// Raised for anything wrong with a configuration file; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DomainSpec {
  hitchin::DomainKind kind = hitchin::DomainKind::torus;
  double lx = 1.0;
  double ly = 1.0;
  double sigma = 1.0;
  double radius = 0.9;
  int n = 64;
};

struct DifferentialSpec {
  bool constant = true;
  std::vector<std::complex<double>> coefficients{16.0};
  double phase = 0.0;
};

struct SurfaceSpec {
  std::string builtin;  ///< "octagon", "square-torus" or empty for explicit polygons
  int n = 1;
  std::vector<std::vector<hitchin::Point>> polygons;
  std::vector<hitchin::Pairing> pairings;
  bool allow_punctures = false;
  double scale = 1.0;
  bool unit_area = false;
};

struct GeodesicQuery {
  std::string name;
  hitchin::CurveClass curve;
};

struct FlatSpec {
  double saddle_length = 3.0;
  std::vector<GeodesicQuery> geodesics;
  double puncture_radius = 0.0;
  std::int64_t budget = 20'000'000;
};

struct EntropySpec {
  double L_max = 9.5;
  int cutoffs = 38;
  std::int64_t budget = 400'000'000;
  std::vector<double> t{1.0, 4.0, 16.0};
};

struct Tolerances {
  double residual = 1e-10;
  double bound = 1e-6;
  double jacobian = 1e-6;
  double uniqueness = 1e-8;
};

struct RunConfig {
  std::optional<DomainSpec> domain;
  std::optional<DifferentialSpec> differential;
  hitchin::SolverOptions solver;
  std::vector<double> t_list{1.0, 2.0, 4.0, 8.0};
  bool sweep_parallel = false;
  double eps_fraction = 0.15;
  std::optional<SurfaceSpec> surface;
  FlatSpec flat;
  std::optional<EntropySpec> entropy;
  std::vector<double> bessel_x;
  int jacobian_points = 34;
  std::vector<double> phases{0.44879895051282759, 1.5707963267948966};
  Tolerances tol;
  std::string out_dir = "out";
};

/// Validates against the version-1 schema (unknown keys are errors) and fills defaults.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::filesystem::path& path);

hitchin::ConformalBackground make_background(const DomainSpec& d);
hitchin::QuarticInput make_quartic(const DifferentialSpec& d, const hitchin::Lattice& lattice);
hitchin::FlatSurface make_surface(const SurfaceSpec& s);

/// Echo of the effective configuration (used in summaries).
json describe(const DomainSpec& d);
json describe(const DifferentialSpec& d);

}  // namespace lab
