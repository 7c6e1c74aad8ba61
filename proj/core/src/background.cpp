#include "hitchin/background.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hitchin/error.hpp"

namespace hitchin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Second difference of f along one axis at node k, step h. Centred fourth order when two
// neighbours exist on both sides, the off-centre fourth-order stencil on (-1..3) next to the
// rim, second order otherwise. Differences are taken against f[k] so constants give exactly 0.
double second_difference(const Lattice& lat, const std::vector<double>& f, std::size_t k,
                         int di, int dj, double h) {
  auto at = [&](int s) {
    const auto n = lat.neighbor(k, s * di, s * dj);
    return n >= 0 ? f[static_cast<std::size_t>(n)] - f[k] : std::numeric_limits<double>::quiet_NaN();
  };
  const double p1 = at(1), m1 = at(-1);
  const double p2 = at(2), m2 = at(-2);
  const double h2 = h * h;
  if (!std::isnan(p2) && !std::isnan(m2)) return (-p2 + 16.0 * p1 + 16.0 * m1 - m2) / (12.0 * h2);
  if (!std::isnan(p2)) {
    const double p3 = at(3);
    if (!std::isnan(p3)) return (11.0 * m1 + 6.0 * p1 + 4.0 * p2 - p3) / (12.0 * h2);
  }
  if (!std::isnan(m2)) {
    const double m3 = at(-3);
    if (!std::isnan(m3)) return (11.0 * p1 + 6.0 * m1 + 4.0 * m2 - m3) / (12.0 * h2);
  }
  return (p1 + m1) / h2;
}

}  // namespace

ScalarField curvature_conformal(const ScalarField& factor, const Lattice& lattice) {
  if (!factor.matches(lattice)) throw DomainError("factor shape does not match lattice");
  std::vector<double> logf(lattice.size(), kNaN);
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    if (!lattice.active(k)) continue;
    if (!(factor[k] > 0.0)) throw DomainError("conformal factor must be positive");
    logf[k] = std::log(factor[k]);
  }
  ScalarField kappa(lattice, kNaN);
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    if (!lattice.carries_equation(k)) continue;
    const double lap = second_difference(lattice, logf, k, 1, 0, lattice.hx()) +
                       second_difference(lattice, logf, k, 0, 1, lattice.hy());
    // -(2/rho) * (1/4) * lap
    kappa[k] = -lap / (2.0 * factor[k]);
  }
  return kappa;
}

ConformalBackground::ConformalBackground(Lattice lattice, ScalarField sigma)
    : lattice_(std::move(lattice)), sigma_(std::move(sigma)) {
  check_sigma();
  kappa_ = curvature_conformal(sigma_, lattice_);

  if (lattice_.kind() == DomainKind::disk) {
    // Boundary ring: copy the nearest interior value.
    const int n = lattice_.nx();
    for (std::size_t k = 0; k < lattice_.size(); ++k) {
      if (lattice_.role(k) != NodeRole::boundary) continue;
      const int i0 = lattice_.column(k), j0 = lattice_.row(k);
      double best = std::numeric_limits<double>::infinity();
      std::size_t pick = k;
      for (int reach = 1; reach <= n && best == std::numeric_limits<double>::infinity(); ++reach) {
        for (int dj = -reach; dj <= reach; ++dj) {
          for (int di = -reach; di <= reach; ++di) {
            const int i = i0 + di, j = j0 + dj;
            if (i < 0 || j < 0 || i >= n || j >= n) continue;
            const std::size_t kk = lattice_.index(i, j);
            if (!lattice_.carries_equation(kk)) continue;
            const double d2 = double(di) * di + double(dj) * dj;
            if (d2 < best) {
              best = d2;
              pick = kk;
            }
          }
        }
      }
      if (pick == k) throw DomainError("disk lattice has no interior nodes");
      kappa_[k] = kappa_[pick];
    }
  }
  summarize_kappa();
}

ConformalBackground::ConformalBackground(Lattice lattice, ScalarField sigma, ScalarField kappa)
    : lattice_(std::move(lattice)), sigma_(std::move(sigma)), kappa_(std::move(kappa)) {
  check_sigma();
  if (!kappa_.matches(lattice_)) throw DomainError("kappa shape does not match lattice");
  for (std::size_t k = 0; k < lattice_.size(); ++k) {
    if (!lattice_.active(k)) kappa_[k] = kNaN;
    else if (!std::isfinite(kappa_[k])) throw DomainError("kappa must be finite at node " + std::to_string(k));
  }
  summarize_kappa();
}

void ConformalBackground::check_sigma() {
  if (!sigma_.matches(lattice_)) throw DomainError("sigma shape does not match lattice");
  for (std::size_t k = 0; k < lattice_.size(); ++k) {
    if (lattice_.active(k)) {
      if (!(sigma_[k] > 0.0) || !std::isfinite(sigma_[k]))
        throw DomainError("sigma must be positive at node " + std::to_string(k));
    } else {
      sigma_[k] = kNaN;
    }
  }
}

void ConformalBackground::summarize_kappa() {
  kappa_min_ = std::numeric_limits<double>::infinity();
  kappa_max_ = -std::numeric_limits<double>::infinity();
  hyperbolic_ = true;
  flat_ = true;
  for (std::size_t k = 0; k < lattice_.size(); ++k) {
    if (!lattice_.active(k)) continue;
    const double c = kappa_[k];
    kappa_min_ = std::min(kappa_min_, c);
    kappa_max_ = std::max(kappa_max_, c);
    if (!(c < 0.0)) hyperbolic_ = false;
    if (c != 0.0) flat_ = false;
  }
}

ConformalBackground build_torus_background(double lx, double ly, int n, double sigma0) {
  if (!(sigma0 > 0.0)) throw DomainError("sigma0 must be positive");
  Lattice lat = Lattice::torus(lx, ly, n);
  ScalarField sigma(lat, sigma0);
  return ConformalBackground(std::move(lat), std::move(sigma));
}

ConformalBackground build_disk_background(double rfrac, int n) {
  if (!(rfrac > 0.0) || rfrac > 0.9)
    throw DomainError("disk radius fraction must lie in (0, 0.9]");
  Lattice lat = Lattice::disk(rfrac, n);
  ScalarField sigma(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    const double r2 = std::norm(lat.z(k));
    const double d = 1.0 - r2;
    sigma[k] = 2.0 / (d * d);
  }
  ScalarField kappa(lat, -2.0);
  return ConformalBackground(std::move(lat), std::move(sigma), std::move(kappa));
}

double laplacian5(const Lattice& lat, const ScalarField& f, std::size_t k) {
  const auto e = static_cast<std::size_t>(lat.neighbor(k, 1, 0));
  const auto w = static_cast<std::size_t>(lat.neighbor(k, -1, 0));
  const auto n = static_cast<std::size_t>(lat.neighbor(k, 0, 1));
  const auto s = static_cast<std::size_t>(lat.neighbor(k, 0, -1));
  const double hx2 = lat.hx() * lat.hx(), hy2 = lat.hy() * lat.hy();
  return (f[e] - 2.0 * f[k] + f[w]) / hx2 + (f[n] - 2.0 * f[k] + f[s]) / hy2;
}

ScalarField delta_sigma(const ConformalBackground& bg, const ScalarField& f) {
  const Lattice& lat = bg.lattice();
  if (!f.matches(lat)) throw DomainError("field shape does not match background");
  ScalarField out(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.carries_equation(k)) continue;
    out[k] = laplacian5(lat, f, k) / (4.0 * bg.sigma()[k]);
  }
  return out;
}

double area_of(const ScalarField& factor, const Lattice& lattice, const RegionMask& mask) {
  if (!factor.matches(lattice) || mask.size() != lattice.size())
    throw DomainError("area_of: shape mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    if (!mask[k] || !lattice.active(k)) continue;
    if (factor[k] < 0.0) throw DomainError("area_of: negative metric factor");
    sum += factor[k];
    ++count;
  }
  if (count == 0) throw DomainError("area_of: empty region");
  return sum * lattice.cell_area();
}

double area_of(const ScalarField& factor, const Lattice& lattice) {
  return area_of(factor, lattice, active_mask(lattice));
}

}  // namespace hitchin
