#include "hitchin/lattice.hpp"

#include <cmath>
#include <cstring>

#include "hitchin/error.hpp"

namespace hitchin {

Lattice Lattice::torus(double lx, double ly, int n) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw DomainError("torus side lengths must be positive");
  if (n < 8) throw DomainError("resolution too small: torus needs n >= 8");
  Lattice lat;
  lat.kind_ = DomainKind::torus;
  lat.nx_ = n;
  lat.ny_ = n;
  lat.hx_ = lx / n;
  lat.hy_ = ly / n;
  lat.lx_ = lx;
  lat.ly_ = ly;
  lat.roles_.assign(static_cast<std::size_t>(n) * n, NodeRole::interior);
  return lat;
}

Lattice Lattice::disk(double radius, int n) {
  if (!(radius > 0.0)) throw DomainError("disk radius must be positive");
  if (n < 16) throw DomainError("resolution too small: disk needs n >= 16");
  Lattice lat;
  lat.kind_ = DomainKind::disk;
  lat.nx_ = n;
  lat.ny_ = n;
  lat.hx_ = 2.0 * radius / (n - 1);
  lat.hy_ = lat.hx_;
  lat.x0_ = -radius;
  lat.y0_ = -radius;
  lat.lx_ = 2.0 * radius;
  lat.ly_ = 2.0 * radius;
  lat.radius_ = radius;
  lat.roles_.assign(static_cast<std::size_t>(n) * n, NodeRole::outside);

  const double r2 = radius * radius * (1.0 + 1e-12);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = lat.x(i), y = lat.y(j);
      if (x * x + y * y <= r2) lat.roles_[lat.index(i, j)] = NodeRole::interior;
    }
  }
  // Active nodes touching the outside (or the lattice edge) form the boundary ring.
  std::vector<NodeRole> roles = lat.roles_;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t k = lat.index(i, j);
      if (lat.roles_[k] == NodeRole::outside) continue;
      const int di[4] = {1, -1, 0, 0};
      const int dj[4] = {0, 0, 1, -1};
      for (int s = 0; s < 4; ++s) {
        const int ii = i + di[s], jj = j + dj[s];
        if (ii < 0 || jj < 0 || ii >= n || jj >= n ||
            lat.roles_[lat.index(ii, jj)] == NodeRole::outside) {
          roles[k] = NodeRole::boundary;
          break;
        }
      }
    }
  }
  lat.roles_ = std::move(roles);
  return lat;
}

std::ptrdiff_t Lattice::neighbor(std::size_t k, int di, int dj) const noexcept {
  int i = column(k) + di;
  int j = row(k) + dj;
  if (kind_ == DomainKind::torus) {
    i = ((i % nx_) + nx_) % nx_;
    j = ((j % ny_) + ny_) % ny_;
    return static_cast<std::ptrdiff_t>(index(i, j));
  }
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  const std::size_t kk = index(i, j);
  if (roles_[kk] == NodeRole::outside) return -1;
  return static_cast<std::ptrdiff_t>(kk);
}

bool operator==(const ScalarField& a, const ScalarField& b) noexcept {
  if (a.nx_ != b.nx_ || a.ny_ != b.ny_ || a.values_.size() != b.values_.size()) return false;
  return a.values_.empty() ||
         std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(double)) == 0;
}

RegionMask active_mask(const Lattice& lattice) {
  RegionMask mask(lattice.size(), 0);
  for (std::size_t k = 0; k < lattice.size(); ++k) mask[k] = lattice.active(k) ? 1 : 0;
  return mask;
}

}  // namespace hitchin
