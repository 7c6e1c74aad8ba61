#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hitchin {

enum class DomainKind { torus, disk };

/// Role of a lattice node. Disk lattices are square grids covering the disk;
/// nodes outside the disk carry no data, the outermost ring carries Dirichlet data.
enum class NodeRole : std::uint8_t { outside, boundary, interior };

/// Uniform node lattice. Torus nodes sit at (i*hx, j*hy) and wrap periodically;
/// disk nodes cover [-r, r]^2 with n nodes per side.
class Lattice {
 public:
  static Lattice torus(double lx, double ly, int n);
  static Lattice disk(double radius, int n);

  DomainKind kind() const noexcept { return kind_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }
  double cell_area() const noexcept { return hx_ * hy_; }
  /// Disk radius; zero for tori.
  double radius() const noexcept { return radius_; }
  double extent_x() const noexcept { return lx_; }
  double extent_y() const noexcept { return ly_; }

  std::size_t size() const noexcept { return roles_.size(); }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }
  int column(std::size_t k) const noexcept { return static_cast<int>(k % static_cast<std::size_t>(nx_)); }
  int row(std::size_t k) const noexcept { return static_cast<int>(k / static_cast<std::size_t>(nx_)); }

  double x(int i) const noexcept { return x0_ + i * hx_; }
  double y(int j) const noexcept { return y0_ + j * hy_; }
  std::complex<double> z(std::size_t k) const noexcept { return {x(column(k)), y(row(k))}; }

  NodeRole role(std::size_t k) const noexcept { return roles_[k]; }
  bool active(std::size_t k) const noexcept { return roles_[k] != NodeRole::outside; }
  /// Nodes where the PDE is imposed: every node of a torus, the interior of a disk.
  bool carries_equation(std::size_t k) const noexcept { return roles_[k] == NodeRole::interior; }
  std::span<const NodeRole> roles() const noexcept { return roles_; }

  /// Neighbour at offset (di, dj); wraps on the torus, -1 when it falls off a disk lattice
  /// or lands on an outside node.
  std::ptrdiff_t neighbor(std::size_t k, int di, int dj) const noexcept;

  bool same_shape(const Lattice& other) const noexcept {
    return kind_ == other.kind_ && nx_ == other.nx_ && ny_ == other.ny_;
  }

 private:
  Lattice() = default;

  DomainKind kind_ = DomainKind::torus;
  int nx_ = 0;
  int ny_ = 0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  double x0_ = 0.0;
  double y0_ = 0.0;
  double lx_ = 0.0;
  double ly_ = 0.0;
  double radius_ = 0.0;
  std::vector<NodeRole> roles_;
};

/// Per-node real values on a lattice. Inactive disk nodes hold NaN.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Lattice& lattice, double fill = 0.0)
      : nx_(lattice.nx()), ny_(lattice.ny()), values_(lattice.size(), fill) {}

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  bool matches(const Lattice& lattice) const noexcept {
    return nx_ == lattice.nx() && ny_ == lattice.ny();
  }

  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Bitwise equality (NaN padding compares equal to itself).
  friend bool operator==(const ScalarField& a, const ScalarField& b) noexcept;

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> values_;
};

/// Region selector: one byte per node, nonzero means "in the region".
using RegionMask = std::vector<std::uint8_t>;

/// Mask of every active node.
RegionMask active_mask(const Lattice& lattice);

}  // namespace hitchin
