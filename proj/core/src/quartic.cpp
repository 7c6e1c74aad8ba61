#include "hitchin/quartic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "hitchin/error.hpp"

namespace hitchin {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::complex<double> horner(const std::vector<std::complex<double>>& c, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}
}  // namespace

void QuarticInput::finalize(const Lattice& lattice) {
  modulus_sq_ = ScalarField(lattice, kNaN);
  if (form_ != QuarticForm::sampled) {
    base_.assign(lattice.size(), 0.0);
    for (std::size_t k = 0; k < lattice.size(); ++k)
      if (lattice.active(k)) base_[k] = horner(coeffs_, lattice.z(k));
  }
  zero_ = true;
  vanishes_ = false;
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    if (!lattice.active(k)) continue;
    const double m = std::norm(base_[k]);
    modulus_sq_[k] = m;
    if (m != 0.0) zero_ = false;
    else vanishes_ = true;
  }
}

QuarticInput QuarticInput::constant(std::complex<double> c, const Lattice& lattice) {
  QuarticInput q;
  q.form_ = QuarticForm::constant;
  q.coeffs_ = {c};
  q.finalize(lattice);
  return q;
}

QuarticInput QuarticInput::polynomial(std::vector<std::complex<double>> coeffs, const Lattice& lattice) {
  if (coeffs.empty()) throw DomainError("polynomial needs at least one coefficient");
  QuarticInput q;
  q.form_ = QuarticForm::polynomial;
  q.coeffs_ = std::move(coeffs);
  q.finalize(lattice);
  return q;
}

QuarticInput QuarticInput::sampled(std::vector<std::complex<double>> values, const Lattice& lattice,
                                   double cr_tolerance) {
  if (values.size() != lattice.size()) throw DomainError("sampled q: shape mismatch");
  QuarticInput q;
  q.form_ = QuarticForm::sampled;
  q.base_ = std::move(values);
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    if (!lattice.active(k)) q.base_[k] = 0.0;
    else if (!std::isfinite(q.base_[k].real()) || !std::isfinite(q.base_[k].imag()))
      throw DomainError("sampled q: non-finite value at node " + std::to_string(k));
  }
  q.finalize(lattice);

  // Central differences: dbar = (q_x + i q_y)/2, d = (q_x - i q_y)/2.
  double max_dbar = 0.0, max_d = 0.0;
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    if (!lattice.carries_equation(k)) continue;
    const auto e = lattice.neighbor(k, 1, 0), w = lattice.neighbor(k, -1, 0);
    const auto n = lattice.neighbor(k, 0, 1), s = lattice.neighbor(k, 0, -1);
    const std::complex<double> qx = (q.base_[std::size_t(e)] - q.base_[std::size_t(w)]) / (2.0 * lattice.hx());
    const std::complex<double> qy = (q.base_[std::size_t(n)] - q.base_[std::size_t(s)]) / (2.0 * lattice.hy());
    const std::complex<double> i(0.0, 1.0);
    max_dbar = std::max(max_dbar, std::abs(0.5 * (qx + i * qy)));
    max_d = std::max(max_d, std::abs(0.5 * (qx - i * qy)));
  }
  q.cr_residual_ = max_dbar == 0.0 ? 0.0 : (max_d == 0.0 ? std::numeric_limits<double>::infinity() : max_dbar / max_d);
  q.holomorphic_ = q.cr_residual_ <= cr_tolerance;
  return q;
}

std::complex<double> QuarticInput::value(std::size_t k) const {
  return std::polar(1.0, phase_) * base_.at(k);
}

QuarticInput QuarticInput::rotated(double theta) const {
  QuarticInput q = *this;
  q.phase_ = std::remainder(phase_ + theta, 2.0 * M_PI);
  return q;
}

QuarticInput QuarticInput::scaled(double t) const {
  if (!(t > 0.0)) throw DomainError("ray parameter t must be positive");
  QuarticInput q = *this;
  for (auto& c : q.coeffs_) c *= t;
  for (auto& b : q.base_) b *= t;
  for (std::size_t k = 0; k < q.base_.size(); ++k)
    if (!std::isnan(q.modulus_sq_[k])) q.modulus_sq_[k] = std::norm(q.base_[k]);
  return q;
}

std::complex<double> QuarticInput::evaluate(std::complex<double> z) const {
  if (form_ == QuarticForm::sampled) throw DomainError("sampled q has no analytic form");
  return horner(coeffs_, z);
}

std::vector<std::complex<double>> QuarticInput::zeros() const {
  if (form_ == QuarticForm::sampled) throw DomainError("sampled q has no analytic zeros");
  std::vector<std::complex<double>> c = coeffs_;
  while (!c.empty() && c.back() == std::complex<double>(0.0)) c.pop_back();
  if (c.size() <= 1) return {};
  const int deg = static_cast<int>(c.size()) - 1;
  // Roots at the origin are exact.
  std::vector<std::complex<double>> roots;
  std::size_t low = 0;
  while (c[low] == std::complex<double>(0.0)) {
    roots.emplace_back(0.0, 0.0);
    ++low;
  }
  const int d = deg - static_cast<int>(low);
  if (d > 0) {
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[low + static_cast<std::size_t>(i)] / c.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    for (int i = 0; i < d; ++i) roots.push_back(es.eigenvalues()(i));
  }
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

ScalarField qnorm_sq(const ConformalBackground& bg, const QuarticInput& q) {
  const Lattice& lat = bg.lattice();
  const ScalarField& m = q.modulus_sq();
  if (!m.matches(lat)) throw DomainError("qnorm_sq: shape mismatch");
  ScalarField out(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    const double s = bg.sigma()[k];
    const double s2 = s * s;
    out[k] = m[k] / (s2 * s2);
  }
  return out;
}

}  // namespace hitchin
