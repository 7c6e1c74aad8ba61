#include "newton.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "hitchin/error.hpp"
#include "hitchin/solver.hpp"

namespace hitchin::detail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Layout {
  std::vector<std::size_t> nodes;          // slot -> node
  std::vector<std::ptrdiff_t> slot;        // node -> slot or -1
};

Layout make_layout(const Lattice& lat) {
  Layout l;
  l.nodes = equation_nodes(lat);
  l.slot.assign(lat.size(), -1);
  for (std::size_t s = 0; s < l.nodes.size(); ++s) l.slot[l.nodes[s]] = static_cast<std::ptrdiff_t>(s);
  return l;
}

// Max-norm residual; fills r (slot-major, m per slot).
double residual_into(const ConformalBackground& bg, const ReactionModel& model, const Layout& layout,
                     const std::vector<ScalarField>& psi, std::vector<double>& r) {
  const int m = model.fields();
  const Lattice& lat = bg.lattice();
  std::vector<double> local(static_cast<std::size_t>(m)), rhs(static_cast<std::size_t>(m)),
      drhs(static_cast<std::size_t>(m * m));
  r.assign(layout.nodes.size() * static_cast<std::size_t>(m), 0.0);
  double norm = 0.0;
  for (std::size_t s = 0; s < layout.nodes.size(); ++s) {
    const std::size_t k = layout.nodes[s];
    for (int a = 0; a < m; ++a) local[std::size_t(a)] = psi[std::size_t(a)][k];
    model.evaluate(k, local.data(), rhs.data(), drhs.data());
    const double inv4s = 1.0 / (4.0 * bg.sigma()[k]);
    for (int a = 0; a < m; ++a) {
      const double v = laplacian5(lat, psi[std::size_t(a)], k) * inv4s - rhs[std::size_t(a)];
      r[s * std::size_t(m) + std::size_t(a)] = v;
      const double av = std::abs(v);
      if (!(av <= norm)) norm = std::isnan(av) ? std::numeric_limits<double>::infinity() : av;
    }
  }
  return norm;
}

// Stencil contributions of -Lap (scale 1) or Lap/(4 sigma) into triplets.
template <class Emit>
void for_each_stencil(const Lattice& lat, const Layout& layout, std::size_t s, Emit&& emit) {
  const std::size_t k = layout.nodes[s];
  const double cx = 1.0 / (lat.hx() * lat.hx()), cy = 1.0 / (lat.hy() * lat.hy());
  emit(s, -2.0 * cx - 2.0 * cy);
  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  for (int d = 0; d < 4; ++d) {
    const auto nb = lat.neighbor(k, di[d], dj[d]);
    if (nb < 0) continue;
    const auto t = layout.slot[std::size_t(nb)];
    if (t < 0) continue;
    emit(std::size_t(t), d < 2 ? cx : cy);
  }
}

}  // namespace

std::vector<ScalarField> reaction_residual(const ConformalBackground& bg, const ReactionModel& model,
                                           const std::vector<ScalarField>& psi) {
  const Layout layout = make_layout(bg.lattice());
  std::vector<double> r;
  residual_into(bg, model, layout, psi, r);
  const int m = model.fields();
  std::vector<ScalarField> out(std::size_t(m), ScalarField(bg.lattice(), kNaN));
  for (std::size_t s = 0; s < layout.nodes.size(); ++s)
    for (int a = 0; a < m; ++a) out[std::size_t(a)][layout.nodes[s]] = r[s * std::size_t(m) + std::size_t(a)];
  return out;
}

Eigen::SparseMatrix<double> reaction_jacobian(const ConformalBackground& bg, const ReactionModel& model,
                                              const std::vector<ScalarField>& psi) {
  const Lattice& lat = bg.lattice();
  const Layout layout = make_layout(lat);
  const int m = model.fields();
  const auto M = std::size_t(m);
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> local(M), rhs(M), drhs(M * M);
  for (std::size_t s = 0; s < layout.nodes.size(); ++s) {
    const std::size_t k = layout.nodes[s];
    const double inv4s = 1.0 / (4.0 * bg.sigma()[k]);
    for_each_stencil(lat, layout, s, [&](std::size_t t, double c) {
      for (std::size_t a = 0; a < M; ++a)
        trip.emplace_back(int(s * M + a), int(t * M + a), c * inv4s);
    });
    for (std::size_t a = 0; a < M; ++a) local[a] = psi[a][k];
    model.evaluate(k, local.data(), rhs.data(), drhs.data());
    for (std::size_t a = 0; a < M; ++a)
      for (std::size_t b = 0; b < M; ++b)
        trip.emplace_back(int(s * M + a), int(s * M + b), -drhs[a * M + b]);
  }
  const auto n = int(layout.nodes.size() * M);
  Eigen::SparseMatrix<double> J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

NewtonOutcome newton(const ConformalBackground& bg, const ReactionModel& model,
                     std::vector<ScalarField> psi, const NewtonSettings& settings, const Box& box) {
  const Lattice& lat = bg.lattice();
  const Layout layout = make_layout(lat);
  const int m = model.fields();
  const auto M = std::size_t(m);
  if (psi.size() != M) throw DomainError("newton: wrong number of fields");
  for (const auto& f : psi)
    if (!f.matches(lat)) throw DomainError("newton: field shape mismatch");
  const auto n = int(layout.nodes.size() * M);
  if (n == 0) throw DomainError("no equation nodes");

  auto clip = [&](std::vector<ScalarField>& f) {
    if (box.empty()) return;
    for (std::size_t a = 0; a < M; ++a)
      for (std::size_t k : layout.nodes)
        f[a][k] = std::clamp(f[a][k], box.lower[a][k], box.upper[a][k]);
  };
  clip(psi);

  NewtonOutcome out;
  std::vector<double> r, rt;
  double rnorm = residual_into(bg, model, layout, psi, r);
  out.history.push_back(rnorm);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> local(M), rhs(M), drhs(M * M);
  Eigen::SparseMatrix<double> A(n, n);
  Eigen::VectorXd b(n);
  std::vector<ScalarField> trial = psi;

  int it = 0;
  while (!(rnorm <= settings.tolerance)) {
    if (it >= settings.max_iterations || !std::isfinite(rnorm)) throw NonConvergence(it, rnorm);

    trip.clear();
    for (std::size_t s = 0; s < layout.nodes.size(); ++s) {
      const std::size_t k = layout.nodes[s];
      const double four_sigma = 4.0 * bg.sigma()[k];
      for_each_stencil(lat, layout, s, [&](std::size_t t, double c) {
        for (std::size_t a = 0; a < M; ++a) trip.emplace_back(int(s * M + a), int(t * M + a), -c);
      });
      for (std::size_t a = 0; a < M; ++a) local[a] = psi[a][k];
      model.evaluate(k, local.data(), rhs.data(), drhs.data());
      for (std::size_t a = 0; a < M; ++a) {
        for (std::size_t bb = 0; bb < M; ++bb)
          trip.emplace_back(int(s * M + a), int(s * M + bb), four_sigma * drhs[a * M + bb]);
        b[int(s * M + a)] = four_sigma * r[s * M + a];
      }
    }
    A.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      ldlt.analyzePattern(A);
      analyzed = true;
    }
    ldlt.factorize(A);
    if (ldlt.info() != Eigen::Success) throw NonConvergence(it, rnorm);
    const Eigen::VectorXd delta = ldlt.solve(b);

    double alpha = 1.0;
    double tnorm = 0.0;
    for (;;) {
      for (std::size_t s = 0; s < layout.nodes.size(); ++s) {
        const std::size_t k = layout.nodes[s];
        for (std::size_t a = 0; a < M; ++a) trial[a][k] = psi[a][k] + alpha * delta[int(s * M + a)];
      }
      clip(trial);
      tnorm = residual_into(bg, model, layout, trial, rt);
      if (tnorm <= (1.0 - 1e-4 * alpha) * rnorm) break;
      if (alpha * 0.5 < settings.min_step) break;
      alpha *= 0.5;
    }
    std::swap(psi, trial);
    std::swap(r, rt);
    rnorm = tnorm;
    out.history.push_back(rnorm);
    ++it;
  }

  out.fields = std::move(psi);
  out.residual_inf = rnorm;
  out.iterations = it;
  return out;
}

}  // namespace hitchin::detail
