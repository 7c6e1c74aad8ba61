#include "hitchin/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hitchin/error.hpp"
#include "newton.hpp"

namespace hitchin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class HitchinModel final : public detail::ReactionModel {
 public:
  HitchinModel(const ScalarField& qn, const ScalarField& kappa) : qn_(qn), kappa_(kappa) {}
  int fields() const override { return 2; }
  void evaluate(std::size_t k, const double* psi, double* rhs, double* drhs) const override {
    const double E = std::exp(psi[0] - psi[1]);
    const double Q = std::exp(-2.0 * psi[0]) * qn_[k];
    const double P = std::exp(2.0 * psi[1]);
    rhs[0] = E - Q + 0.75 * kappa_[k];
    rhs[1] = P - E + 0.25 * kappa_[k];
    drhs[0] = E + 2.0 * Q;
    drhs[1] = -E;
    drhs[2] = -E;
    drhs[3] = 2.0 * P + E;
  }

 private:
  const ScalarField& qn_;
  const ScalarField& kappa_;
};

void check_shapes(const ConformalBackground& bg, const QuarticInput& q) {
  if (!q.modulus_sq().matches(bg.lattice())) throw DomainError("q shape does not match background");
}

}  // namespace

std::pair<double, double> hitchin_pointwise_root(double kappa, double qn) {
  if (kappa > 0.0 || !(qn >= 0.0)) throw DomainError("pointwise root needs kappa <= 0 and ||q||^2 >= 0");
  if (kappa == 0.0 && qn == 0.0) throw DomainError("pointwise root undefined for kappa == 0 and q == 0");
  // x = psi1 - psi2, e^{2 psi2} = e^x - k/4; the first equation is increasing in x.
  auto psi2_of = [&](double x) { return 0.5 * std::log(std::exp(x) - 0.25 * kappa); };
  if (qn == 0.0) {
    const double x = std::log(-0.75 * kappa);
    return {x + psi2_of(x), psi2_of(x)};
  }
  auto f = [&](double x) { return std::exp(x) + 0.75 * kappa - std::exp(-2.0 * (x + psi2_of(x))) * qn; };
  double lo = -1.0, hi = 1.0;
  while (f(lo) > 0.0) lo -= 2.0 * (hi - lo);
  while (f(hi) < 0.0) hi += 2.0 * (hi - lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return {x + psi2_of(x), psi2_of(x)};
}

std::vector<std::size_t> equation_nodes(const Lattice& lattice) {
  std::vector<std::size_t> nodes;
  nodes.reserve(lattice.size());
  for (std::size_t k = 0; k < lattice.size(); ++k)
    if (lattice.carries_equation(k)) nodes.push_back(k);
  return nodes;
}

ScalarField SolutionPair::h1_inv(const ConformalBackground& bg) const {
  ScalarField out(bg.lattice(), kNaN);
  for (std::size_t k = 0; k < out.size(); ++k)
    if (bg.lattice().active(k)) out[k] = std::exp(psi1[k]) * std::pow(bg.sigma()[k], 1.5);
  return out;
}

ScalarField SolutionPair::h2_inv(const ConformalBackground& bg) const {
  ScalarField out(bg.lattice(), kNaN);
  for (std::size_t k = 0; k < out.size(); ++k)
    if (bg.lattice().active(k)) out[k] = std::exp(psi2[k]) * std::sqrt(bg.sigma()[k]);
  return out;
}

SolutionPair flat_subsolution(const ConformalBackground& bg, const QuarticInput& q) {
  check_shapes(bg, q);
  const Lattice& lat = bg.lattice();
  const ScalarField qn = qnorm_sq(bg, q);
  const bool flat = bg.flat();
  if (!flat && !bg.hyperbolic())
    throw DomainError("sub-solution needs a hyperbolic (kappa < 0) or flat (kappa == 0) background");
  SolutionPair v;
  v.psi1 = ScalarField(lat, kNaN);
  v.psi2 = ScalarField(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    const double root = std::sqrt(std::sqrt(qn[k]));  // ||q||^{1/2}
    double arg = root;
    if (flat) {
      if (!(root > 0.0))
        throw DomainError("flat background with q vanishing at node " + std::to_string(k) +
                          ": sub-solution undefined");
    } else {
      arg = std::max(root, -0.75 * bg.kappa_max());
    }
    const double l = std::log(arg);
    v.psi1[k] = 1.5 * l;
    v.psi2[k] = 0.5 * l;
  }
  return v;
}

SuperSolution constant_supersolution(const ConformalBackground& bg, const QuarticInput& q) {
  check_shapes(bg, q);
  const Lattice& lat = bg.lattice();
  const ScalarField qn = qnorm_sq(bg, q);
  const bool flat = bg.flat();
  if (!flat && !bg.hyperbolic())
    throw DomainError("super-solution needs kappa < 0 everywhere or kappa == 0");
  const double kstar = bg.kappa_min();
  if (kstar <= -4.0) throw DomainError("kappa <= -4: log(1 + kappa/4) undefined");
  if (flat && q.identically_zero()) throw DomainError("flat background with q == 0 has no solution");
  const double shift = std::log1p(0.25 * kstar);

  double qmax = 0.0;
  for (std::size_t k = 0; k < lat.size(); ++k)
    if (lat.active(k)) qmax = std::max(qmax, qn[k]);

  // min over nodes of (F1, F2); F1 is increasing in c2 and F2 too.
  auto worst = [&](double c2) {
    const double c1 = 3.0 * c2 + shift;
    const double E = std::exp(c1 - c2), P = std::exp(2.0 * c2), decay = std::exp(-2.0 * c1);
    double w = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lat.size(); ++k) {
      if (!lat.active(k)) continue;
      const double kap = bg.kappa()[k];
      const double F1 = E - decay * qn[k] + 0.75 * kap;
      const double F2 = P - E + 0.25 * kap;
      w = std::min({w, F1, F2});
    }
    return w;
  };

  double lo, hi;
  if (flat) {
    // e^{4 c2} = max ||q|| is the exact threshold; bracket around it.
    const double guess = 0.125 * std::log(qmax);
    lo = guess - 1.0;
    hi = guess + 1.0;
    while (worst(lo) >= 0.0) lo -= 1.0;
  } else {
    lo = 0.0;
    hi = 1.0;
  }
  if (!flat && worst(lo) >= 0.0) {
    hi = lo;
  } else {
    while (worst(hi) < 0.0) {
      hi += 2.0 * (hi - lo);
      if (hi > 1e3) throw DomainError("super-solution search diverged");
    }
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (worst(mid) >= 0.0) hi = mid;
      else lo = mid;
    }
  }

  SuperSolution s;
  s.c2 = hi;
  s.c1 = 3.0 * hi + shift;
  s.pair.psi1 = ScalarField(lat, kNaN);
  s.pair.psi2 = ScalarField(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    s.pair.psi1[k] = s.c1;
    s.pair.psi2[k] = s.c2;
  }
  return s;
}

std::pair<ScalarField, ScalarField> residual(const ConformalBackground& bg, const QuarticInput& q,
                                             const ScalarField& psi1, const ScalarField& psi2) {
  check_shapes(bg, q);
  if (!psi1.matches(bg.lattice()) || !psi2.matches(bg.lattice()))
    throw DomainError("residual: field shape mismatch");
  const ScalarField qn = qnorm_sq(bg, q);
  const Lattice& lat = bg.lattice();
  ScalarField r1(lat, kNaN), r2(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.carries_equation(k)) continue;
    const double s4 = 4.0 * bg.sigma()[k];
    const double E = std::exp(psi1[k] - psi2[k]);
    r1[k] = laplacian5(lat, psi1, k) / s4 - E + std::exp(-2.0 * psi1[k]) * qn[k] - 0.75 * bg.kappa()[k];
    r2[k] = laplacian5(lat, psi2, k) / s4 - std::exp(2.0 * psi2[k]) + E - 0.25 * bg.kappa()[k];
  }
  return {std::move(r1), std::move(r2)};
}

Eigen::SparseMatrix<double> hitchin_jacobian(const ConformalBackground& bg, const QuarticInput& q,
                                             const ScalarField& psi1, const ScalarField& psi2) {
  check_shapes(bg, q);
  const ScalarField qn = qnorm_sq(bg, q);
  HitchinModel model(qn, bg.kappa());
  return detail::reaction_jacobian(bg, model, {psi1, psi2});
}

SolutionPair solve_hitchin(const ConformalBackground& bg, const QuarticInput& q, const SolverOptions& opts) {
  check_shapes(bg, q);
  if (!(opts.tolerance > 0.0)) throw DomainError("solver tolerance must be positive");
  if (opts.max_iterations < 1) throw DomainError("max_iterations must be >= 1");
  if (bg.kind() == DomainKind::torus && q.vanishes_somewhere())
    throw DomainError("torus with q vanishing somewhere is not supported");
  const Lattice& lat = bg.lattice();
  const ScalarField qn = qnorm_sq(bg, q);

  const SolutionPair sub = flat_subsolution(bg, q);
  const SuperSolution sup = constant_supersolution(bg, q);

  auto check = [&](const std::pair<ScalarField, ScalarField>& f, const char* what) {
    if (!f.first.matches(lat) || !f.second.matches(lat))
      throw DomainError(std::string(what) + " shape does not match background");
  };

  std::vector<ScalarField> start = {sub.psi1, sub.psi2};
  if (opts.initial) {
    check(*opts.initial, "initial guess");
    for (std::size_t k = 0; k < lat.size(); ++k) {
      if (!lat.carries_equation(k)) continue;
      start[0][k] = opts.initial->first[k];
      start[1][k] = opts.initial->second[k];
    }
  }
  if (opts.boundary) check(*opts.boundary, "boundary data");
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (lat.role(k) != NodeRole::boundary) continue;
    if (opts.boundary) {
      start[0][k] = opts.boundary->first[k];
      start[1][k] = opts.boundary->second[k];
    } else {
      const auto [a, b] = hitchin_pointwise_root(bg.kappa()[k], qn[k]);
      start[0][k] = a;
      start[1][k] = b;
    }
  }

  detail::Box box;
  if (opts.clip_to_bracket) {
    box.lower = {sub.psi1, sub.psi2};
    box.upper = {sup.pair.psi1, sup.pair.psi2};
  }
  HitchinModel model(qn, bg.kappa());
  detail::NewtonOutcome res =
      detail::newton(bg, model, std::move(start), {opts.tolerance, opts.max_iterations, opts.min_step}, box);

  SolutionPair out;
  out.psi1 = std::move(res.fields[0]);
  out.psi2 = std::move(res.fields[1]);
  out.residual_inf = res.residual_inf;
  out.iterations = res.iterations;
  out.history = std::move(res.history);

  double sub_margin = std::numeric_limits<double>::infinity();
  double super_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_node = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.carries_equation(k)) continue;
    const double lo = std::min(out.psi1[k] - sub.psi1[k], out.psi2[k] - sub.psi2[k]);
    const double hi = std::min(sup.pair.psi1[k] - out.psi1[k], sup.pair.psi2[k] - out.psi2[k]);
    sub_margin = std::min(sub_margin, lo);
    super_margin = std::min(super_margin, hi);
    if (std::min(lo, hi) < worst) {
      worst = std::min(lo, hi);
      worst_node = k;
    }
  }
  out.bracket = {sub_margin, super_margin};
  // The flat branch is a sub-solution only for holomorphic q.
  if (!opts.clip_to_bracket && opts.check_bracket && q.holomorphic() && worst < -opts.bracket_tolerance)
    throw BracketViolation(worst_node, worst);
  return out;
}

}  // namespace hitchin
