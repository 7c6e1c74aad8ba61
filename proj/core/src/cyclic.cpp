#include "hitchin/cyclic.hpp"

#include <cmath>
#include <limits>

#include "hitchin/error.hpp"
#include "newton.hpp"

namespace hitchin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double weight(int m, int k) { return (2.0 * m - 2.0 * k + 1.0) / 2.0; }  // k is 1-based

class CyclicModel final : public detail::ReactionModel {
 public:
  CyclicModel(std::vector<ScalarField> a, ScalarField b, const ScalarField& kappa)
      : a_(std::move(a)), b_(std::move(b)), kappa_(kappa), m_(int(a_.size())) {}
  int fields() const override { return m_; }

  void evaluate(std::size_t node, const double* psi, double* rhs, double* drhs) const override {
    const int m = m_;
    const auto M = std::size_t(m);
    for (std::size_t i = 0; i < M * M; ++i) drhs[i] = 0.0;
    const double kap = kappa_[node];
    // link[k] = a_k e^{psi_k - psi_{k+1}} for k < m (0-based k = 0..m-2)
    for (int k = 0; k < m; ++k) rhs[k] = 0.5 * weight(m, k + 1) * kap;
    for (int k = 0; k + 1 < m; ++k) {
      const double L = a_[std::size_t(k)][node] * std::exp(psi[k] - psi[k + 1]);
      rhs[k] += L;
      rhs[k + 1] -= L;
      const auto kk = std::size_t(k), k1 = std::size_t(k + 1);
      drhs[kk * M + kk] += L;
      drhs[k1 * M + k1] += L;
      drhs[kk * M + k1] -= L;
      drhs[k1 * M + kk] -= L;
    }
    const double B = b_[node] * std::exp(-2.0 * psi[0]);
    rhs[0] -= B;
    drhs[0] += 2.0 * B;
    const double T = a_[M - 1][node] * std::exp(2.0 * psi[m - 1]);
    rhs[m - 1] += T;
    drhs[(M - 1) * M + (M - 1)] += 2.0 * T;
  }

  const std::vector<ScalarField>& a() const { return a_; }
  const ScalarField& b() const { return b_; }

 private:
  std::vector<ScalarField> a_;
  ScalarField b_;
  const ScalarField& kappa_;
  int m_;
};

CyclicModel make_model(const ConformalBackground& bg, const std::vector<QuarticInput>& gammas,
                       const QuarticInput& gamma_n) {
  const int m = int(gammas.size());
  if (m < 2) throw DomainError("cyclic system needs m >= 2");
  const Lattice& lat = bg.lattice();
  std::vector<ScalarField> a;
  for (const auto& g : gammas) {
    if (!g.modulus_sq().matches(lat)) throw DomainError("gamma shape does not match background");
    a.push_back(g.modulus_sq());
  }
  if (!gamma_n.modulus_sq().matches(lat)) throw DomainError("gamma_n shape does not match background");
  ScalarField b(lat, kNaN);
  for (std::size_t k = 0; k < lat.size(); ++k)
    if (lat.active(k)) b[k] = gamma_n.modulus_sq()[k] / std::pow(bg.sigma()[k], 2 * m);
  return CyclicModel(std::move(a), std::move(b), bg.kappa());
}

}  // namespace

std::vector<double> cyclic_pointwise_root(double kappa, const std::vector<double>& a, double b) {
  const int m = int(a.size());
  if (m < 2) throw DomainError("cyclic system needs m >= 2");
  if (kappa > 0.0) throw DomainError("pointwise root needs kappa <= 0");
  for (double ak : a)
    if (!(ak > 0.0)) throw DomainError("pointwise root needs every |gamma_k| > 0");
  if (kappa == 0.0 && !(b > 0.0)) throw DomainError("pointwise root undefined for kappa == 0 and b == 0");

  // Given s = b e^{-2 psi_1}: a_k X_k = T_k = s - kappa * sum_{j<=k} w_j / 2.
  auto unwind = [&](double s) {
    std::vector<double> T(static_cast<std::size_t>(m));
    double acc = s;
    for (int k = 0; k < m; ++k) {
      acc -= 0.5 * weight(m, k + 1) * kappa;
      T[std::size_t(k)] = acc;
    }
    std::vector<double> psi(static_cast<std::size_t>(m));
    psi[std::size_t(m - 1)] = 0.5 * std::log(T[std::size_t(m - 1)] / a[std::size_t(m - 1)]);
    for (int k = m - 2; k >= 0; --k)
      psi[std::size_t(k)] = psi[std::size_t(k + 1)] + std::log(T[std::size_t(k)] / a[std::size_t(k)]);
    return psi;
  };
  if (b == 0.0) return unwind(0.0);

  auto g = [&](double logs) { return logs - (std::log(b) - 2.0 * unwind(std::exp(logs))[0]); };
  double lo = -1.0, hi = 1.0;
  while (g(lo) > 0.0) lo -= 2.0 * (hi - lo);
  while (g(hi) < 0.0) hi += 2.0 * (hi - lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return unwind(std::exp(0.5 * (lo + hi)));
}

std::vector<ScalarField> cyclic_residual(const ConformalBackground& bg, const std::vector<QuarticInput>& gammas,
                                         const QuarticInput& gamma_n, const std::vector<ScalarField>& psi) {
  const CyclicModel model = make_model(bg, gammas, gamma_n);
  if (psi.size() != gammas.size()) throw DomainError("cyclic_residual: wrong number of fields");
  return detail::reaction_residual(bg, model, psi);
}

CyclicSolution solve_cyclic(const ConformalBackground& bg, const std::vector<QuarticInput>& gammas,
                            const QuarticInput& gamma_n, const SolverOptions& opts) {
  const CyclicModel model = make_model(bg, gammas, gamma_n);
  if (!(opts.tolerance > 0.0)) throw DomainError("solver tolerance must be positive");
  const Lattice& lat = bg.lattice();
  const int m = model.fields();
  const auto M = std::size_t(m);

  std::vector<ScalarField> start(M, ScalarField(lat, kNaN));
  std::vector<double> a(M);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    for (std::size_t i = 0; i < M; ++i) a[i] = model.a()[i][k];
    const auto root = cyclic_pointwise_root(bg.kappa()[k], a, model.b()[k]);
    for (std::size_t i = 0; i < M; ++i) start[i][k] = root[i];
  }

  detail::NewtonOutcome res =
      detail::newton(bg, model, std::move(start), {opts.tolerance, opts.max_iterations, opts.min_step}, {});
  CyclicSolution out;
  out.psi = std::move(res.fields);
  out.residual_inf = res.residual_inf;
  out.iterations = res.iterations;
  return out;
}

}  // namespace hitchin
