#include "hitchin/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hitchin/error.hpp"

namespace hitchin {

CountTable count_closed_geodesics(const FlatSurface& surface, const std::vector<double>& cutoffs,
                                  const GeodesicOptions& opts) {
  if (cutoffs.empty()) throw GeometryError("no length cutoffs");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i] > 0.0) || !std::isfinite(cutoffs[i])) throw GeometryError("cutoffs must be positive");
    if (i > 0 && !(cutoffs[i] > cutoffs[i - 1])) throw GeometryError("cutoffs must be increasing");
  }
  const auto lengths = class_lengths(surface, cutoffs.back(), opts);
  const double tol = surface.length_tolerance();
  CountTable t;
  t.cutoffs = cutoffs;
  for (double L : cutoffs)
    t.counts.push_back(std::upper_bound(lengths.begin(), lengths.end(), L + tol) - lengths.begin());
  return t;
}

std::int64_t count_closed_geodesics(const FlatSurface& surface, double L, const GeodesicOptions& opts) {
  return count_closed_geodesics(surface, std::vector<double>{L}, opts).counts.front();
}

std::vector<double> even_cutoffs(double L_max, int n) {
  if (n < 1 || !(L_max > 0.0)) throw GeometryError("need a positive cutoff and at least one point");
  std::vector<double> out;
  for (int i = 1; i <= n; ++i) out.push_back(L_max * i / n);
  return out;
}

EntropyFit entropy_fit(const CountTable& table) {
  const std::size_t n = table.cutoffs.size();
  if (n < 4 || table.counts.size() != n) throw GeometryError("entropy fit needs at least 4 cutoffs");
  if (std::all_of(table.counts.begin(), table.counts.end(), [&](auto c) { return c == table.counts.front(); }))
    throw GeometryError("degenerate count table: every count is equal");
  for (std::size_t i = 1; i < n; ++i)
    if (table.counts[i] < table.counts[i - 1]) throw GeometryError("counts must be nondecreasing");

  EntropyFit fit;
  for (std::size_t j = 0; j < n; ++j) {
    const double end = table.cutoffs[j];
    double sx = 0, sy = 0;
    int k = 0;
    for (std::size_t i = 0; i <= j; ++i)
      if (table.cutoffs[i] >= end / 2 && table.counts[i] > 0) {
        sx += table.cutoffs[i];
        sy += std::log(double(table.counts[i]));
        ++k;
      }
    if (k < 2) continue;
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i <= j; ++i)
      if (table.cutoffs[i] >= end / 2 && table.counts[i] > 0) {
        const double dx = table.cutoffs[i] - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(double(table.counts[i])) - my);
      }
    fit.windows.push_back({end, sxy / sxx, k});
  }
  if (fit.windows.empty()) throw GeometryError("no window holds two positive counts");
  fit.headline = fit.windows.back().slope;
  const double half = table.cutoffs.back() / 2;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& w : fit.windows)
    if (w.end >= half) {
      lo = std::min(lo, w.slope);
      hi = std::max(hi, w.slope);
    }
  fit.spread = fit.headline != 0.0 ? (hi - lo) / std::abs(fit.headline) : hi - lo;
  return fit;
}

double flat_entropy_bound(double flat_entropy, double t) {
  if (!(t > 0.0)) throw GeometryError("t must be positive");
  return flat_entropy / (4.0 * std::sqrt(t));
}

}  // namespace hitchin
