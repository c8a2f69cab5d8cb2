#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace qme {

struct SimplexOptions {
  double initial_step = 0.1;
  double ftol = 1e-12;      // spread of simplex values
  double xtol = 1e-10;      // simplex diameter
  std::size_t max_evals = 20000;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Nelder-Mead minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
inline SimplexResult nelder_mead_minimize(const std::function<double(const std::vector<double>&)>& f,
                                          std::vector<double> x0, const SimplexOptions& opt = {}) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.initial_step;
  std::vector<double> vals(n + 1);
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : INFINITY;
  };
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (evals < opt.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double diam = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) diam = std::max(diam, std::abs(pts[i][k] - pts[best][k]));
    if (std::abs(vals[worst] - vals[best]) <= opt.ftol && diam <= opt.xtol) break;
    if (diam <= opt.xtol * 1e-3) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / double(n);

    for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + (centroid[k] - pts[worst][k]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - pts[worst][k]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    for (std::size_t k = 0; k < n; ++k)
      xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k]) : centroid[k] + 0.5 * (pts[worst][k] - centroid[k]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
      vals[i] = eval(pts[i]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  const auto idx = static_cast<std::size_t>(it - vals.begin());
  return {pts[idx], vals[idx], evals};
}

/// Repeats the simplex search from its own optimum, with a shrinking initial
/// step, until the value stops improving.
inline SimplexResult nelder_mead_polish(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x0, SimplexOptions opt = {}, int max_restarts = 6) {
  SimplexResult best = nelder_mead_minimize(f, std::move(x0), opt);
  for (int r = 0; r < max_restarts; ++r) {
    opt.initial_step *= 0.25;
    SimplexResult next = nelder_mead_minimize(f, best.x, opt);
    next.evaluations += best.evaluations;
    const bool improved = next.value < best.value - opt.ftol;
    if (next.value <= best.value) best = std::move(next);
    if (!improved) break;
  }
  return best;
}

}  // namespace qme
