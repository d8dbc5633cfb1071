#ifndef CIRCMIX_OPTIMIZE_HPP
#define CIRCMIX_OPTIMIZE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace circmix::opt {

struct ScalarResult {
  double x;
  double value;
  int evaluations;
};

/// Maximizes a unimodal `f` on [a, b] by Brent's method: golden-section steps
/// with parabolic interpolation whenever the parabola is well behaved.
template <class F>
ScalarResult brent_maximize(F&& f, double a, double b, double tol = 1e-8, int max_iter = 200) {
  constexpr double golden = 0.3819660112501051;
  double x = a + golden * (b - a);
  double w = x;
  double v = x;
  double fx = -f(x);
  double fw = fx;
  double fv = fx;
  double d = 0.0;
  double e = 0.0;
  int evals = 1;
  for (int it = 0; it < max_iter; ++it) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * 0.5 + 1e-12 * std::abs(x);
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (m > x) ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= m) ? a - x : b - x;
      d = golden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = -f(u);
    ++evals;
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, -fx, evals};
}

/// Coarse grid scan followed by Brent refinement inside the best bracket.
/// Guards against the multimodality a single Brent run cannot see.
template <class F>
ScalarResult grid_then_brent(F&& f, double a, double b, int grid_points, double tol = 1e-8) {
  const double h = (b - a) / (grid_points - 1);
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double v = f(a + h * i);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = a + h * std::max(0, best - 1);
  const double hi = a + h * std::min(grid_points - 1, best + 1);
  ScalarResult r = brent_maximize(f, lo, hi, tol);
  r.evaluations += grid_points;
  // Brent never evaluates the bracket ends; keep a boundary optimum if it wins.
  const double at_best = a + h * best;
  if (best_value > r.value) return {at_best, best_value, r.evaluations};
  return r;
}

struct SimplexResult {
  std::vector<double> x;
  double value;
  int evaluations;
  bool converged;
};

/// Nelder-Mead direct search maximizing `f` from `start` with initial step sizes `step`.
template <class F>
SimplexResult nelder_mead_maximize(F&& f, std::vector<double> start, const std::vector<double>& step,
                                   double ftol = 1e-12, int max_evals = 4000) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(n + 1);
  int evals = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    vals[i] = -f(pts[i]);
    ++evals;
  }
  std::vector<std::size_t> order(n + 1);
  bool converged = false;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return vals[l] < vals[r]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= ftol * (std::abs(vals[best]) + 1e-300) + 1e-300) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return p;
    };
    auto reflected = along(-1.0);
    const double fr = -f(reflected);
    ++evals;
    if (fr < vals[best]) {
      auto expanded = along(-2.0);
      const double fe = -f(expanded);
      ++evals;
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
    } else {
      auto contracted = along(fr < vals[worst] ? -0.5 : 0.5);
      const double fc = -f(contracted);
      ++evals;
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = contracted;
        vals[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          vals[i] = -f(pts[i]);
          ++evals;
        }
      }
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  const auto idx = static_cast<std::size_t>(it - vals.begin());
  return {pts[idx], -*it, evals, converged};
}

}  // namespace circmix::opt

#endif  // CIRCMIX_OPTIMIZE_HPP
