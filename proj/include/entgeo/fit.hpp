#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "entgeo/rng.hpp"

namespace entgeo {

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  // covariance of (slope, intercept)
  double cov[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

// Weighted least squares line. With explicit weights, interpret them as
// inverse variances and report the exact parameter covariance (X^T W X)^-1;
// without weights, ordinary least squares with the residual-variance scaled
// covariance.
inline LinearFit fit_linear(std::span<const double> xs,
                            std::span<const double> ys,
                            std::span<const double> weights = {}) {
  const std::size_t n = xs.size();
  if (n < 3 || ys.size() != n)
    throw FitError("fit_linear needs at least 3 points");
  const bool known_var = !weights.empty();
  if (known_var && weights.size() != n)
    throw FitError("weight count mismatch");
  long double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double w = known_var ? weights[i] : 1.0L;
    if (known_var && !(weights[i] > 0.0))
      throw FitError("weights must be positive");
    sw += w;
    sx += w * xs[i];
    sy += w * ys[i];
    sxx += w * xs[i] * xs[i];
    sxy += w * xs[i] * ys[i];
  }
  const long double det = sw * sxx - sx * sx;
  const long double scale = sw * sxx;
  if (!(det > 0) || (scale > 0 && det / scale < 1e-14L))
    throw FitError("singular fit: x values carry no variance");
  LinearFit f;
  f.slope = static_cast<double>((sw * sxy - sx * sy) / det);
  f.intercept = static_cast<double>((sxx * sy - sx * sxy) / det);
  // (X^T W X)^-1 with columns (x, 1)
  double c00 = static_cast<double>(sw / det);
  double c01 = static_cast<double>(-sx / det);
  double c11 = static_cast<double>(sxx / det);
  if (!known_var) {
    long double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double r = ys[i] - (f.slope * xs[i] + f.intercept);
      ssr += r * r;
    }
    const double s2 =
        n > 2 ? static_cast<double>(ssr / static_cast<long double>(n - 2))
              : 0.0;
    c00 *= s2;
    c01 *= s2;
    c11 *= s2;
  }
  f.cov[0][0] = c00;
  f.cov[0][1] = f.cov[1][0] = c01;
  f.cov[1][1] = c11;
  return f;
}

inline double r_squared(std::span<const double> xs, std::span<const double> ys,
                        const LinearFit& f) {
  long double sy = 0;
  for (double y : ys) sy += y;
  const long double mean = sy / static_cast<long double>(ys.size());
  long double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const long double r = ys[i] - (f.slope * xs[i] + f.intercept);
    ss_res += r * r;
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
  }
  if (ss_tot == 0) return 1.0;
  return static_cast<double>(1.0L - ss_res / ss_tot);
}

struct MinimizeResult {
  std::vector<double> x;
  double fx = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
};

// Deterministic Nelder-Mead simplex descent; stops when the simplex objective
// spread falls below tol or the evaluation budget runs out.
inline MinimizeResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, std::span<const double> step, double tol,
    std::size_t max_evals = 20000) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> pts(d + 1, std::vector<double>(x0.begin(), x0.end()));
  std::vector<double> fv(d + 1);
  std::size_t evals = 0;
  auto eval = [&](std::span<const double> p) {
    ++evals;
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(pts[i]);

  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  while (evals < max_evals) {
    // order: lo = best, hi = worst, sh = second worst
    std::size_t lo = 0, hi = 0, sh = 0;
    for (std::size_t i = 1; i <= d; ++i) {
      if (fv[i] < fv[lo]) lo = i;
      if (fv[i] > fv[hi]) hi = i;
    }
    sh = lo;
    for (std::size_t i = 0; i <= d; ++i)
      if (i != hi && fv[i] > fv[sh]) sh = i;
    if (fv[hi] - fv[lo] <= tol) break;

    for (std::size_t k = 0; k < d; ++k) {
      double s = 0;
      for (std::size_t i = 0; i <= d; ++i)
        if (i != hi) s += pts[i][k];
      centroid[k] = s / static_cast<double>(d);
    }
    for (std::size_t k = 0; k < d; ++k)
      xr[k] = centroid[k] + (centroid[k] - pts[hi][k]);
    const double fr = eval(xr);
    if (fr < fv[lo]) {
      for (std::size_t k = 0; k < d; ++k)
        xe[k] = centroid[k] + 2.0 * (centroid[k] - pts[hi][k]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[hi] = xe;
        fv[hi] = fe;
      } else {
        pts[hi] = xr;
        fv[hi] = fr;
      }
    } else if (fr < fv[sh]) {
      pts[hi] = xr;
      fv[hi] = fr;
    } else {
      for (std::size_t k = 0; k < d; ++k)
        xc[k] = centroid[k] + 0.5 * (pts[hi][k] - centroid[k]);
      const double fc = eval(xc);
      if (fc < fv[hi]) {
        pts[hi] = xc;
        fv[hi] = fc;
      } else {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == lo) continue;
          for (std::size_t k = 0; k < d; ++k)
            pts[i][k] = pts[lo][k] + 0.5 * (pts[i][k] - pts[lo][k]);
          fv[i] = eval(pts[i]);
        }
      }
    }
  }
  std::size_t lo = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fv[i] < fv[lo]) lo = i;
  return {pts[lo], fv[lo], evals};
}

using ModelFn =
    std::function<double(std::span<const double> params, double x)>;

struct NonlinearFit {
  std::vector<double> params;
  double objective = std::numeric_limits<double>::infinity();
};

// Grid-seeded derivative-free weighted least squares. Every grid point seeds
// a simplex descent; the best converged minimum wins. Deterministic.
inline NonlinearFit fit_nonlinear(const ModelFn& model,
                                  std::span<const double> xs,
                                  std::span<const double> ys,
                                  std::span<const double> weights,
                                  std::span<const std::vector<double>> grid,
                                  double tol) {
  if (xs.size() != ys.size() || xs.empty())
    throw FitError("fit_nonlinear needs matching nonempty data");
  if (grid.empty()) throw FitError("fit_nonlinear needs initial grid points");
  auto objective = [&](std::span<const double> p) {
    long double ssr = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      const double r = ys[i] - model(p, xs[i]);
      ssr += static_cast<long double>(w) * r * r;
    }
    return static_cast<double>(ssr);
  };
  NonlinearFit best;
  bool any_finite = false;
  for (const auto& seed : grid) {
    const double f0 = objective(seed);
    if (!std::isfinite(f0)) continue;
    any_finite = true;
    std::vector<double> step(seed.size());
    for (std::size_t k = 0; k < seed.size(); ++k)
      step[k] = seed[k] != 0.0 ? 0.25 * std::fabs(seed[k]) : 0.25;
    const MinimizeResult r = nelder_mead(objective, seed, step, tol);
    if (r.fx < best.objective) {
      best.objective = r.fx;
      best.params = r.x;
    }
  }
  if (!any_finite)
    throw FitError("no grid point produced a finite objective");
  return best;
}

}  // namespace entgeo
