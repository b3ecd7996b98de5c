#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "entgeo/fit.hpp"
#include "entgeo/rng.hpp"

namespace entgeo {

// One finite-size curve y(rho) at system size L with standard errors.
struct SizeCurve {
  std::size_t L = 0;
  std::vector<double> rho;
  std::vector<double> y;
  std::vector<double> err;
};

struct CollapseResult {
  double rho_c_fit = 0.0;
  double nu_fit = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  double rho_c_ci[2] = {0.0, 0.0};  // bootstrap 2.5% / 97.5%
  double nu_ci[2] = {0.0, 0.0};
};

struct CollapseOptions {
  double rho_c_min = 0.15, rho_c_max = 0.26;
  double nu_min = 0.7, nu_max = 2.2;
  std::size_t grid_rho = 23, grid_nu = 31;
  int refine_rounds = 3;
  double bandwidth_fraction = 0.10;  // of the scaled-variable range
  std::size_t bootstrap = 200;
  std::uint64_t bootstrap_seed = 7;
};

namespace detail {

// Quality of collapse: leave-one-out local linear regression of all points in
// the scaled variable u = (rho - rho_c) L^(1/nu); objective is the summed
// squared residual to that master curve.
inline double collapse_objective(const std::vector<SizeCurve>& curves,
                                 double rho_c, double nu,
                                 double bandwidth_fraction,
                                 std::vector<double>& us,
                                 std::vector<double>& vs,
                                 std::vector<double>& ws) {
  us.clear();
  vs.clear();
  ws.clear();
  for (const auto& c : curves) {
    const double scale = std::pow(static_cast<double>(c.L), 1.0 / nu);
    for (std::size_t i = 0; i < c.rho.size(); ++i) {
      us.push_back((c.rho[i] - rho_c) * scale);
      vs.push_back(c.y[i]);
      const double e = i < c.err.size() ? c.err[i] : 0.0;
      ws.push_back(e > 0 ? 1.0 / (e * e) : 1.0);
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(us.begin(), us.end());
  const double h = std::max(1e-12, bandwidth_fraction * (*hi_it - *lo_it));
  double obj = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    // weighted local line through all other points
    long double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < us.size(); ++j) {
      if (j == i) continue;
      const double z = (us[j] - us[i]) / h;
      const double k = std::exp(-0.5 * z * z) * ws[j];
      sw += k;
      sx += k * us[j];
      sy += k * vs[j];
      sxx += k * us[j] * us[j];
      sxy += k * us[j] * vs[j];
    }
    double pred;
    const long double det = sw * sxx - sx * sx;
    if (sw <= 0) continue;
    if (det > 1e-30L * sw * sxx || det > 1e-300L) {
      const long double slope = (sw * sxy - sx * sy) / det;
      const long double icept = (sxx * sy - sx * sxy) / det;
      pred = static_cast<double>(slope * us[i] + icept);
    } else {
      pred = static_cast<double>(sy / sw);
    }
    const double r = vs[i] - pred;
    obj += r * r;
  }
  return obj;
}

struct GridBest {
  double rho_c = 0, nu = 0, obj = std::numeric_limits<double>::infinity();
};

inline GridBest grid_minimize(const std::vector<SizeCurve>& curves,
                              const CollapseOptions& opt, double r0, double r1,
                              double n0, double n1, std::size_t nr,
                              std::size_t nn) {
  GridBest best;
  std::vector<double> us, vs, ws;
  for (std::size_t a = 0; a < nr; ++a) {
    const double rho_c =
        nr == 1 ? r0 : r0 + (r1 - r0) * static_cast<double>(a) /
                                static_cast<double>(nr - 1);
    for (std::size_t b = 0; b < nn; ++b) {
      const double nu =
          nn == 1 ? n0 : n0 + (n1 - n0) * static_cast<double>(b) /
                                  static_cast<double>(nn - 1);
      const double obj = collapse_objective(curves, rho_c, nu,
                                            opt.bandwidth_fraction, us, vs, ws);
      if (obj < best.obj) best = {rho_c, nu, obj};
    }
  }
  return best;
}

inline GridBest fit_one(const std::vector<SizeCurve>& curves,
                        const CollapseOptions& opt) {
  GridBest best = grid_minimize(curves, opt, opt.rho_c_min, opt.rho_c_max,
                                opt.nu_min, opt.nu_max, opt.grid_rho,
                                opt.grid_nu);
  double dr = (opt.rho_c_max - opt.rho_c_min) /
              static_cast<double>(opt.grid_rho - 1);
  double dn = (opt.nu_max - opt.nu_min) / static_cast<double>(opt.grid_nu - 1);
  for (int round = 0; round < opt.refine_rounds; ++round) {
    const GridBest refined = grid_minimize(
        curves, opt, std::max(opt.rho_c_min, best.rho_c - dr),
        std::min(opt.rho_c_max, best.rho_c + dr),
        std::max(opt.nu_min, best.nu - dn), std::min(opt.nu_max, best.nu + dn),
        9, 9);
    if (refined.obj <= best.obj) best = refined;
    dr *= 0.25;
    dn *= 0.25;
  }
  return best;
}

}  // namespace detail

// Fit (rho_c, nu) by minimizing the collapse objective on a grid with local
// refinement; confidence intervals from a parametric bootstrap over the
// per-point standard errors.
inline CollapseResult scaling_collapse(const std::vector<SizeCurve>& curves,
                                       const CollapseOptions& opt = {}) {
  if (curves.size() < 3)
    throw std::invalid_argument("collapse needs at least 3 system sizes");
  std::size_t points = 0;
  for (const auto& c : curves) {
    if (c.rho.size() != c.y.size() || c.rho.size() < 3)
      throw std::invalid_argument("degenerate collapse grid");
    points += c.rho.size();
  }
  if (points < 12) throw std::invalid_argument("too few points to collapse");

  const detail::GridBest best = detail::fit_one(curves, opt);
  CollapseResult out;
  out.rho_c_fit = best.rho_c;
  out.nu_fit = best.nu;
  out.objective = best.obj;

  if (opt.bootstrap >= 8) {
    Rng rng(opt.bootstrap_seed);
    std::vector<double> rs, ns;
    rs.reserve(opt.bootstrap);
    ns.reserve(opt.bootstrap);
    std::vector<SizeCurve> resampled = curves;
    for (std::size_t b = 0; b < opt.bootstrap; ++b) {
      for (std::size_t c = 0; c < curves.size(); ++c)
        for (std::size_t i = 0; i < curves[c].y.size(); ++i) {
          const double e =
              i < curves[c].err.size() ? curves[c].err[i] : 0.0;
          resampled[c].y[i] = curves[c].y[i] + e * gaussian(rng);
        }
      const detail::GridBest gb = detail::fit_one(resampled, opt);
      rs.push_back(gb.rho_c);
      ns.push_back(gb.nu);
    }
    std::sort(rs.begin(), rs.end());
    std::sort(ns.begin(), ns.end());
    const auto pick = [](const std::vector<double>& v, double q) {
      const double pos = q * static_cast<double>(v.size() - 1);
      const std::size_t i = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(i);
      return i + 1 < v.size() ? v[i] * (1 - frac) + v[i + 1] * frac : v[i];
    };
    out.rho_c_ci[0] = pick(rs, 0.025);
    out.rho_c_ci[1] = pick(rs, 0.975);
    out.nu_ci[0] = pick(ns, 0.025);
    out.nu_ci[1] = pick(ns, 0.975);
  }
  return out;
}

}  // namespace entgeo
