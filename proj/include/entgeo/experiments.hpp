#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "entgeo/bitvec.hpp"
#include "entgeo/circuit.hpp"
#include "entgeo/collapse.hpp"
#include "entgeo/contour.hpp"
#include "entgeo/ensemble.hpp"
#include "entgeo/fit.hpp"
#include "entgeo/geometry.hpp"
#include "entgeo/probes.hpp"
#include "entgeo/tableau.hpp"

namespace entgeo {

// ---------------------------------------------------------------------------
// shared per-trajectory analysis helpers

// Crossing counts 2*S([a, a+k)) for every window start a at fixed length k,
// from the clipped-gauge endpoints. Cyclic difference arrays make this
// O(width + starts) per length. Requires k <= width/2 (longer windows go
// through the pure-state mirror).
inline std::vector<long> interval_crossing_counts(const StabilizerState& s,
                                                  std::size_t k) {
  const std::size_t W = s.width();
  if (s.gauge() != Gauge::clipped)
    throw std::logic_error("crossing counts need the clipped gauge");
  if (k == 0 || 2 * k > W)
    throw std::invalid_argument("window length must satisfy 0 < k <= W/2");
  std::vector<long> diff(W + 1, 0);
  auto add = [&](std::size_t from, std::size_t len, long v) {
    if (from + len <= W) {
      diff[from] += v;
      diff[from + len] -= v;
    } else {
      diff[from] += v;
      diff[W] -= v;
      diff[0] += v;
      diff[from + len - W] -= v;
    }
  };
  for (std::size_t i = 0; i < W; ++i) {
    const std::size_t l = s.clipped_left(i), r = s.clipped_right(i);
    add((l + W - (k - 1)) % W, k, 1);
    add((r + W - (k - 1)) % W, k, 1);
    // windows holding both endpoints: directly, or wrapping past site 0
    const std::size_t span = r - l;
    if (span <= k - 1) add((r + W - (k - 1)) % W, k - span, -2);
    const std::size_t wspan = W - span;
    if (wspan <= k - 1) add((l + W - (k - 1)) % W, k - wspan, -2);
  }
  std::vector<long> counts(W);
  long run = 0;
  for (std::size_t a = 0; a < W; ++a) {
    run += diff[a];
    counts[a] = run;
  }
  return counts;
}

// Translation-averaged interval entropies S(k) for k = 1..max_k.
inline std::vector<double> translation_averaged_profile(StabilizerState& s,
                                                        std::size_t max_k) {
  s.clip_gauge();
  const std::size_t W = s.width();
  std::vector<double> out(max_k);
  for (std::size_t k = 1; k <= max_k; ++k) {
    const auto counts = interval_crossing_counts(s, k);
    long long sum = 0;
    for (long c : counts) sum += c;
    out[k - 1] = static_cast<double>(sum) / (2.0 * static_cast<double>(W));
  }
  return out;
}

inline long quarters_tripartite_information(const StabilizerState& s,
                                            std::size_t L) {
  const RegionSpec a{0, L / 4, {}}, b{L / 4, L / 4, {}}, c{L / 2, L / 4, {}};
  return tripartite_information(s, a, b, c);
}

// ---------------------------------------------------------------------------
// MIPT calibration

struct CalibrateParams {
  std::vector<std::size_t> L_list{16, 32, 64, 128};
  std::vector<double> rho_list;
  std::size_t samples = 500;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double gate_mix = 0.1;
  CriticalParams critical;
  std::uint64_t fingerprint = 0;
};

struct CalibrateResult {
  EnsembleSummary curves;  // coords: L, rho; observable: time-averaged I3
  std::vector<SizeCurve> size_curves;
  std::vector<double> pair_crossings;  // adjacent-size crossing estimates
  double rho_c_estimate = 0.0;
};

// Time-averaged tripartite information of consecutive quarter intervals in a
// uniform-rate circuit of depth 4L, averaged over the last 2L layers.
inline double mipt_trajectory_i3(std::size_t L, double rho, double gate_mix,
                                 const CriticalParams& crit,
                                 std::uint64_t seed) {
  CircuitConfig cfg;
  cfg.L = L;
  cfg.schedule = build_schedule(MetricSpec::uniform(rho), L, crit, 4 * L);
  cfg.gate_mix = gate_mix;
  cfg.seed = seed;
  Rng rng(seed);
  StabilizerState state = prepare_initial(cfg, rng);
  double acc = 0.0;
  std::size_t evals = 0;
  for (std::size_t layer = 0; layer < cfg.schedule.T; ++layer) {
    run_layer(state, layer, cfg, rng);
    if (layer >= 2 * L) {
      acc += static_cast<double>(quarters_tripartite_information(state, L));
      ++evals;
    }
  }
  return acc / static_cast<double>(evals);
}

// Interpolated crossings of consecutive size curves; the difference
// small-L minus large-L falls through zero at the transition.
inline std::vector<double> curve_crossings(const SizeCurve& small_l,
                                           const SizeCurve& large_l) {
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < small_l.rho.size(); ++i) {
    const double d0 = small_l.y[i] - large_l.y[i];
    const double d1 = small_l.y[i + 1] - large_l.y[i + 1];
    if (d0 == 0.0 && d1 == 0.0) continue;
    if ((d0 >= 0.0 && d1 < 0.0) || (d0 <= 0.0 && d1 > 0.0)) {
      const double f = d0 / (d0 - d1);
      roots.push_back(small_l.rho[i] +
                      f * (small_l.rho[i + 1] - small_l.rho[i]));
    }
  }
  return roots;
}

inline CalibrateResult calibrate_mipt(const CalibrateParams& p) {
  for (std::size_t L : p.L_list)
    if (L % 4 != 0)
      throw std::invalid_argument("I3 quarters need L divisible by 4");
  if (p.rho_list.size() < 2)
    throw std::invalid_argument("need at least two rates");
  CalibrateResult out;
  out.curves.observable = "i3_time_avg";
  out.curves.config_fingerprint = p.fingerprint;
  out.curves.coord_names = {"L", "rho"};
  for (std::size_t L : p.L_list) {
    SizeCurve curve;
    curve.L = L;
    for (double rho : p.rho_list) {
      const std::string id = "calibrate/L" + std::to_string(L) + "/rho" +
                             std::to_string(rho);
      auto acc = run_ensemble(
          p.samples, 1, p.threads, p.seed, id,
          [&](std::size_t, std::uint64_t seed) {
            return std::vector<double>{
                mipt_trajectory_i3(L, rho, p.gate_mix, p.critical, seed)};
          });
      out.curves.rows.push_back({{static_cast<double>(L), rho}, acc.mean(0),
                                 acc.stderr_(0), acc.count(0)});
      curve.rho.push_back(rho);
      curve.y.push_back(acc.mean(0));
      curve.err.push_back(acc.stderr_(0));
    }
    out.size_curves.push_back(std::move(curve));
  }
  for (std::size_t i = 0; i + 1 < out.size_curves.size(); ++i) {
    const auto roots =
        curve_crossings(out.size_curves[i], out.size_curves[i + 1]);
    if (!roots.empty()) {
      // keep the crossing with the steepest difference slope when several
      double best = roots[0];
      if (roots.size() > 1) {
        double best_gap = -1.0;
        for (double r0 : roots) {
          double gap = 0.0;
          for (std::size_t j = 0; j + 1 < out.size_curves[i].rho.size(); ++j)
            if (out.size_curves[i].rho[j] <= r0 &&
                r0 <= out.size_curves[i].rho[j + 1])
              gap = std::fabs(
                  (out.size_curves[i].y[j] - out.size_curves[i + 1].y[j]) -
                  (out.size_curves[i].y[j + 1] -
                   out.size_curves[i + 1].y[j + 1]));
          if (gap > best_gap) {
            best_gap = gap;
            best = r0;
          }
        }
      }
      out.pair_crossings.push_back(best);
    }
  }
  // The smallest sizes carry the largest finite-size corrections, so the
  // reported location is the crossing of the two largest sizes.
  if (!out.pair_crossings.empty())
    out.rho_c_estimate = out.pair_crossings.back();
  return out;
}

// ---------------------------------------------------------------------------
// hyperbolic (log-law) states

struct AdsParams {
  std::size_t L = 512;
  std::vector<double> l_list{2, 4, 8, 16};
  std::size_t samples = 500;
  std::uint64_t seed = 2;
  unsigned threads = 1;
  double gate_mix = 0.1;
  CriticalParams critical;
  std::size_t depth_factor = kAdsDepthFactor;
  std::size_t fit_min = 8;   // lower UV cutoff of the log-fit window
  std::size_t fit_max = 0;   // 0 -> L/4
  std::uint64_t fingerprint = 0;
};

struct AdsPerRadius {
  double l = 0.0;
  std::vector<double> mean, err;  // S(k), k = 1..L/2
  double i3_mean = 0.0, i3_err = 0.0;
  double alpha = 0.0, alpha_err = 0.0, offset = 0.0;
  double rel_rms = 0.0;  // fit residual over the window
};

struct AdsResult {
  std::vector<AdsPerRadius> radii;
  EnsembleSummary profile;  // coords: l, A
  EnsembleSummary i3;       // coords: l
  LinearFit alpha_vs_l;     // alpha = a*l + b
  double alpha_r2 = 0.0;
  LinearFit i3_vs_l;        // I3 = a'*l + b'
  double ratio = 0.0;       // -2 ln2 a / a'
};

inline AdsResult ads_experiment(const AdsParams& p) {
  if (p.L % 4 != 0) throw std::invalid_argument("L must be divisible by 4");
  const std::size_t half = p.L / 2;
  const std::size_t fit_max = p.fit_max ? p.fit_max : p.L / 4;
  AdsResult out;
  out.profile.observable = "ads_entropy_profile";
  out.profile.coord_names = {"l", "A"};
  out.profile.config_fingerprint = p.fingerprint;
  out.i3.observable = "ads_i3";
  out.i3.coord_names = {"l"};
  out.i3.config_fingerprint = p.fingerprint;

  for (double l : p.l_list) {
    const std::string id = "ads/l" + std::to_string(l);
    auto acc = run_ensemble(
        p.samples, half + 1, p.threads, p.seed, id,
        [&](std::size_t, std::uint64_t seed) {
          CircuitConfig cfg;
          cfg.L = p.L;
          cfg.schedule = build_schedule(MetricSpec::ads(l), p.L, p.critical,
                                        p.depth_factor * p.L);
          cfg.gate_mix = p.gate_mix;
          cfg.seed = seed;
          TrajectoryRecord rec = run_trajectory(cfg);
          std::vector<double> obs =
              translation_averaged_profile(rec.state, half);
          obs.push_back(static_cast<double>(
              quarters_tripartite_information(rec.state, p.L)));
          return obs;
        });
    AdsPerRadius r;
    r.l = l;
    for (std::size_t k = 1; k <= half; ++k) {
      r.mean.push_back(acc.mean(k - 1));
      r.err.push_back(acc.stderr_(k - 1));
      out.profile.rows.push_back({{l, static_cast<double>(k)},
                                  acc.mean(k - 1), acc.stderr_(k - 1),
                                  acc.count(k - 1)});
    }
    r.i3_mean = acc.mean(half);
    r.i3_err = acc.stderr_(half);
    out.i3.rows.push_back({{l}, r.i3_mean, r.i3_err, acc.count(half)});

    // alpha log|A| + offset over the fit window, inverse-variance weights
    std::vector<double> xs, ys, ws;
    for (std::size_t k = p.fit_min; k <= fit_max; ++k) {
      xs.push_back(std::log(static_cast<double>(k)));
      ys.push_back(r.mean[k - 1]);
      const double e = r.err[k - 1];
      ws.push_back(e > 0 ? 1.0 / (e * e) : 1.0);
    }
    const LinearFit f = fit_linear(xs, ys, ws);
    r.alpha = f.slope;
    r.alpha_err = std::sqrt(std::max(0.0, f.cov[0][0]));
    r.offset = f.intercept;
    long double ssr = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double res = ys[i] - (f.slope * xs[i] + f.intercept);
      ssr += res * res;
      sy += ys[i];
    }
    const double rms = std::sqrt(static_cast<double>(ssr) /
                                 static_cast<double>(xs.size()));
    r.rel_rms = rms / (static_cast<double>(sy) /
                       static_cast<double>(xs.size()));
    out.radii.push_back(std::move(r));
  }

  std::vector<double> ls, alphas, aw, i3s, iw;
  for (const auto& r : out.radii) {
    ls.push_back(r.l);
    alphas.push_back(r.alpha);
    aw.push_back(r.alpha_err > 0 ? 1.0 / (r.alpha_err * r.alpha_err) : 1.0);
    i3s.push_back(r.i3_mean);
    iw.push_back(r.i3_err > 0 ? 1.0 / (r.i3_err * r.i3_err) : 1.0);
  }
  out.alpha_vs_l = fit_linear(ls, alphas, aw);
  out.alpha_r2 = r_squared(ls, alphas, out.alpha_vs_l);
  out.i3_vs_l = fit_linear(ls, i3s, iw);
  out.ratio = -2.0 * std::log(2.0) * out.alpha_vs_l.slope /
              out.i3_vs_l.slope;
  return out;
}

// ---------------------------------------------------------------------------
// BTZ profiles

struct BtzParams {
  std::size_t L = 256;
  double l = 0.5, r_h = 0.5;
  InitialStateKind initial = InitialStateKind::volume_law;
  std::size_t samples = 500;
  std::uint64_t seed = 3;
  unsigned threads = 1;
  double gate_mix = 0.1;
  CriticalParams critical;
  double plateau_threshold = 0.05;  // bits per qubit over [3L/8, L/2)
  std::uint64_t fingerprint = 0;
};

struct BtzResult {
  std::vector<double> mean, err;  // S(k), k = 1..L/2
  EnsembleSummary profile;        // coords: A
  double fitted_s0 = 0.0, fitted_r = 0.0;
  double fit_objective = 0.0;
  double rel_rms = 0.0;
  double plateau_slope = 0.0;  // mean slope over [3L/8, L/2)
  bool plateau = false;
  double halfcut_step_mean = 0.0, halfcut_step_err = 0.0;
  bool cusp = false;
  std::size_t depth = 0;
};

inline double btz_model_entropy(double s0, double r, double r_h, double k,
                                std::size_t L) {
  if (!(s0 >= 0.0) || !(r >= r_h)) return std::nan("");
  const GeodesicModel m = GeodesicModel::btz(s0, r, r_h);
  const std::size_t ki = static_cast<std::size_t>(std::llround(k));
  return predict_interval_entropy(m, ki, L);
}

inline BtzResult btz_profile(const BtzParams& p) {
  if (p.L % 8 != 0)
    throw std::invalid_argument("BTZ profile expects L divisible by 8");
  const std::size_t half = p.L / 2;
  BtzResult out;
  out.depth = btz_depth(p.L, p.l, p.r_h);
  const std::string id = std::string("btz/") +
                         (p.initial == InitialStateKind::product ? "product"
                                                                 : "volume");
  auto acc = run_ensemble(
      p.samples, half + 1, p.threads, p.seed, id,
      [&](std::size_t, std::uint64_t seed) {
        CircuitConfig cfg;
        cfg.L = p.L;
        cfg.schedule =
            build_schedule(MetricSpec::btz(p.l, p.r_h), p.L, p.critical);
        cfg.initial.kind = p.initial;
        cfg.gate_mix = p.gate_mix;
        cfg.seed = seed;
        TrajectoryRecord rec = run_trajectory(cfg);
        std::vector<double> obs =
            translation_averaged_profile(rec.state, half);
        obs.push_back(obs[half - 1] - obs[half - 2]);  // step into L/2
        return obs;
      });
  out.profile.observable = "btz_entropy_profile";
  out.profile.coord_names = {"A"};
  out.profile.config_fingerprint = p.fingerprint;
  for (std::size_t k = 1; k <= half; ++k) {
    out.mean.push_back(acc.mean(k - 1));
    out.err.push_back(acc.stderr_(k - 1));
    out.profile.rows.push_back({{static_cast<double>(k)}, acc.mean(k - 1),
                                acc.stderr_(k - 1), acc.count(k - 1)});
  }
  out.halfcut_step_mean = acc.mean(half);
  out.halfcut_step_err = acc.stderr_(half);

  // two-parameter geodesic fit with the qubit-count cap
  std::vector<double> xs, ys, ws;
  for (std::size_t k = 1; k <= half; ++k) {
    xs.push_back(static_cast<double>(k));
    ys.push_back(out.mean[k - 1]);
    const double e = out.err[k - 1];
    ws.push_back(e > 0 ? 1.0 / (e * e) : 1.0);
  }
  const GeodesicModel probe = GeodesicModel::btz(1.0, 2.0 * p.r_h, p.r_h);
  const double d_half = geodesic_distance_btz(0.0, M_PI, probe);
  const double s0_scale = out.mean[half - 1] / std::max(1e-9, d_half);
  std::vector<std::vector<double>> grid;
  for (double fs : {0.25, 0.5, 1.0, 2.0, 4.0})
    for (double fr : {1.05, 1.5, 3.0, 8.0, 20.0})
      grid.push_back({std::max(1e-6, s0_scale * fs), p.r_h * fr});
  const auto model = [&](std::span<const double> prm, double x) {
    return btz_model_entropy(prm[0], prm[1], p.r_h, x, p.L);
  };
  const NonlinearFit fit = fit_nonlinear(model, xs, ys, ws, grid, 1e-6);
  out.fitted_s0 = fit.params[0];
  out.fitted_r = fit.params[1];
  out.fit_objective = fit.objective;
  long double ssr = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - model(fit.params, xs[i]);
    ssr += res * res;
    sy += ys[i];
  }
  out.rel_rms =
      std::sqrt(static_cast<double>(ssr) / static_cast<double>(xs.size())) /
      (static_cast<double>(sy) / static_cast<double>(xs.size()));

  const std::size_t w0 = 3 * p.L / 8;
  out.plateau_slope = (out.mean[half - 1] - out.mean[w0 - 1]) /
                      static_cast<double>(half - w0);
  out.plateau = out.plateau_slope < p.plateau_threshold;
  out.cusp = out.halfcut_step_mean > 2.0 * out.halfcut_step_err &&
             !out.plateau;
  return out;
}

// ---------------------------------------------------------------------------
// BTZ two-interval mutual information

struct MiParams {
  std::size_t L = 256;
  double l = 0.5, r_h = 0.5;
  std::size_t a_size = 0;  // 0 -> L/8
  std::vector<std::size_t> separations;
  std::size_t samples = 500;
  std::uint64_t seed = 4;
  unsigned threads = 1;
  double gate_mix = 0.1;
  CriticalParams critical;
  double s0 = 0.0, r = 0.0;  // geodesic parameters from the profile fit
  std::uint64_t fingerprint = 0;
};

struct MiResult {
  EnsembleSummary curve;          // coords: separation
  std::vector<double> model_i;    // parameter-free overlay at the same seps
  double model_crossover = 0.0;   // separation with equal saddles
  double measured_crossover = 0.0;  // measured I crossing one bit
  std::vector<std::size_t> separations;
};

// Mean over translations of I(A:B) for two length-a intervals separated by d,
// for every separation in one pass per trajectory: single-interval terms from
// clipped crossing counts, joint terms from the sliding recency basis.
inline std::vector<double> mi_trajectory_curve(
    StabilizerState& state, std::size_t a,
    std::span<const std::size_t> seps) {
  state.clip_gauge();
  const std::size_t L = state.width();
  const auto counts = interval_crossing_counts(state, a);
  std::vector<double> out;
  out.reserve(seps.size());
  for (std::size_t d : seps) {
    if (2 * a + d > L)
      throw std::invalid_argument("interval pair does not fit");
    RecencyBasis ab(L);
    long long total = 0;
    const std::size_t positions = 2 * (L - 1) + 2 * a;
    for (std::size_t p = 0; p < positions; ++p) {
      const std::size_t m = p >> 1;
      const std::size_t site = (m + ((p & 1) ? a + d : 0)) % L;
      ab.insert(state.stab_x_plane(site), static_cast<std::int64_t>(p));
      ab.insert(state.stab_z_plane(site), static_cast<std::int64_t>(p));
      if (p + 1 >= 2 * a && ((p + 1 - 2 * a) & 1) == 0) {
        const std::size_t s = (p + 1 - 2 * a) / 2;
        const long s_ab =
            static_cast<long>(ab.rank_since(static_cast<std::int64_t>(2 * s)))
            - static_cast<long>(2 * a);
        const long s_a = static_cast<long>(counts[s] / 2);
        const long s_b = static_cast<long>(counts[(s + a + d) % L] / 2);
        total += s_a + s_b - s_ab;
      }
    }
    out.push_back(static_cast<double>(total) / static_cast<double>(L));
  }
  return out;
}

inline double mi_model_value(const GeodesicModel& m, std::size_t a,
                             double d_cont, std::size_t L) {
  // continuous-separation variant of the two-saddle prediction
  const double sa = predict_interval_entropy(m, a, L);
  const double gap1 = d_cont;
  const double gap2 = static_cast<double>(L) - 2.0 * static_cast<double>(a) -
                      d_cont;
  const double c = std::min(gap1, gap2);
  auto pred_cont = [&](double q) {
    if (q <= 0.0 || q >= static_cast<double>(L)) return 0.0;
    const double dphi = 2.0 * M_PI * q / static_cast<double>(L);
    const double geo =
        std::get<BtzModel>(m.variant).s0 * geodesic_distance_btz(0.0, dphi, m);
    return m.cap ? std::min(geo, q) : geo;
  };
  const double disconnected = 2.0 * sa;
  const double connected =
      pred_cont(c) + pred_cont(2.0 * static_cast<double>(a) + c);
  return disconnected - soft_min_bits(disconnected, connected);
}

inline MiResult btz_mutual_info(const MiParams& p) {
  MiResult out;
  const std::size_t a = p.a_size ? p.a_size : p.L / 8;
  if (!(p.s0 > 0.0) || !(p.r >= p.r_h))
    throw std::invalid_argument("mutual information needs fitted s0 and r");
  out.separations = p.separations;
  if (out.separations.empty())
    for (std::size_t d = 2; d <= p.L / 4; d += 2) out.separations.push_back(d);

  const std::string id = "mi";
  auto acc = run_ensemble(
      p.samples, out.separations.size(), p.threads, p.seed, id,
      [&](std::size_t, std::uint64_t seed) {
        CircuitConfig cfg;
        cfg.L = p.L;
        cfg.schedule =
            build_schedule(MetricSpec::btz(p.l, p.r_h), p.L, p.critical);
        cfg.initial.kind = InitialStateKind::volume_law;
        cfg.gate_mix = p.gate_mix;
        cfg.seed = seed;
        TrajectoryRecord rec = run_trajectory(cfg);
        return mi_trajectory_curve(rec.state, a, out.separations);
      });
  out.curve.observable = "btz_mutual_information";
  out.curve.coord_names = {"separation"};
  out.curve.config_fingerprint = p.fingerprint;
  for (std::size_t i = 0; i < out.separations.size(); ++i)
    out.curve.rows.push_back({{static_cast<double>(out.separations[i])},
                              acc.mean(i), acc.stderr_(i), acc.count(i)});

  const GeodesicModel model = GeodesicModel::btz(p.s0, p.r, p.r_h);
  for (std::size_t d : out.separations)
    out.model_i.push_back(
        mi_model_value(model, a, static_cast<double>(d), p.L));

  // model crossover: equal saddles, locating I_model = 1 bit by bisection
  {
    double lo = 1e-6, hi = static_cast<double>(p.L) / 2.0 -
                           static_cast<double>(a);
    auto h = [&](double d) {
      const double sa = predict_interval_entropy(model, a, p.L);
      auto pred_cont = [&](double q) {
        if (q <= 0.0 || q >= static_cast<double>(p.L)) return 0.0;
        const double dphi = 2.0 * M_PI * q / static_cast<double>(p.L);
        const double geo = p.s0 * geodesic_distance_btz(0.0, dphi, model);
        return std::min(geo, q);
      };
      const double gap2 =
          static_cast<double>(p.L) - 2.0 * static_cast<double>(a) - d;
      const double c = std::min(d, gap2);
      return pred_cont(c) + pred_cont(2.0 * static_cast<double>(a) + c) -
             2.0 * sa;
    };
    if (h(lo) < 0.0 && h(hi) > 0.0) {
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 0.0 ? lo : hi) = mid;
      }
      out.model_crossover = 0.5 * (lo + hi);
    }
  }
  // measured crossover: interpolate the mean curve through one bit
  {
    out.measured_crossover = 0.0;
    for (std::size_t i = 0; i + 1 < out.separations.size(); ++i) {
      const double y0 = out.curve.rows[i].mean;
      const double y1 = out.curve.rows[i + 1].mean;
      if (y0 >= 1.0 && y1 < 1.0) {
        const double f = (y0 - 1.0) / (y0 - y1);
        out.measured_crossover =
            static_cast<double>(out.separations[i]) +
            f * static_cast<double>(out.separations[i + 1] -
                                    out.separations[i]);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// entanglement-wedge imaging

struct WedgeParams {
  std::size_t L = 128;
  double l = 0.5, r_h = 0.5;
  std::size_t a_size = 25;
  std::vector<std::size_t> separations{4, 8, 16};
  std::size_t samples = 1000;
  std::uint64_t seed = 5;
  unsigned threads = 1;
  double gate_mix = 0.1;
  CriticalParams critical;
  double contour_level = 0.75;
  std::size_t min_cell_samples = 2;
  std::uint64_t fingerprint = 0;
};

struct WedgeMap {
  std::size_t separation = 0;
  GridField mean;  // nt = depth, nx = L; NaN where n < min_cell_samples
  GridField stderr_map;
  std::vector<std::vector<std::size_t>> n;  // [t][x]
  std::vector<Polyline> contours;
  int components = 0;
};

struct WedgeResult {
  std::size_t depth = 0;
  std::vector<WedgeMap> maps;
};

inline WedgeResult wedge_map(const WedgeParams& p) {
  WedgeResult out;
  CriticalParams crit = p.critical;
  const MeasurementSchedule sched =
      build_schedule(MetricSpec::btz(p.l, p.r_h), p.L, crit);
  out.depth = sched.T;
  const std::size_t cells = sched.T * p.L;
  const std::size_t slots = p.separations.size() * cells;

  auto acc = run_ensemble(
      p.samples, slots, p.threads, p.seed, "wedge",
      [&](std::size_t, std::uint64_t seed) {
        CircuitConfig cfg;
        cfg.L = p.L;
        cfg.schedule = sched;
        cfg.initial.kind = InitialStateKind::volume_law;
        cfg.gate_mix = p.gate_mix;
        cfg.seed = seed;
        cfg.references = true;
        TrajectoryRecord rec = run_trajectory(cfg);
        Rng analysis(derive_stream_seed(seed, "wedge-analysis", 0));
        const auto samples = wedge_realization(rec, sched.T, p.a_size,
                                               p.separations, analysis);
        std::vector<double> obs(slots, std::nan(""));
        for (std::size_t k = 0; k < p.separations.size(); ++k)
          for (std::size_t t = 0; t < sched.T; ++t) {
            if (samples[k][t].empty()) continue;
            for (std::size_t x = 0; x < p.L; ++x) {
              const int v = samples[k][t][x];
              if (v < 0 || v > 2)
                throw std::logic_error(
                    "wedge sample escaped {0,1,2}");
              obs[(k * sched.T + t) * p.L + x] = v;
            }
          }
        return obs;
      });

  for (std::size_t k = 0; k < p.separations.size(); ++k) {
    WedgeMap m;
    m.separation = p.separations[k];
    m.mean.nx = p.L;
    m.mean.nt = sched.T;
    m.mean.v.assign(cells, std::nan(""));
    m.stderr_map = m.mean;
    m.n.assign(sched.T, std::vector<std::size_t>(p.L, 0));
    for (std::size_t t = 0; t < sched.T; ++t)
      for (std::size_t x = 0; x < p.L; ++x) {
        const std::size_t slot = (k * sched.T + t) * p.L + x;
        m.n[t][x] = acc.count(slot);
        if (acc.count(slot) >= p.min_cell_samples) {
          m.mean.at(t, x) = acc.mean(slot);
          m.stderr_map.at(t, x) = acc.stderr_(slot);
        }
      }
    m.contours = marching_squares(m.mean, p.contour_level);
    m.components = count_components_above(m.mean, p.contour_level);
    out.maps.push_back(std::move(m));
  }
  return out;
}

}  // namespace entgeo
