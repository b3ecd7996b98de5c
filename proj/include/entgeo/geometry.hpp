#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <variant>
#include <vector>

namespace entgeo {

// Transition point and correlation-length exponent of the uniform-rate
// entanglement transition for this gate family.
struct CriticalParams {
  double rho_c = 0.2050;
  double nu = 1.30;

  void check() const {
    if (!(rho_c > 0.0 && rho_c < 1.0))
      throw std::invalid_argument("rho_c must lie in (0,1)");
    if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  }
};

struct UniformMetric {
  double rho = 0.0;
};
struct AdsMetric {
  double l = 1.0;  // AdS radius in lattice units; l = 0 degenerates to the
                   // uniform critical circuit
};
struct BtzMetric {
  double l = 0.5;
  double r_h = 0.5;
};

struct MetricSpec {
  std::variant<UniformMetric, AdsMetric, BtzMetric> variant;

  static MetricSpec uniform(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0))
      throw std::invalid_argument("uniform rate must lie in [0,1]");
    return {UniformMetric{rho}};
  }
  static MetricSpec ads(double l) {
    if (!(l >= 0.0)) throw std::invalid_argument("AdS radius must be >= 0");
    return {AdsMetric{l}};
  }
  static MetricSpec btz(double l, double r_h) {
    if (!(l > 0.0) || !(r_h > 0.0))
      throw std::invalid_argument("BTZ needs l > 0 and r_h > 0");
    return {BtzMetric{l, r_h}};
  }

  const char* name() const {
    if (std::holds_alternative<UniformMetric>(variant)) return "uniform";
    if (std::holds_alternative<AdsMetric>(variant)) return "ads";
    return "btz";
  }
};

// rho(t) for the regularized hyperbolic schedule: starts critical in the far
// past and reaches zero on the output slice.
inline double rho_ads(double t, double l, const CriticalParams& crit) {
  if (t > 0.0) throw std::domain_error("AdS schedule needs t <= 0");
  if (l < 0.0) throw std::domain_error("AdS radius must be >= 0");
  if (l == 0.0) return t == 0.0 ? 0.0 : crit.rho_c;
  const double a = std::pow(l / (l + std::fabs(t)), 1.0 / crit.nu);
  return crit.rho_c * (1.0 - a);
}

// Circuit depth fixed by the aspect ratio L/T = 4 r_h / l, rounded to layers.
inline std::size_t btz_depth(std::size_t L, double l, double r_h) {
  if (L == 0 || !(l > 0.0) || !(r_h > 0.0))
    throw std::invalid_argument("btz_depth needs positive arguments");
  const double T = static_cast<double>(L) * l / (4.0 * r_h);
  const long rounded = std::lround(T);
  if (rounded < 1)
    throw std::invalid_argument("BTZ depth rounds below one layer");
  return static_cast<std::size_t>(rounded);
}

inline double btz_time_of_radius(double r, double T, double r_h) {
  if (!(r >= r_h)) throw std::domain_error("radius below horizon");
  const double u = std::sqrt((r / r_h) * (r / r_h) - 1.0);
  return T * (2.0 / M_PI * std::atan(u) - 1.0);
}

inline double btz_radius_of_time(double t, double T, double r_h) {
  if (!(t >= -T && t < 0.0))
    throw std::domain_error("time outside [-T, 0)");
  return r_h / std::sin(M_PI * std::fabs(t) / (2.0 * T));
}

// Entropy density s(t) = (pi l / 2T) csc(pi |t| / 2T); reduces to l/|t| for
// |t| << T and to pi l / 2T on the horizon slice t = -T.
inline double entropy_density_btz(double t, double l, double T) {
  if (!(t >= -T) || !(t < 0.0))
    throw std::domain_error("time outside [-T, 0)");
  return (M_PI * l / (2.0 * T)) / std::sin(M_PI * std::fabs(t) / (2.0 * T));
}

// rho = rho_c - s^(1/nu), clamped into [0,1]; the clamp at zero is where the
// evolution effectively stops.
inline double rho_from_density(double s, const CriticalParams& crit) {
  if (!(s >= 0.0)) throw std::domain_error("entropy density must be >= 0");
  const double rho = crit.rho_c - std::pow(s, 1.0 / crit.nu);
  return std::min(1.0, std::max(0.0, rho));
}

// Discretized rate grid rho(x, t). For the metrics handled here the rate is
// spatially uniform at fixed t; layer k of T covers t in [-T+k, -T+k+1) and
// is evaluated at its midpoint.
struct MeasurementSchedule {
  std::size_t L = 0;
  std::size_t T = 0;
  MetricSpec metric;
  CriticalParams critical;
  std::vector<double> layer_rate;  // size T

  double layer_time(std::size_t layer) const {
    return -static_cast<double>(T) + static_cast<double>(layer) + 0.5;
  }

  double rate(std::size_t x, std::size_t layer) const {
    if (x >= L || layer >= T)
      throw std::invalid_argument("schedule index out of range");
    return layer_rate[layer];
  }

  void write_csv(std::ostream& os) const {
    os << "t_layer,x_site,rho\n";
    char buf[64];
    for (std::size_t k = 0; k < T; ++k) {
      for (std::size_t x = 0; x < L; ++x) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.12g\n", k, x,
                      layer_rate[k]);
        os << buf;
      }
    }
  }
};

inline constexpr std::size_t kAdsDepthFactor = 4;

inline MeasurementSchedule build_schedule(
    const MetricSpec& metric, std::size_t L, const CriticalParams& critical,
    std::size_t depth_override = 0) {
  critical.check();
  if (L == 0) throw std::invalid_argument("schedule needs L >= 1");
  MeasurementSchedule s;
  s.L = L;
  s.metric = metric;
  s.critical = critical;
  if (const auto* u = std::get_if<UniformMetric>(&metric.variant)) {
    if (depth_override == 0)
      throw std::invalid_argument("uniform schedule needs an explicit depth");
    s.T = depth_override;
    s.layer_rate.assign(s.T, u->rho);
  } else if (const auto* a = std::get_if<AdsMetric>(&metric.variant)) {
    s.T = depth_override ? depth_override : kAdsDepthFactor * L;
    s.layer_rate.resize(s.T);
    for (std::size_t k = 0; k < s.T; ++k)
      s.layer_rate[k] = rho_ads(s.layer_time(k), a->l, critical);
  } else {
    const auto& b = std::get<BtzMetric>(metric.variant);
    s.T = depth_override ? depth_override : btz_depth(L, b.l, b.r_h);
    s.layer_rate.resize(s.T);
    for (std::size_t k = 0; k < s.T; ++k) {
      const double sd = entropy_density_btz(
          s.layer_time(k), b.l, static_cast<double>(s.T));
      s.layer_rate[k] = rho_from_density(sd, critical);
    }
  }
  for (double r : s.layer_rate)
    if (!(r >= 0.0 && r <= 1.0))
      throw std::logic_error("schedule rate escaped [0,1]");
  return s;
}

// --- geodesic predictions ---------------------------------------------------

struct AdsLogModel {
  double alpha = 0.0;   // entropy per log-length, in bits per nat
  double offset = 0.0;  // background critical contribution
};

struct BtzModel {
  double s0 = 0.0;  // entropy per unit geodesic length, bits
  double r = 1.0;   // effective boundary radius (UV cutoff)
  double r_h = 1.0;
};

struct GeodesicModel {
  std::variant<AdsLogModel, BtzModel> variant;
  bool cap = true;  // clamp predictions at the region qubit count

  static GeodesicModel ads_log(double alpha, double offset) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    return {AdsLogModel{alpha, offset}, false};
  }
  static GeodesicModel btz(double s0, double r, double r_h, bool cap = true) {
    if (!(s0 >= 0.0)) throw std::invalid_argument("s0 must be >= 0");
    if (!(r_h > 0.0) || !(r >= r_h))
      throw std::invalid_argument("need r >= r_h > 0");
    return {BtzModel{s0, r, r_h}, cap};
  }
};

// Boundary geodesic length between angles phi1, phi2 at fixed radius r,
// minimized over windings around the horizon. After reducing the angle
// difference to (-pi, pi], windings beyond |n| = 1 only lengthen the
// argument of the (monotone) cosh, so the three-way minimum is exact.
inline double geodesic_distance_btz(double phi1, double phi2,
                                    const GeodesicModel& model) {
  const auto* m = std::get_if<BtzModel>(&model.variant);
  if (m == nullptr) throw std::invalid_argument("BTZ distance needs BTZ model");
  if (!(m->r >= m->r_h)) throw std::invalid_argument("model has r < r_h");
  double d = std::remainder(phi1 - phi2, 2.0 * M_PI);  // (-pi, pi]
  const double rr = (m->r / m->r_h) * (m->r / m->r_h);
  double best = HUGE_VAL;
  for (int n = -1; n <= 1; ++n) {
    const double arg = rr * (std::cosh(m->r_h * (d + 2.0 * M_PI * n)) - 1.0) +
                       1.0;
    best = std::min(best, std::acosh(std::max(1.0, arg)));
  }
  return best;
}

// Predicted entanglement entropy (bits) of a boundary interval of a_size
// qubits out of L. The log model mirrors across the half cut; the BTZ model
// is capped by the qubit count when the cap flag is set.
inline double predict_interval_entropy(const GeodesicModel& model,
                                       std::size_t a_size, std::size_t L) {
  if (a_size > L) throw std::invalid_argument("interval larger than system");
  if (a_size == 0 || a_size == L) return 0.0;
  if (const auto* ads = std::get_if<AdsLogModel>(&model.variant)) {
    const std::size_t m = std::min(a_size, L - a_size);
    return ads->alpha * std::log(static_cast<double>(m)) + ads->offset;
  }
  const double dphi = 2.0 * M_PI * static_cast<double>(a_size) /
                      static_cast<double>(L);
  const double d = geodesic_distance_btz(0.0, dphi, model);
  const double geo = std::get<BtzModel>(model.variant).s0 * d;
  if (!model.cap) return geo;
  return std::min(geo, static_cast<double>(a_size));
}

// Two-sided soft minimum in the entropy base: -log2(2^-a + 2^-b).
inline double soft_min_bits(double a, double b) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  return lo - std::log2(1.0 + std::exp2(lo - hi));
}

struct TwoIntervalSaddles {
  double disconnected = 0.0;  // gamma(A) u gamma(B)
  double connected = 0.0;     // gamma(C) u gamma(ACB)
  double joint = 0.0;         // soft-min of the two
};

// Joint entropy of two disjoint intervals from the two competing
// minimal-surface configurations. Intervals are (start, length) on the
// periodic chain; C is the shorter gap between them.
inline TwoIntervalSaddles joint_entropy_two_intervals(
    const GeodesicModel& model, std::size_t a_start, std::size_t a_len,
    std::size_t b_start, std::size_t b_len, std::size_t L) {
  if (a_len == 0 || b_len == 0 || a_len + b_len > L)
    throw std::invalid_argument("degenerate interval pair");
  const std::size_t gap1 = (b_start + L - (a_start + a_len) % L) % L;
  const std::size_t gap2 = L - a_len - b_len - gap1;
  if (gap1 > L - a_len - b_len)
    throw std::invalid_argument("intervals overlap");
  const std::size_t c = std::min(gap1, gap2);
  TwoIntervalSaddles out;
  out.disconnected = predict_interval_entropy(model, a_len, L) +
                     predict_interval_entropy(model, b_len, L);
  out.connected = predict_interval_entropy(model, c, L) +
                  predict_interval_entropy(model, a_len + b_len + c, L);
  out.joint = soft_min_bits(out.disconnected, out.connected);
  return out;
}

}  // namespace entgeo
