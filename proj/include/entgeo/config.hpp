#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "entgeo/collapse.hpp"
#include "entgeo/csv.hpp"
#include "entgeo/experiments.hpp"
#include "entgeo/rng.hpp"

namespace entgeo {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline void line_col_of_offset(const std::string& text, std::size_t byte,
                               std::size_t& line, std::size_t& col) {
  line = 1;
  col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

}  // namespace detail

inline json parse_json_text(const std::string& text,
                            const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 0, col = 0;
    detail::line_col_of_offset(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": " + e.what());
  }
}

// Strict view over one JSON object: every key must be consumed, unknown keys
// fail with a nearest-name suggestion.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object())
      throw ConfigError(path_ + " must be a JSON object");
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (seen_.count(it.key())) continue;
      std::string msg = path_ + ": unknown key \"" + it.key() + "\"";
      std::size_t best = 3;
      std::string suggestion;
      for (const auto& k : known_) {
        const std::size_t d = detail::edit_distance(it.key(), k);
        if (d < best) {
          best = d;
          suggestion = k;
        }
      }
      if (!suggestion.empty()) msg += "; did you mean \"" + suggestion + "\"?";
      throw ConfigError(msg);
    }
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  T require(const std::string& key) {
    known_.insert(key);
    if (!j_.contains(key))
      throw ConfigError(path_ + ": missing required key \"" + key + "\"");
    return get<T>(key);
  }

  template <class T>
  T value_or(const std::string& key, T fallback) {
    known_.insert(key);
    if (!j_.contains(key)) return fallback;
    return get<T>(key);
  }

  const json& raw(const std::string& key) {
    known_.insert(key);
    seen_.insert(key);
    return j_.at(key);
  }

 private:
  template <class T>
  T get(const std::string& key) {
    seen_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_, known_;
};

struct CommonRunConfig {
  std::uint64_t seed = 1;
  std::size_t samples = 0;  // 0 means experiment default
  unsigned threads = 0;     // 0 means hardware concurrency
  double gate_mix = 0.1;
  CriticalParams critical;
};

inline CommonRunConfig parse_common(StrictObject& o,
                                    std::size_t default_samples) {
  CommonRunConfig c;
  c.seed = o.value_or<std::uint64_t>("seed", 1);
  c.samples = o.value_or<std::size_t>("samples", default_samples);
  c.threads = o.value_or<unsigned>("threads", 0);
  c.gate_mix = o.value_or<double>("gate_mix", 0.1);
  c.critical.rho_c = o.value_or<double>("rho_c", 0.2050);
  c.critical.nu = o.value_or<double>("nu", 1.30);
  if (!(c.gate_mix >= 0.0 && c.gate_mix <= 1.0))
    throw ConfigError("gate_mix: must lie in [0,1]");
  try {
    c.critical.check();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("critical parameters: ") + e.what());
  }
  if (c.samples < 2) throw ConfigError("samples: need at least 2");
  return c;
}

inline void check_even_L(std::size_t L) {
  if (L < 2 || L % 2 != 0)
    throw ConfigError(
        "L: brickwork pairing needs an even system size >= 2");
}

inline CalibrateParams parse_calibrate(const json& j) {
  StrictObject o(j, "calibrate config");
  if (o.has("experiment") &&
      o.require<std::string>("experiment") != "calibrate")
    throw ConfigError("experiment: does not name this subcommand");
  const CommonRunConfig c = parse_common(o, 500);
  CalibrateParams p;
  p.seed = c.seed;
  p.samples = c.samples;
  p.threads = c.threads;
  p.gate_mix = c.gate_mix;
  p.critical = c.critical;
  p.L_list = o.value_or<std::vector<std::size_t>>("L_list", {16, 32, 64, 128});
  for (std::size_t L : p.L_list) {
    check_even_L(L);
    if (L % 4 != 0)
      throw ConfigError("L_list: quarter intervals need L divisible by 4");
  }
  if (o.has("rho_grid")) {
    StrictObject g(o.raw("rho_grid"), "rho_grid");
    const double lo = g.require<double>("min");
    const double hi = g.require<double>("max");
    const double step = g.require<double>("step");
    g.finish();
    if (!(step > 0.0) || !(hi > lo))
      throw ConfigError("rho_grid: need max > min and step > 0");
    for (int i = 0; lo + i * step <= hi + 1e-12; ++i)
      p.rho_list.push_back(lo + i * step);
  } else {
    p.rho_list = o.value_or<std::vector<double>>("rho_list", {});
  }
  if (p.rho_list.size() < 2)
    throw ConfigError("rho_grid/rho_list: need at least two rates");
  for (double r : p.rho_list)
    if (!(r >= 0.0 && r <= 1.0))
      throw ConfigError("rho: rates must lie in [0,1]");
  o.finish();
  return p;
}

struct CollapseConfig {
  std::string curves_csv;
  CollapseOptions options;
};

inline CollapseConfig parse_collapse(const json& j) {
  StrictObject o(j, "collapse config");
  if (o.has("experiment") &&
      o.require<std::string>("experiment") != "collapse")
    throw ConfigError("experiment: does not name this subcommand");
  CollapseConfig c;
  c.curves_csv = o.require<std::string>("curves_csv");
  c.options.bootstrap = o.value_or<std::size_t>("bootstrap", 200);
  c.options.bootstrap_seed = o.value_or<std::uint64_t>("bootstrap_seed", 7);
  c.options.bandwidth_fraction = o.value_or<double>("bandwidth", 0.10);
  if (!(c.options.bandwidth_fraction > 0.0))
    throw ConfigError("bandwidth: must be positive");
  o.finish();
  return c;
}

inline AdsParams parse_ads(const json& j) {
  StrictObject o(j, "ads config");
  if (o.has("experiment") && o.require<std::string>("experiment") != "ads")
    throw ConfigError("experiment: does not name this subcommand");
  const CommonRunConfig c = parse_common(o, 500);
  AdsParams p;
  p.seed = c.seed;
  p.samples = c.samples;
  p.threads = c.threads;
  p.gate_mix = c.gate_mix;
  p.critical = c.critical;
  p.L = o.value_or<std::size_t>("L", 512);
  check_even_L(p.L);
  if (p.L % 4 != 0) throw ConfigError("L: must be divisible by 4");
  p.l_list = o.value_or<std::vector<double>>("l_list", {2, 4, 8, 16});
  for (double l : p.l_list)
    if (!(l >= 0.0)) throw ConfigError("l_list: radii must be >= 0");
  p.depth_factor = o.value_or<std::size_t>("depth_factor", kAdsDepthFactor);
  if (p.depth_factor < 1) throw ConfigError("depth_factor: must be >= 1");
  p.fit_min = o.value_or<std::size_t>("fit_min", 8);
  p.fit_max = o.value_or<std::size_t>("fit_max", 0);
  if (p.fit_max == 0) p.fit_max = p.L / 4;
  if (p.fit_min < 1 || p.fit_max <= p.fit_min || p.fit_max > p.L / 2)
    throw ConfigError("fit window: need 1 <= fit_min < fit_max <= L/2");
  o.finish();
  return p;
}

inline BtzParams parse_btz(const json& j) {
  StrictObject o(j, "btz config");
  if (o.has("experiment") && o.require<std::string>("experiment") != "btz")
    throw ConfigError("experiment: does not name this subcommand");
  const CommonRunConfig c = parse_common(o, 500);
  BtzParams p;
  p.seed = c.seed;
  p.samples = c.samples;
  p.threads = c.threads;
  p.gate_mix = c.gate_mix;
  p.critical = c.critical;
  p.L = o.require<std::size_t>("L");
  check_even_L(p.L);
  if (p.L % 8 != 0) throw ConfigError("L: BTZ profile needs L divisible by 8");
  p.l = o.require<double>("l");
  p.r_h = o.require<double>("r_h");
  if (!(p.l > 0.0) || !(p.r_h > 0.0))
    throw ConfigError("l/r_h: must be positive");
  const std::string init = o.value_or<std::string>("initial", "volume_law");
  if (init == "product")
    p.initial = InitialStateKind::product;
  else if (init == "volume_law")
    p.initial = InitialStateKind::volume_law;
  else
    throw ConfigError("initial: expected \"product\" or \"volume_law\"");
  o.finish();
  return p;
}

inline MiParams parse_mi(const json& j, const std::string& config_dir) {
  StrictObject o(j, "mi config");
  if (o.has("experiment") && o.require<std::string>("experiment") != "mi")
    throw ConfigError("experiment: does not name this subcommand");
  const CommonRunConfig c = parse_common(o, 500);
  MiParams p;
  p.seed = c.seed;
  p.samples = c.samples;
  p.threads = c.threads;
  p.gate_mix = c.gate_mix;
  p.critical = c.critical;
  p.L = o.require<std::size_t>("L");
  check_even_L(p.L);
  p.l = o.require<double>("l");
  p.r_h = o.require<double>("r_h");
  if (!(p.l > 0.0) || !(p.r_h > 0.0))
    throw ConfigError("l/r_h: must be positive");
  p.a_size = o.value_or<std::size_t>("A_size", p.L / 8);
  if (p.a_size == 0 || 2 * p.a_size >= p.L)
    throw ConfigError("A_size: intervals must fit on the chain");
  p.separations = o.value_or<std::vector<std::size_t>>("separations", {});
  if (o.has("fit_json")) {
    std::string path = o.require<std::string>("fit_json");
    if (!path.empty() && path[0] != '/' && !config_dir.empty())
      path = config_dir + "/" + path;
    const json fit = parse_json_text(read_file(path), path);
    p.s0 = fit.at("s0").get<double>();
    p.r = fit.at("r").get<double>();
  } else {
    p.s0 = o.value_or<double>("s0", 0.0);
    p.r = o.value_or<double>("r", 0.0);
  }
  if (!(p.s0 > 0.0) || !(p.r >= p.r_h))
    throw ConfigError(
        "s0/r: provide fitted geodesic parameters (inline or via fit_json)");
  o.finish();
  return p;
}

inline WedgeParams parse_wedge(const json& j) {
  StrictObject o(j, "wedge config");
  if (o.has("experiment") && o.require<std::string>("experiment") != "wedge")
    throw ConfigError("experiment: does not name this subcommand");
  const CommonRunConfig c = parse_common(o, 1000);
  WedgeParams p;
  p.seed = c.seed;
  p.samples = c.samples;
  p.threads = c.threads;
  p.gate_mix = c.gate_mix;
  p.critical = c.critical;
  p.L = o.value_or<std::size_t>("L", 128);
  check_even_L(p.L);
  p.l = o.value_or<double>("l", 0.5);
  p.r_h = o.value_or<double>("r_h", 0.5);
  if (!(p.l > 0.0) || !(p.r_h > 0.0))
    throw ConfigError("l/r_h: must be positive");
  p.a_size = o.value_or<std::size_t>("A_size", 25);
  p.separations =
      o.value_or<std::vector<std::size_t>>("separations", {4, 8, 16});
  for (std::size_t d : p.separations)
    if (2 * p.a_size + d > p.L)
      throw ConfigError("separations: interval pair does not fit on the chain");
  if (!o.value_or<bool>("references", true))
    throw ConfigError(
        "references: wedge imaging requires reference insertion enabled");
  p.contour_level = o.value_or<double>("contour_level", 0.75);
  if (!(p.contour_level > 0.0 && p.contour_level < 2.0))
    throw ConfigError("contour_level: must lie in (0,2)");
  p.min_cell_samples = o.value_or<std::size_t>("min_cell_samples", 2);
  o.finish();
  return p;
}

}  // namespace entgeo
