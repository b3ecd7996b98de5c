#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entgeo/config.hpp"
#include "entgeo/csv.hpp"
#include "entgeo/version.hpp"

namespace entgeo {

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;     // fnv-1a of the raw config bytes, hex
  std::string config_content;  // embedded so replay is self-contained
  std::uint64_t master_seed = 0;
  std::size_t samples = 0;
  unsigned threads = 0;
  std::string started_at, finished_at;
  std::vector<std::string> artifacts;
  std::string version;
  bool complete = false;
  std::string error;

  json to_json() const {
    json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["config_hash"] = config_hash;
    j["config_content"] = config_content;
    j["master_seed"] = master_seed;
    j["samples"] = samples;
    j["threads"] = threads;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["artifacts"] = artifacts;
    j["version"] = version;
    j["complete"] = complete;
    if (!error.empty()) j["error"] = error;
    return j;
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_path = j.at("config_path").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config_content = j.at("config_content").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.samples = j.at("samples").get<std::size_t>();
    m.threads = j.at("threads").get<unsigned>();
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    m.version = j.value("version", "");
    m.complete = j.value("complete", false);
    return m;
  }
};

inline std::string iso_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

struct RunOptions {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<unsigned> threads;
};

namespace detail {

class ArtifactSink {
 public:
  ArtifactSink(std::string dir, RunManifest& m) : dir_(std::move(dir)), m_(m) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    write_file(dir_ + "/" + name, content);
    m_.artifacts.push_back(name);
  }

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  RunManifest& m_;
};

inline std::string summary_csv(const EnsembleSummary& s) {
  std::ostringstream os;
  s.write_csv(os);
  return os.str();
}

inline std::string schedule_csv(const MeasurementSchedule& s) {
  std::ostringstream os;
  s.write_csv(os);
  return os.str();
}

inline json linear_fit_json(const LinearFit& f) {
  return json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"cov",
               {{f.cov[0][0], f.cov[0][1]}, {f.cov[1][0], f.cov[1][1]}}}};
}

}  // namespace detail

// Applies CLI overrides onto parsed parameter structs.
template <class P>
inline void apply_overrides(P& p, const RunOptions& opt) {
  if (opt.seed) p.seed = *opt.seed;
  if (opt.samples) p.samples = *opt.samples;
  if (opt.threads) p.threads = *opt.threads;
  if (p.threads == 0) p.threads = default_threads();
}

inline void execute_experiment(const std::string& command, const json& cfg,
                               const std::string& config_dir,
                               const RunOptions& opt, std::uint64_t fingerprint,
                               RunManifest& manifest,
                               detail::ArtifactSink& sink) {
  if (command == "calibrate") {
    CalibrateParams p = parse_calibrate(cfg);
    p.fingerprint = fingerprint;
    apply_overrides(p, opt);
    manifest.master_seed = p.seed;
    manifest.samples = p.samples;
    manifest.threads = p.threads;
    const CalibrateResult r = calibrate_mipt(p);
    sink.write("curves.csv", detail::summary_csv(r.curves));
    json cross;
    cross["pair_crossings"] = r.pair_crossings;
    cross["rho_c_estimate"] = r.rho_c_estimate;
    sink.write("crossings.json", cross.dump(2) + "\n");
  } else if (command == "collapse") {
    CollapseConfig cc = parse_collapse(cfg);
    std::string path = cc.curves_csv;
    if (!path.empty() && path[0] != '/' && !config_dir.empty())
      path = config_dir + "/" + path;
    const CsvTable t = read_csv(path);
    const std::size_t cl = t.column("L"), cr = t.column("rho"),
                      cm = t.column("mean"), ce = t.column("stderr");
    std::vector<SizeCurve> curves;
    for (const auto& row : t.rows) {
      const auto L = static_cast<std::size_t>(row[cl]);
      auto it = std::find_if(curves.begin(), curves.end(),
                             [&](const SizeCurve& c) { return c.L == L; });
      if (it == curves.end()) {
        curves.push_back(SizeCurve{L, {}, {}, {}});
        it = curves.end() - 1;
      }
      it->rho.push_back(row[cr]);
      it->y.push_back(row[cm]);
      it->err.push_back(row[ce]);
    }
    const CollapseResult r = scaling_collapse(curves, cc.options);
    json out;
    out["rho_c"] = r.rho_c_fit;
    out["nu"] = r.nu_fit;
    out["objective"] = r.objective;
    out["rho_c_ci"] = {r.rho_c_ci[0], r.rho_c_ci[1]};
    out["nu_ci"] = {r.nu_ci[0], r.nu_ci[1]};
    sink.write("collapse.json", out.dump(2) + "\n");
    std::ostringstream sc;
    sc << "L,rho,u,mean,stderr\n";
    for (const auto& c : curves) {
      const double scale = std::pow(static_cast<double>(c.L), 1.0 / r.nu_fit);
      for (std::size_t i = 0; i < c.rho.size(); ++i)
        sc << c.L << ',' << g12(c.rho[i]) << ','
           << g12((c.rho[i] - r.rho_c_fit) * scale) << ',' << g12(c.y[i])
           << ',' << g12(c.err[i]) << '\n';
    }
    sink.write("scaled_points.csv", sc.str());
  } else if (command == "ads") {
    AdsParams p = parse_ads(cfg);
    p.fingerprint = fingerprint;
    apply_overrides(p, opt);
    manifest.master_seed = p.seed;
    manifest.samples = p.samples;
    manifest.threads = p.threads;
    const AdsResult r = ads_experiment(p);
    sink.write("profile.csv", detail::summary_csv(r.profile));
    sink.write("i3.csv", detail::summary_csv(r.i3));
    json fits;
    for (const auto& rad : r.radii)
      fits["per_radius"].push_back(json{{"l", rad.l},
                                        {"alpha", rad.alpha},
                                        {"alpha_err", rad.alpha_err},
                                        {"offset", rad.offset},
                                        {"rel_rms", rad.rel_rms}});
    fits["alpha_vs_l"] = detail::linear_fit_json(r.alpha_vs_l);
    fits["alpha_r2"] = r.alpha_r2;
    fits["i3_vs_l"] = detail::linear_fit_json(r.i3_vs_l);
    fits["ratio_2ln2_a_over_aprime"] = r.ratio;
    sink.write("fits.json", fits.dump(2) + "\n");
    for (double l : p.l_list) {
      const auto sched = build_schedule(MetricSpec::ads(l), p.L, p.critical,
                                        p.depth_factor * p.L);
      std::ostringstream name;
      name << "schedule_l" << g12(l) << ".csv";
      sink.write(name.str(), detail::schedule_csv(sched));
    }
  } else if (command == "btz") {
    BtzParams p = parse_btz(cfg);
    p.fingerprint = fingerprint;
    apply_overrides(p, opt);
    manifest.master_seed = p.seed;
    manifest.samples = p.samples;
    manifest.threads = p.threads;
    const BtzResult r = btz_profile(p);
    sink.write("profile.csv", detail::summary_csv(r.profile));
    json fit;
    fit["s0"] = r.fitted_s0;
    fit["r"] = r.fitted_r;
    fit["r_h"] = p.r_h;
    fit["objective"] = r.fit_objective;
    fit["rel_rms"] = r.rel_rms;
    fit["plateau"] = r.plateau;
    fit["plateau_slope"] = r.plateau_slope;
    fit["cusp"] = r.cusp;
    fit["halfcut_step_mean"] = r.halfcut_step_mean;
    fit["halfcut_step_err"] = r.halfcut_step_err;
    fit["T"] = r.depth;
    sink.write("fit.json", fit.dump(2) + "\n");
    const GeodesicModel gm = GeodesicModel::btz(r.fitted_s0, r.fitted_r,
                                                p.r_h);
    std::ostringstream mc;
    mc << "A,S_pred\n";
    for (std::size_t k = 1; k <= p.L / 2; ++k)
      mc << k << ',' << g12(predict_interval_entropy(gm, k, p.L)) << '\n';
    sink.write("model.csv", mc.str());
    sink.write("schedule.csv",
               detail::schedule_csv(build_schedule(MetricSpec::btz(p.l, p.r_h),
                                                   p.L, p.critical)));
  } else if (command == "mi") {
    MiParams p = parse_mi(cfg, config_dir);
    p.fingerprint = fingerprint;
    apply_overrides(p, opt);
    manifest.master_seed = p.seed;
    manifest.samples = p.samples;
    manifest.threads = p.threads;
    const MiResult r = btz_mutual_info(p);
    sink.write("mi.csv", detail::summary_csv(r.curve));
    std::ostringstream mc;
    mc << "separation,I_pred\n";
    for (std::size_t i = 0; i < r.separations.size(); ++i)
      mc << r.separations[i] << ',' << g12(r.model_i[i]) << '\n';
    sink.write("model.csv", mc.str());
    json cross;
    cross["model_crossover"] = r.model_crossover;
    cross["measured_crossover"] = r.measured_crossover;
    sink.write("crossover.json", cross.dump(2) + "\n");
    sink.write("schedule.csv",
               detail::schedule_csv(build_schedule(MetricSpec::btz(p.l, p.r_h),
                                                   p.L, p.critical)));
  } else if (command == "wedge") {
    WedgeParams p = parse_wedge(cfg);
    p.fingerprint = fingerprint;
    apply_overrides(p, opt);
    manifest.master_seed = p.seed;
    manifest.samples = p.samples;
    manifest.threads = p.threads;
    const WedgeResult r = wedge_map(p);
    json topo;
    topo["depth"] = r.depth;
    for (const auto& m : r.maps) {
      std::ostringstream mc;
      mc << "x,t,mean_I,stderr,n\n";
      for (std::size_t t = 0; t < m.mean.nt; ++t)
        for (std::size_t x = 0; x < m.mean.nx; ++x) {
          mc << x << ',' << t << ',';
          if (m.n[t][x] >= p.min_cell_samples)
            mc << g12(m.mean.at(t, x)) << ',' << g12(m.stderr_map.at(t, x));
          else
            mc << ',';
          mc << ',' << m.n[t][x] << '\n';
        }
      sink.write("map_sep" + std::to_string(m.separation) + ".csv", mc.str());
      json lines = json::array();
      for (const auto& line : m.contours) {
        json pl = json::array();
        for (const auto& pt : line) pl.push_back({pt.x, pt.t});
        lines.push_back(pl);
      }
      json cont;
      cont["level"] = p.contour_level;
      cont["polylines"] = lines;
      sink.write("contours_sep" + std::to_string(m.separation) + ".json",
                 cont.dump() + "\n");
      topo["components"].push_back(json{{"separation", m.separation},
                                        {"components", m.components}});
    }
    sink.write("topology.json", topo.dump(2) + "\n");
    sink.write("schedule.csv",
               detail::schedule_csv(build_schedule(MetricSpec::btz(p.l, p.r_h),
                                                   p.L, p.critical)));
  } else {
    throw ConfigError("unknown command " + command);
  }
}

// Runs one experiment end to end: parse, execute, write artifacts, manifest.
// Returns the manifest path.
inline std::string execute_run(const RunOptions& opt) {
  RunManifest manifest;
  manifest.command = opt.command;
  manifest.config_path = opt.config_path;
  manifest.version = kVersion;
  manifest.started_at = iso_utc_now();
  const std::string raw = read_file(opt.config_path);
  manifest.config_hash = hex64(fnv1a64(raw.data(), raw.size()));
  manifest.config_content = raw;
  const json cfg = parse_json_text(raw, opt.config_path);
  const std::string config_dir =
      std::filesystem::path(opt.config_path).parent_path().string();
  detail::ArtifactSink sink(opt.out_dir, manifest);
  try {
    execute_experiment(opt.command, cfg, config_dir, opt,
                       fnv1a64(raw.data(), raw.size()), manifest, sink);
    manifest.complete = true;
  } catch (const std::exception& e) {
    // flag the partial run; artifacts written so far stay listed
    manifest.complete = false;
    manifest.error = e.what();
    manifest.finished_at = iso_utc_now();
    try {
      write_file(opt.out_dir + "/manifest.json",
                 manifest.to_json().dump(2) + "\n");
    } catch (...) {
    }
    throw;
  }
  manifest.finished_at = iso_utc_now();
  const std::string path = opt.out_dir + "/manifest.json";
  write_file(path, manifest.to_json().dump(2) + "\n");
  return path;
}

struct ReplayMismatch {
  std::string artifact;
};

// Re-runs a manifest into a scratch directory and byte-compares every listed
// artifact against the original outputs. Returns the mismatched names.
inline std::vector<std::string> execute_replay(
    const std::string& manifest_path, const std::string& scratch_dir) {
  const json mj =
      parse_json_text(read_file(manifest_path), manifest_path);
  const RunManifest m = RunManifest::from_json(mj);
  if (!m.complete)
    throw std::runtime_error("manifest records an incomplete run");
  const std::string orig_dir =
      std::filesystem::path(manifest_path).parent_path().string();
  std::filesystem::create_directories(scratch_dir);
  const std::string cfg_copy = scratch_dir + "/config_replay.json";
  write_file(cfg_copy, m.config_content);
  RunOptions opt;
  opt.command = m.command;
  opt.config_path = cfg_copy;
  opt.out_dir = scratch_dir;
  opt.seed = m.master_seed;
  opt.samples = m.samples;
  opt.threads = m.threads;
  execute_run(opt);
  std::vector<std::string> mismatched;
  for (const auto& name : m.artifacts) {
    const std::string a = orig_dir + "/" + name;
    const std::string b = scratch_dir + "/" + name;
    if (!std::filesystem::exists(b) || read_file(a) != read_file(b))
      mismatched.push_back(name);
  }
  return mismatched;
}

}  // namespace entgeo
