#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "entgeo/rng.hpp"

namespace entgeo {

struct EnsembleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SummaryRow {
  std::vector<double> coords;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

// Per-observable ensemble statistics; serializable to CSV with a fixed,
// documented column order.
struct EnsembleSummary {
  std::string observable;
  std::uint64_t config_fingerprint = 0;
  std::vector<std::string> coord_names;
  std::vector<SummaryRow> rows;

  void write_csv(std::ostream& os) const {
    for (const auto& c : coord_names) os << c << ',';
    os << "mean,stderr,n\n";
    char buf[64];
    for (const auto& r : rows) {
      for (double c : r.coords) {
        std::snprintf(buf, sizeof buf, "%.12g,", c);
        os << buf;
      }
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%zu\n", r.mean, r.stderr_,
                    r.n);
      os << buf;
    }
  }
};

// Mean / standard-error accumulation per observable slot. Accumulation order
// is fixed by trajectory index, so summaries do not depend on scheduling.
class SlotAccumulator {
 public:
  explicit SlotAccumulator(std::size_t slots)
      : n_(slots, 0), mean_(slots, 0.0), m2_(slots, 0.0) {}

  void add(std::size_t slot, double v) {
    if (std::isnan(v)) return;  // missing sample (e.g. reference gap)
    auto& n = n_[slot];
    ++n;
    const double d = v - mean_[slot];
    mean_[slot] += d / static_cast<double>(n);
    m2_[slot] += d * (v - mean_[slot]);
  }

  std::size_t count(std::size_t slot) const { return n_[slot]; }
  double mean(std::size_t slot) const { return mean_[slot]; }
  double stderr_(std::size_t slot) const {
    const std::size_t n = n_[slot];
    if (n < 2) return 0.0;
    const double var = m2_[slot] / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
  }

  std::size_t slots() const { return n_.size(); }

 private:
  std::vector<std::size_t> n_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

// Runs n independent seeded trajectories (embarrassingly parallel, dynamic
// scheduling) and folds their observable vectors into per-slot statistics in
// index order. Reducer failures are aggregated with the offending seeds.
//
// reduce(index, seed) must be a pure function of its arguments.
inline SlotAccumulator run_ensemble(
    std::size_t n, std::size_t slots, unsigned threads,
    std::uint64_t master_seed, std::string_view experiment_id,
    const std::function<std::vector<double>(std::size_t, std::uint64_t)>&
        reduce) {
  if (n < 2) throw std::invalid_argument("ensemble needs n >= 2");
  if (threads == 0) threads = 1;
  std::vector<std::vector<double>> results(n);
  std::vector<std::pair<std::uint64_t, std::string>> failures;
  std::mutex fail_mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const std::uint64_t seed = derive_stream_seed(master_seed,
                                                    experiment_id, i);
      try {
        results[i] = reduce(i, seed);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mu);
        failures.emplace_back(seed, e.what());
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!failures.empty()) {
    std::ostringstream msg;
    msg << failures.size() << " trajectories failed; seeds:";
    for (const auto& [seed, what] : failures)
      msg << ' ' << seed << " (" << what << ')';
    throw EnsembleError(msg.str());
  }
  SlotAccumulator acc(slots);
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i].size() != slots)
      throw EnsembleError("reducer emitted a wrong-size observable vector");
    for (std::size_t s = 0; s < slots; ++s) acc.add(s, results[i][s]);
  }
  return acc;
}

inline unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

}  // namespace entgeo
