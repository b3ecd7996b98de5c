#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "entgeo/geometry.hpp"
#include "entgeo/pauli.hpp"
#include "entgeo/rng.hpp"
#include "entgeo/tableau.hpp"

namespace entgeo {

enum class InitialStateKind { product, volume_law };

struct InitialStateSpec {
  InitialStateKind kind = InitialStateKind::product;
  std::size_t depth = 0;  // volume-law scrambling depth; 0 means 2L
};

// One sampled brickwork gate: a SWAP or iSWAP core dressed with independent
// uniformly random single-qubit Cliffords on the incoming and outgoing legs.
struct TwoQubitGate {
  bool swap_core = false;  // false -> iSWAP
  Clifford1q pre_a, pre_b, post_a, post_b;
};

inline TwoQubitGate sample_gate(Rng& rng, double gate_mix) {
  TwoQubitGate g;
  g.swap_core = uniform01(rng) < gate_mix;
  g.pre_a = Clifford1q{static_cast<std::uint8_t>(uniform_index(rng, 24))};
  g.pre_b = Clifford1q{static_cast<std::uint8_t>(uniform_index(rng, 24))};
  g.post_a = Clifford1q{static_cast<std::uint8_t>(uniform_index(rng, 24))};
  g.post_b = Clifford1q{static_cast<std::uint8_t>(uniform_index(rng, 24))};
  return g;
}

inline void apply_gate(StabilizerState& s, const TwoQubitGate& g,
                       std::size_t a, std::size_t b) {
  s.apply_single(a, g.pre_a);
  s.apply_single(b, g.pre_b);
  if (g.swap_core)
    s.apply_swap(a, b);
  else
    s.apply_iswap(a, b);
  s.apply_single(a, g.post_a);
  s.apply_single(b, g.post_b);
}

inline void apply_gate_inverse(StabilizerState& s, const TwoQubitGate& g,
                               std::size_t a, std::size_t b) {
  s.apply_single(a, inverse(g.post_a));
  s.apply_single(b, inverse(g.post_b));
  if (g.swap_core)
    s.apply_swap(a, b);
  else
    s.apply_iswap_inverse(a, b);
  s.apply_single(a, inverse(g.pre_a));
  s.apply_single(b, inverse(g.pre_b));
}

struct MeasurementEvent {
  std::uint32_t layer = 0;
  std::uint32_t site = 0;
  PauliAxis axis = PauliAxis::Z;
  std::int8_t outcome = 0;
};

struct ReferenceEntry {
  std::size_t layer = 0;
  std::size_t site = 0;     // system site of the Bell partner
  std::size_t ancilla = 0;  // absolute qubit index of the reference
};

struct ReferenceRegistry {
  std::vector<ReferenceEntry> entries;
  std::size_t width_extension = 0;  // ancilla slots appended to the state

  const ReferenceEntry* find_layer(std::size_t layer) const {
    for (const auto& e : entries)
      if (e.layer == layer) return &e;
    return nullptr;
  }
};

struct CircuitConfig {
  std::size_t L = 0;  // even; brickwork pairing needs it
  MeasurementSchedule schedule;
  InitialStateSpec initial;
  double gate_mix = 0.1;  // probability of a SWAP core
  std::uint64_t seed = 0;
  bool references = false;

  void check() const {
    if (L < 2 || L % 2 != 0)
      throw std::invalid_argument("brickwork pairing needs even L >= 2");
    if (schedule.L != L)
      throw std::invalid_argument("schedule and circuit disagree on L");
    if (schedule.layer_rate.size() != schedule.T)
      throw std::invalid_argument("schedule grid size mismatch");
    if (!(gate_mix >= 0.0 && gate_mix <= 1.0))
      throw std::invalid_argument("gate_mix must lie in [0,1]");
  }

  std::size_t width() const { return references ? L + schedule.T : L; }
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::size_t measurement_count = 0;
  std::vector<MeasurementEvent> events;
  ReferenceRegistry registry;
  StabilizerState state;
};

inline StabilizerState prepare_initial(const CircuitConfig& cfg, Rng& rng) {
  cfg.check();
  StabilizerState s(cfg.width(), cfg.L);
  if (cfg.initial.kind == InitialStateKind::volume_law) {
    const std::size_t depth =
        cfg.initial.depth ? cfg.initial.depth : 2 * cfg.L;
    for (std::size_t layer = 0; layer < depth; ++layer) {
      for (std::size_t i = 0; i < cfg.L / 2; ++i) {
        const std::size_t a =
            (layer % 2 == 0) ? 2 * i : (2 * i + 1) % cfg.L;
        const std::size_t b =
            (layer % 2 == 0) ? 2 * i + 1 : (2 * i + 2) % cfg.L;
        apply_gate(s, sample_gate(rng, cfg.gate_mix), a, b);
      }
    }
  }
  return s;
}

// Gates on even/odd bonds by layer parity, then independent random-axis
// measurements with the layer's scheduled rate. Returns the layer's events.
inline std::vector<MeasurementEvent> run_layer(StabilizerState& s,
                                               std::size_t layer,
                                               const CircuitConfig& cfg,
                                               Rng& rng) {
  if (s.width() < cfg.L) throw std::invalid_argument("state narrower than L");
  for (std::size_t i = 0; i < cfg.L / 2; ++i) {
    const std::size_t a = (layer % 2 == 0) ? 2 * i : (2 * i + 1) % cfg.L;
    const std::size_t b = (layer % 2 == 0) ? 2 * i + 1 : (2 * i + 2) % cfg.L;
    apply_gate(s, sample_gate(rng, cfg.gate_mix), a, b);
  }
  std::vector<MeasurementEvent> events;
  for (std::size_t x = 0; x < cfg.L; ++x) {
    if (uniform01(rng) >= cfg.schedule.rate(x, layer)) continue;
    static constexpr PauliAxis kAxes[3] = {PauliAxis::X, PauliAxis::Y,
                                           PauliAxis::Z};
    const PauliAxis axis = kAxes[uniform_index(rng, 3)];
    const MeasurementResult r = s.measure_pauli(x, axis, rng);
    events.push_back({static_cast<std::uint32_t>(layer),
                      static_cast<std::uint32_t>(x), axis,
                      static_cast<std::int8_t>(r.outcome)});
  }
  return events;
}

// Replaces the post-measurement state at one randomly chosen measured site
// with half of a Bell pair; the other half is a fresh ancilla that no gate
// touches afterwards. Skips layers without measurements.
inline void insert_reference(StabilizerState& s, ReferenceRegistry& reg,
                             std::size_t layer,
                             std::span<const MeasurementEvent> layer_events,
                             Rng& rng) {
  if (layer_events.empty()) return;
  const std::size_t ancilla = s.system_size() + reg.entries.size();
  if (ancilla >= s.width())
    throw std::invalid_argument("no ancilla slot left for reference");
  const MeasurementEvent& ev =
      layer_events[uniform_index(rng, layer_events.size())];
  // Rotate the collapsed site onto +Z, then entangle: the ancilla slot is
  // still |0>, so H + CNOT makes the Bell pair exactly.
  s.apply_single(ev.site, rotation_to_z(ev.axis, ev.outcome));
  s.apply_hadamard(ev.site);
  s.apply_cnot(ev.site, ancilla);
  reg.entries.push_back({layer, ev.site, ancilla});
  reg.width_extension = s.width() - s.system_size();
}

inline TrajectoryRecord run_trajectory(const CircuitConfig& cfg) {
  cfg.check();
  Rng rng(cfg.seed);
  TrajectoryRecord rec{cfg.seed, 0, {}, {}, prepare_initial(cfg, rng)};
  for (std::size_t layer = 0; layer < cfg.schedule.T; ++layer) {
    auto events = run_layer(rec.state, layer, cfg, rng);
    if (cfg.references)
      insert_reference(rec.state, rec.registry, layer, events, rng);
    rec.measurement_count += events.size();
    rec.events.insert(rec.events.end(), events.begin(), events.end());
  }
  return rec;
}

// Line-delimited event log: "layer site axis outcome".
inline void write_event_log(std::ostream& os,
                            std::span<const MeasurementEvent> events) {
  for (const auto& e : events)
    os << e.layer << ' ' << e.site << ' ' << axis_letter(e.axis) << ' '
       << (e.outcome > 0 ? "+1" : "-1") << '\n';
}

inline std::vector<MeasurementEvent> read_event_log(std::istream& is) {
  std::vector<MeasurementEvent> events;
  std::uint32_t layer, site;
  char axis;
  std::string outcome;
  while (is >> layer >> site >> axis >> outcome) {
    MeasurementEvent e;
    e.layer = layer;
    e.site = site;
    e.axis = axis == 'X' ? PauliAxis::X
             : axis == 'Y' ? PauliAxis::Y
                           : PauliAxis::Z;
    e.outcome = outcome == "+1" ? 1 : -1;
    events.push_back(e);
  }
  return events;
}

}  // namespace entgeo
