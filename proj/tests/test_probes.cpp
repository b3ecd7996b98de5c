// Reference-qubit machinery: Bell insertion, ancilla selection, relocation,
// and the wedge scanner against direct rank computations.
#include <catch2/catch_amalgamated.hpp>

#include "entgeo/circuit.hpp"
#include "entgeo/probes.hpp"
#include "oracle_rank.hpp"

using namespace entgeo;

namespace {

CircuitConfig btz_reference_config(std::size_t L, std::uint64_t seed) {
  CircuitConfig cfg;
  cfg.L = L;
  cfg.schedule = build_schedule(MetricSpec::btz(0.5, 0.5), L, {});
  cfg.initial.kind = InitialStateKind::volume_law;
  cfg.seed = seed;
  cfg.references = true;
  return cfg;
}

}  // namespace

TEST_CASE("insert_reference builds a Bell pair at the chosen site") {
  StabilizerState s(6, 4);  // 4 system qubits + 2 ancilla slots
  Rng rng(3);
  // entangle the system a bit, then measure site 2
  s.apply_hadamard(0);
  s.apply_cnot(0, 1);
  s.apply_cnot(1, 2);
  const auto m = s.measure_pauli(2, PauliAxis::X, rng);
  ReferenceRegistry reg;
  const MeasurementEvent ev{0, 2, PauliAxis::X,
                            static_cast<std::int8_t>(m.outcome)};
  insert_reference(s, reg, 0, std::span(&ev, 1), rng);
  REQUIRE(reg.entries.size() == 1);
  REQUIRE(reg.entries[0].ancilla == 4);
  REQUIRE(s.entropy_rank(RegionSpec{0, 0, {4}}) == 1);  // S_R = 1
  // I(R : everything else) = 2 for a Bell partner
  const RegionSpec rest{0, 4, {5}};
  REQUIRE(mutual_information(s, RegionSpec{0, 0, {4}}, rest) == 2);
  s.validate();
}

TEST_CASE("no measurements, no reference") {
  StabilizerState s(5, 4);
  ReferenceRegistry reg;
  Rng rng(1);
  insert_reference(s, reg, 3, {}, rng);
  REQUIRE(reg.entries.empty());
}

TEST_CASE("reference site chosen uniformly among the layer's measurements") {
  Rng rng(8);
  std::vector<int> hits(4, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    StabilizerState s(6, 5);
    std::vector<MeasurementEvent> evs;
    for (std::uint32_t site = 0; site < 4; ++site) {
      const auto m = s.measure_pauli(site, PauliAxis::Z, rng);
      evs.push_back({0, site, PauliAxis::Z,
                     static_cast<std::int8_t>(m.outcome)});
    }
    ReferenceRegistry reg;
    insert_reference(s, reg, 0, evs, rng);
    ++hits[reg.entries[0].site];
  }
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (int h : hits) REQUIRE(std::fabs(h - n / 4.0) < 5 * sigma);
}

TEST_CASE("select_reference with a single entry is a no-op") {
  const auto rec = run_trajectory(btz_reference_config(8, 4));
  REQUIRE(!rec.registry.entries.empty());
  StabilizerState copy = rec.state;
  ReferenceRegistry one;
  one.entries.push_back(rec.registry.entries.front());
  Rng rng(9);
  const auto before = copy.canonical_form();
  select_reference(copy, one, one.entries.front().layer, rng);
  REQUIRE(copy.canonical_form() == before);
}

TEST_CASE("selection collapses every other ancilla to a product qubit") {
  const auto rec = run_trajectory(btz_reference_config(16, 11));
  REQUIRE(rec.registry.entries.size() >= 2);
  const std::size_t keep = rec.registry.entries[0].layer;
  StabilizerState copy = rec.state;
  Rng rng(13);
  select_reference(copy, rec.registry, keep, rng);
  for (const auto& e : rec.registry.entries) {
    if (e.layer == keep) continue;
    REQUIRE(copy.entropy_rank(RegionSpec{0, 0, {e.ancilla}}) == 0);
  }
  REQUIRE_THROWS_AS(select_reference(copy, rec.registry, 99999, rng),
                    std::invalid_argument);
}

TEST_CASE("multi-ancilla selection matches single-ancilla controls in distribution") {
  // mean I(R_t : A) from multi-reference runs vs runs that only ever insert
  // the one reference, within two combined standard errors
  const std::size_t L = 12;
  const std::size_t n = 500;
  const auto probe_layers = std::vector<std::size_t>{1, 3, 5};
  const RegionSpec A{2, 5, {}};
  for (std::size_t probe : probe_layers) {
    double multi_sum = 0, multi_sq = 0;
    std::size_t multi_n = 0;
    double ctrl_sum = 0, ctrl_sq = 0;
    std::size_t ctrl_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
      // multi-ancilla trajectory, then select layer `probe`
      const auto rec = run_trajectory(btz_reference_config(L, 100 + i));
      if (const auto* e = rec.registry.find_layer(probe)) {
        StabilizerState copy = rec.state;
        Rng arng(derive_stream_seed(100 + i, "sel", probe));
        select_reference(copy, rec.registry, probe, arng);
        const double v = static_cast<double>(
            mutual_information(copy, RegionSpec{0, 0, {e->ancilla}}, A));
        multi_sum += v;
        multi_sq += v * v;
        ++multi_n;
      }
      // control: replay the same trajectory seed but keep only layer `probe`
      CircuitConfig cfg = btz_reference_config(L, 2'000'000 + i);
      Rng rng(cfg.seed);
      StabilizerState s = prepare_initial(cfg, rng);
      ReferenceRegistry reg;
      for (std::size_t layer = 0; layer < cfg.schedule.T; ++layer) {
        auto events = run_layer(s, layer, cfg, rng);
        if (layer == probe)
          insert_reference(s, reg, layer, events, rng);
        else if (!events.empty())
          (void)uniform_index(rng, events.size());  // keep draw alignment
      }
      if (const auto* e = reg.find_layer(probe)) {
        const double v = static_cast<double>(
            mutual_information(s, RegionSpec{0, 0, {e->ancilla}}, A));
        ctrl_sum += v;
        ctrl_sq += v * v;
        ++ctrl_n;
      }
    }
    REQUIRE(multi_n > 100);
    REQUIRE(ctrl_n > 100);
    const double m1 = multi_sum / static_cast<double>(multi_n);
    const double m2 = ctrl_sum / static_cast<double>(ctrl_n);
    const double v1 = (multi_sq / multi_n - m1 * m1) / (multi_n - 1.0);
    const double v2 = (ctrl_sq / ctrl_n - m2 * m2) / (ctrl_n - 1.0);
    REQUIRE(std::fabs(m1 - m2) <= 2.0 * std::sqrt(v1 + v2) + 1e-12);
  }
}

TEST_CASE("relocation is a pure relabeling") {
  const auto rec = run_trajectory(btz_reference_config(12, 21));
  REQUIRE(!rec.registry.entries.empty());
  const auto& e = rec.registry.entries.front();
  StabilizerState copy = rec.state;
  Rng rng(5);
  select_reference(copy, rec.registry, e.layer, rng);

  // entropies of regions avoiding the shifted range are untouched
  const long before = copy.entropy_rank(RegionSpec::interval(0, 3));
  const long ref_before = copy.entropy_rank(RegionSpec{0, 0, {e.ancilla}});
  StabilizerState moved = copy;
  relocate_ancilla(moved, e.ancilla, 5);
  REQUIRE(moved.entropy_rank(RegionSpec::interval(0, 3)) == before);
  REQUIRE(moved.entropy_rank(RegionSpec::interval(5, 1)) == ref_before);

  // round trip restores the exact tableau
  moved.relocate_qubit(5, e.ancilla);
  REQUIRE(moved.canonical_form() == copy.canonical_form());

  // an interval through the insertion point equals the rank entropy of the
  // original noncontiguous interval-plus-ancilla region
  StabilizerState again = copy;
  relocate_ancilla(again, e.ancilla, 5);
  again.clip_gauge();
  for (std::size_t j = 2; j <= 5; ++j) {
    const std::size_t len = 5 - j + 2;  // [j, 5] inclusive
    const long via_clip = again.entropy_clipped_range(j, len);
    RegionSpec orig{j, len - 1, {e.ancilla}};
    REQUIRE(via_clip == copy.entropy_rank(orig));
  }
}

TEST_CASE("wedge scanner equals direct rank mutual information") {
  const std::size_t L = 12, a = 3, d = 2;
  const auto rec = run_trajectory(btz_reference_config(L, 31));
  REQUIRE(!rec.registry.entries.empty());
  WedgeScanner scanner(L, a, d);
  Rng rng(17);
  for (const auto& e : rec.registry.entries) {
    StabilizerState copy = rec.state;
    select_reference(copy, rec.registry, e.layer, rng);
    const auto row = scanner.scan_layer(copy, e.ancilla, e.site);
    for (std::size_t shift = 0; shift < L; ++shift) {
      const std::size_t a0 = (scanner.interval_a_start() + shift) % L;
      const std::size_t b0 = (scanner.interval_b_start() + shift) % L;
      RegionSpec R{0, 0, {e.ancilla}};
      std::vector<std::size_t> ab;
      for (std::size_t i = 0; i < a; ++i) {
        ab.push_back((a0 + i) % L);
        ab.push_back((b0 + i) % L);
      }
      std::sort(ab.begin(), ab.end());
      std::vector<std::size_t> abr = ab;
      abr.push_back(e.ancilla);
      const long direct = copy.entropy_of_sites({e.ancilla}) +
                          copy.entropy_of_sites(ab) -
                          copy.entropy_of_sites(abr);
      const std::size_t x = (e.site + L - shift) % L;
      REQUIRE(row[x] == direct);
      REQUIRE(direct >= 0);
      REQUIRE(direct <= 2);
    }
  }
}

TEST_CASE("reference mutual information grows with the region") {
  const std::size_t L = 12;
  const auto rec = run_trajectory(btz_reference_config(L, 41));
  Rng rng(19);
  for (const auto& e : rec.registry.entries) {
    StabilizerState copy = rec.state;
    select_reference(copy, rec.registry, e.layer, rng);
    const RegionSpec R{0, 0, {e.ancilla}};
    for (std::size_t len = 1; len + 4 < L; ++len) {
      const long small = mutual_information(copy, R, RegionSpec{2, len, {}});
      const long large =
          mutual_information(copy, R, RegionSpec{2, len + 3, {}});
      REQUIRE(large >= small);
    }
  }
}

TEST_CASE("a reference landing inside A at the final layer reads I = 2") {
  // single measured site on the last layer, never re-measured afterwards
  CircuitConfig cfg;
  cfg.L = 8;
  cfg.schedule = build_schedule(MetricSpec::uniform(0.0), 8, {}, 4);
  cfg.schedule.layer_rate.back() = 1.0;  // only the last layer measures
  cfg.seed = 77;
  cfg.references = true;
  const auto rec = run_trajectory(cfg);
  REQUIRE(rec.registry.entries.size() == 1);
  const auto& e = rec.registry.entries.front();
  REQUIRE(e.layer == 3);
  // A = the whole system: contains the Bell partner
  const long i2 = mutual_information(rec.state, RegionSpec{0, 0, {e.ancilla}},
                                     RegionSpec{0, 8, {}});
  REQUIRE(i2 == 2);
}
