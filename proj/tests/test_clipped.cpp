// Clipped-gauge canonicalization: endpoint condition, group preservation,
// interval entropies against the rank route, and the sliding-window machinery.
#include <catch2/catch_amalgamated.hpp>

#include "entgeo/bitvec.hpp"
#include "entgeo/circuit.hpp"
#include "entgeo/experiments.hpp"
#include "entgeo/tableau.hpp"
#include "oracle_rank.hpp"

using namespace entgeo;

namespace {

StabilizerState random_monitored_state(std::size_t L, std::size_t layers,
                                       double rate, std::uint64_t seed) {
  Rng rng(seed);
  StabilizerState s(L);
  static constexpr PauliAxis kAxes[3] = {PauliAxis::X, PauliAxis::Y,
                                         PauliAxis::Z};
  for (std::size_t layer = 0; layer < layers; ++layer) {
    for (std::size_t i = 0; i < L / 2; ++i) {
      const std::size_t a = (layer % 2 == 0) ? 2 * i : (2 * i + 1) % L;
      const std::size_t b = (layer % 2 == 0) ? 2 * i + 1 : (2 * i + 2) % L;
      apply_gate(s, sample_gate(rng, 0.1), a, b);
    }
    for (std::size_t x = 0; x < L; ++x)
      if (uniform01(rng) < rate)
        s.measure_pauli(x, kAxes[uniform_index(rng, 3)], rng);
  }
  return s;
}

}  // namespace

TEST_CASE("product state clips to single-site generators") {
  StabilizerState s(6);
  s.clip_gauge();
  REQUIRE(s.gauge() == Gauge::clipped);
  for (std::size_t i = 0; i < 6; ++i)
    REQUIRE(s.clipped_left(i) == s.clipped_right(i));
  for (std::size_t a = 0; a < 6; ++a)
    REQUIRE(s.entropy_clipped(RegionSpec{a, 3, {}}) == 0);
}

TEST_CASE("Bell pair clips to two crossing generators") {
  StabilizerState s(3);
  s.apply_hadamard(0);
  s.apply_cnot(0, 1);
  s.clip_gauge();
  int crossing = 0;
  for (std::size_t i = 0; i < 3; ++i)
    crossing += s.clipped_left(i) == 0 && s.clipped_right(i) == 1;
  REQUIRE(crossing == 2);
  REQUIRE(s.entropy_clipped(RegionSpec::interval(0, 1)) == 1);
}

TEST_CASE("endpoint condition holds on 1000 random 16-qubit states") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    StabilizerState s = random_monitored_state(16, 24, 0.2, seed);
    s.clip_gauge();
    std::vector<int> endpoints(16, 0);
    for (std::size_t i = 0; i < 16; ++i) {
      ++endpoints[s.clipped_left(i)];
      ++endpoints[s.clipped_right(i)];
    }
    for (int e : endpoints) REQUIRE(e == 2);
  }
}

TEST_CASE("clipping preserves the stabilizer group with phases") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    StabilizerState s = random_monitored_state(12, 24, 0.15, 40 + seed);
    const auto before = s.canonical_form();
    s.clip_gauge();
    REQUIRE(s.canonical_form() == before);
    // each clipped generator commutes with everything and is hermitian
    for (std::size_t i = 0; i < 12; ++i) {
      const PauliOperator g = s.clipped_generator(i);
      REQUIRE(g.is_hermitian());
      for (std::size_t j = 0; j < 12; ++j)
        REQUIRE_FALSE(g.anticommutes_with(s.clipped_generator(j)));
    }
    s.validate();
  }
}

TEST_CASE("clipped interval entropies equal the rank route exactly") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t L = 24;
    StabilizerState s = random_monitored_state(L, 2 * L, 0.2, 900 + seed);
    s.clip_gauge();
    for (std::size_t a = 0; a < L; ++a)
      for (std::size_t len = 1; len < L; ++len)
        REQUIRE(s.entropy_clipped(RegionSpec{a, len, {}}) ==
                s.entropy_rank(RegionSpec{a, len, {}}));
  }
}

TEST_CASE("clipped queries demand the clipped gauge") {
  StabilizerState s(4);
  REQUIRE_THROWS_AS(s.entropy_clipped(RegionSpec::interval(0, 2)),
                    std::logic_error);
  s.clip_gauge();
  s.entropy_clipped(RegionSpec::interval(0, 2));
  Rng rng(1);
  s.measure_pauli(0, PauliAxis::X, rng);  // mutation drops the gauge
  REQUIRE(s.gauge() == Gauge::raw);
  REQUIRE_THROWS_AS(s.entropy_clipped(RegionSpec::interval(0, 2)),
                    std::logic_error);
}

TEST_CASE("crossing counts reproduce per-start clipped entropies") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t L = 20;
    StabilizerState s = random_monitored_state(L, 30, 0.2, 1234 + seed);
    s.clip_gauge();
    for (std::size_t k = 1; k <= L / 2; ++k) {
      const auto counts = interval_crossing_counts(s, k);
      for (std::size_t a = 0; a < L; ++a)
        REQUIRE(counts[a] == 2 * s.entropy_clipped_range(a, k));
    }
  }
}

TEST_CASE("recency basis matches the direct rank on every window") {
  Rng rng(3);
  const std::size_t L = 14;
  StabilizerState s = random_monitored_state(L, 20, 0.25, 77);
  const std::size_t a = 3, d = 2;
  RecencyBasis basis(L);
  const std::size_t positions = 2 * (L - 1) + 2 * a;
  for (std::size_t p = 0; p < positions; ++p) {
    const std::size_t m = p >> 1;
    const std::size_t site = (m + ((p & 1) ? a + d : 0)) % L;
    basis.insert(s.stab_x_plane(site), static_cast<std::int64_t>(p));
    basis.insert(s.stab_z_plane(site), static_cast<std::int64_t>(p));
    if (p + 1 >= 2 * a && ((p + 1 - 2 * a) & 1) == 0) {
      const std::size_t shift = (p + 1 - 2 * a) / 2;
      std::vector<std::size_t> sites;
      for (std::size_t i = 0; i < a; ++i) {
        sites.push_back((shift + i) % L);
        sites.push_back((shift + a + d + i) % L);
      }
      std::sort(sites.begin(), sites.end());
      const long s_ab = static_cast<long>(basis.rank_since(
                            static_cast<std::int64_t>(2 * shift))) -
                        static_cast<long>(2 * a);
      REQUIRE(s_ab == oracle::entropy_bits(s, sites));
    }
  }
  (void)rng;
}

TEST_CASE("wrapped intervals answer through the complement") {
  StabilizerState s = random_monitored_state(10, 20, 0.2, 5);
  s.clip_gauge();
  for (std::size_t a = 6; a < 10; ++a)
    REQUIRE(s.entropy_clipped(RegionSpec{a, 7, {}}) ==
            s.entropy_rank(RegionSpec{a, 7, {}}));
}
