// Conjugation-table checks: every tableau gate against the dense unitary
// oracle, on every Pauli input with both signs.
#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "entgeo/circuit.hpp"
#include "entgeo/tableau.hpp"
#include "oracle_dense.hpp"

using namespace entgeo;

namespace {

// Builds a state carrying p as one stabilizer generator, applies the gate,
// and reads the conjugated generator back. Gates act on rows independently,
// so the returned row is exactly U p U+.
PauliOperator tableau_conjugate(
    const PauliOperator& p, const std::function<void(StabilizerState&)>& g) {
  const std::size_t n = p.n;
  StabilizerState t(n);
  std::vector<std::size_t> support;
  for (std::size_t q = 0; q < n; ++q)
    if (p.code_at(q) != 0) support.push_back(q);
  REQUIRE(!support.empty());
  // CNOT chain turns one generator into prod_support Z_q ...
  for (std::size_t k = support.size(); k-- > 1;)
    t.apply_cnot(support[k - 1], support[k]);
  // ... then local rotations set the wanted Pauli letter on each site ...
  for (std::size_t q : support) {
    const std::uint8_t code = p.code_at(q);
    for (std::uint8_t id = 0; id < kNumClifford1q; ++id) {
      const auto img = conjugate_code(Clifford1q{id}, 2, false);
      if (img.first == code && !img.second) {
        t.apply_single(q, Clifford1q{id});
        break;
      }
    }
  }
  // ... and a local sign twist fixes the phase.
  if (p.phase_exp == 2) {
    const std::uint8_t code = p.code_at(support[0]);
    for (std::uint8_t id = 0; id < kNumClifford1q; ++id) {
      const auto img = conjugate_code(Clifford1q{id}, code, false);
      if (img.first == code && img.second) {
        t.apply_single(support[0], Clifford1q{id});
        break;
      }
    }
  }
  std::size_t row = n;
  for (std::size_t i = 0; i < n && row == n; ++i) {
    const PauliOperator gen = t.stabilizer(i);
    if (gen.x == p.x && gen.z == p.z) row = i;
  }
  REQUIRE(row < n);
  REQUIRE(t.stabilizer(row) == p);
  g(t);
  return t.stabilizer(row);
}

void check_gate(const dense::Mat& u, std::size_t n,
                const std::function<void(StabilizerState&)>& apply) {
  const dense::Mat ud = dense::dagger(u);
  const std::size_t npaulis = std::size_t{1} << (2 * n);
  for (std::size_t mask = 1; mask < npaulis; ++mask) {
    for (int sign = 0; sign < 2; ++sign) {
      PauliOperator p = PauliOperator::identity(n);
      for (std::size_t q = 0; q < n; ++q)
        p.set_code(q, static_cast<std::uint8_t>((mask >> (2 * q)) & 3));
      p.phase_exp = sign ? 2 : 0;
      const dense::Mat img =
          dense::mul(dense::mul(u, dense::pauli_matrix(p)), ud);
      const auto want = dense::decompose_pauli(img, n);
      REQUIRE(want.ok);
      const PauliOperator got = tableau_conjugate(p, apply);
      REQUIRE(got == want.pauli);
    }
  }
}

}  // namespace

TEST_CASE("all 24 single-qubit cliffords match dense conjugation on the tableau") {
  const auto group = dense::clifford1q_group();
  REQUIRE(group.size() == kNumClifford1q);
  for (const auto& u : group) {
    const dense::Mat ud = dense::dagger(u);
    const auto dx = dense::decompose_pauli(
        dense::mul(dense::mul(u, dense::pauli1(1)), ud), 1);
    const auto dz = dense::decompose_pauli(
        dense::mul(dense::mul(u, dense::pauli1(2)), ud), 1);
    Clifford1q id{};
    bool found = false;
    for (std::uint8_t c = 0; c < kNumClifford1q && !found; ++c) {
      const C1Images& im = clifford1q_images(Clifford1q{c});
      if (im.xi == dx.pauli.code_at(0) && im.xs == (dx.pauli.phase_exp == 2) &&
          im.zi == dz.pauli.code_at(0) && im.zs == (dz.pauli.phase_exp == 2)) {
        id = Clifford1q{c};
        found = true;
      }
    }
    REQUIRE(found);
    check_gate(u, 1, [&](StabilizerState& s) { s.apply_single(0, id); });
  }
}

TEST_CASE("iSWAP conjugation table matches the dense 4x4 oracle") {
  check_gate(dense::gate_iswap(), 2,
             [](StabilizerState& s) { s.apply_iswap(0, 1); });
}

TEST_CASE("SWAP, CZ, CNOT conjugation tables match the dense oracle") {
  check_gate(dense::gate_swap(), 2,
             [](StabilizerState& s) { s.apply_swap(0, 1); });
  check_gate(dense::gate_cz(), 2,
             [](StabilizerState& s) { s.apply_cz(0, 1); });
  check_gate(dense::gate_cnot(), 2,
             [](StabilizerState& s) { s.apply_cnot(0, 1); });
}

TEST_CASE("iSWAP inverse really inverts") {
  Rng rng(9);
  StabilizerState s(6);
  for (int step = 0; step < 40; ++step) {
    const std::size_t a = uniform_index(rng, 6);
    const std::size_t b = (a + 1 + uniform_index(rng, 5)) % 6;
    apply_gate(s, sample_gate(rng, 0.3), a, b);
  }
  StabilizerState t = s;
  t.apply_iswap(1, 4);
  t.apply_iswap_inverse(1, 4);
  REQUIRE(t.canonical_form() == s.canonical_form());
}

TEST_CASE("hadamard maps +Z0 to +X0") {
  StabilizerState s(1);
  s.apply_hadamard(0);
  REQUIRE(s.stabilizer(0).to_string() == "+X");
}

TEST_CASE("SWAP on a Bell pair relabels without changing entropies") {
  StabilizerState s(3);
  s.apply_hadamard(0);
  s.apply_cnot(0, 1);
  const long before01 = s.entropy_rank(RegionSpec::interval(0, 1));
  s.apply_swap(0, 1);
  REQUIRE(s.entropy_rank(RegionSpec::interval(0, 1)) == before01);
  REQUIRE(s.entropy_rank(RegionSpec::interval(2, 1)) == 0);
  s.apply_swap(1, 2);
  REQUIRE(s.entropy_rank(RegionSpec::interval(1, 1)) == 0);
  REQUIRE(s.entropy_rank(RegionSpec::interval(2, 1)) == 1);
}

TEST_CASE("apply_clifford validates targets") {
  StabilizerState s(4);
  const std::size_t one[1] = {5};
  REQUIRE_THROWS_AS(
      s.apply_clifford(CliffordSpec::single(kC1H), std::span(one, 1)),
      std::invalid_argument);
  const std::size_t dup[2] = {1, 1};
  REQUIRE_THROWS_AS(s.apply_clifford(CliffordSpec::swap(), std::span(dup, 2)),
                    std::invalid_argument);
  const std::size_t ok[2] = {0, 2};
  s.apply_clifford(CliffordSpec::iswap(), std::span(ok, 2));
  s.validate();
}

TEST_CASE("sampled brickwork gates round-trip through their inverses") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    StabilizerState s(8);
    Rng crng(100 + trial);
    std::vector<TwoQubitGate> gates;
    std::vector<std::pair<std::size_t, std::size_t>> targets;
    for (int step = 0; step < 12; ++step) {
      const std::size_t a = uniform_index(crng, 8);
      const std::size_t b = (a + 1 + uniform_index(crng, 7)) % 8;
      const TwoQubitGate g = sample_gate(rng, 0.15);
      gates.push_back(g);
      targets.emplace_back(a, b);
      apply_gate(s, g, a, b);
    }
    const auto mid = s.canonical_form();
    for (std::size_t i = gates.size(); i-- > 0;)
      apply_gate_inverse(s, gates[i], targets[i].first, targets[i].second);
    REQUIRE(s.canonical_form() == StabilizerState(8).canonical_form());
    StabilizerState r(8);
    for (std::size_t i = 0; i < gates.size(); ++i)
      apply_gate(r, gates[i], targets[i].first, targets[i].second);
    REQUIRE(r.canonical_form() == mid);
  }
}
