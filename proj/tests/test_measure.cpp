// Measurement checks: co-simulation against the dense density-matrix oracle,
// Born statistics, determinism flags, and the textbook examples.
#include <catch2/catch_amalgamated.hpp>

#include "entgeo/circuit.hpp"
#include "entgeo/tableau.hpp"
#include "oracle_dense.hpp"

using namespace entgeo;

namespace {

dense::Mat stabilizer_density(const StabilizerState& s) {
  const std::size_t dim = std::size_t{1} << s.width();
  dense::Mat rho = dense::Mat::eye(dim);
  for (auto& v : rho.a) v /= static_cast<double>(dim);
  for (std::size_t i = 0; i < s.width(); ++i) {
    const dense::Mat g = dense::pauli_matrix(s.stabilizer(i));
    dense::Mat proj(dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c)
        proj(r, c) = 0.5 * ((r == c ? 1.0 : 0.0) + g(r, c));
    rho = dense::mul(dense::mul(proj, rho), proj);
    const double t = dense::trace(rho).real();
    for (auto& v : rho.a) v /= t;
  }
  return rho;
}

}  // namespace

TEST_CASE("random circuits with measurements track the dense oracle exactly") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const std::size_t n = 3 + (seed % 2);
    Rng rng(seed);
    StabilizerState s(n);
    dense::DenseState d(n);
    const auto group = dense::clifford1q_group();
    for (int step = 0; step < 60; ++step) {
      const std::size_t what = uniform_index(rng, 5);
      if (what == 0) {  // random single-qubit clifford
        const std::size_t q = uniform_index(rng, n);
        const std::size_t g = uniform_index(rng, group.size());
        // map dense element onto the table id through its images
        const dense::Mat& u = group[g];
        const dense::Mat ud = dense::dagger(u);
        const auto dx = dense::decompose_pauli(
            dense::mul(dense::mul(u, dense::pauli1(1)), ud), 1);
        const auto dz = dense::decompose_pauli(
            dense::mul(dense::mul(u, dense::pauli1(2)), ud), 1);
        for (std::uint8_t c = 0; c < kNumClifford1q; ++c) {
          const C1Images& im = clifford1q_images(Clifford1q{c});
          if (im.xi == dx.pauli.code_at(0) &&
              im.xs == (dx.pauli.phase_exp == 2) &&
              im.zi == dz.pauli.code_at(0) &&
              im.zs == (dz.pauli.phase_exp == 2)) {
            s.apply_single(q, Clifford1q{c});
            break;
          }
        }
        d.apply(u, {q});
      } else if (what == 1) {  // two-qubit core
        const std::size_t a = uniform_index(rng, n);
        const std::size_t b = (a + 1 + uniform_index(rng, n - 1)) % n;
        const std::size_t lo = std::min(a, b), hi = std::max(a, b);
        switch (uniform_index(rng, 4)) {
          case 0:
            s.apply_swap(lo, hi);
            d.apply(dense::gate_swap(), {lo, hi});
            break;
          case 1:
            s.apply_iswap(lo, hi);
            d.apply(dense::gate_iswap(), {lo, hi});
            break;
          case 2:
            s.apply_cz(lo, hi);
            d.apply(dense::gate_cz(), {lo, hi});
            break;
          default:
            s.apply_cnot(lo, hi);
            d.apply(dense::gate_cnot(), {lo, hi});
            break;
        }
      } else {  // measurement
        const std::size_t q = uniform_index(rng, n);
        static constexpr PauliAxis kAxes[3] = {PauliAxis::X, PauliAxis::Y,
                                               PauliAxis::Z};
        const PauliAxis axis = kAxes[uniform_index(rng, 3)];
        const MeasurementResult r = s.measure_pauli(q, axis, rng);
        const double prob = d.project(q, axis_code(axis), r.outcome);
        if (r.deterministic)
          REQUIRE(prob == Catch::Approx(1.0).margin(1e-9));
        else
          REQUIRE(prob == Catch::Approx(0.5).margin(1e-9));
      }
      s.validate();
      const dense::Mat want = d.rho;
      const dense::Mat got = stabilizer_density(s);
      REQUIRE(dense::frobenius_distance(want, got) < 1e-8);
    }
  }
}

TEST_CASE("entropies match the dense oracle on measured circuits") {
  Rng rng(77);
  const std::size_t n = 4;
  StabilizerState s(n);
  dense::DenseState d(n);
  dense::Mat h(2);
  const double rt = 1.0 / std::sqrt(2.0);
  h(0, 0) = rt; h(0, 1) = rt; h(1, 0) = rt; h(1, 1) = -rt;
  for (int step = 0; step < 40; ++step) {
    const std::size_t a = uniform_index(rng, n);
    const std::size_t b = (a + 1 + uniform_index(rng, n - 1)) % n;
    s.apply_iswap(std::min(a, b), std::max(a, b));
    d.apply(dense::gate_iswap(), {std::min(a, b), std::max(a, b)});
    s.apply_hadamard(a);
    d.apply(h, {a});
    if (step % 3 == 0) {
      const MeasurementResult m = s.measure_pauli(b, PauliAxis::Y, rng);
      d.project(b, axis_code(PauliAxis::Y), m.outcome);
    }
    for (std::size_t mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<std::size_t> keep;
      for (std::size_t q = 0; q < n; ++q)
        if (mask & (1u << q)) keep.push_back(q);
      REQUIRE(static_cast<double>(s.entropy_of_sites(keep)) ==
              Catch::Approx(d.entropy_bits(keep)).margin(1e-7));
    }
  }
}

TEST_CASE("Z on |0> is deterministic +1") {
  Rng rng(1);
  StabilizerState s(4);
  for (std::size_t q = 0; q < 4; ++q) {
    const auto r = s.measure_pauli(q, PauliAxis::Z, rng);
    REQUIRE(r.deterministic);
    REQUIRE(r.outcome == 1);
  }
}

TEST_CASE("X on |0> is a fair coin and repeats deterministically") {
  Rng rng(123);
  const int n = 10000;
  int plus = 0;
  for (int i = 0; i < n; ++i) {
    StabilizerState s(1);
    const auto r = s.measure_pauli(0, PauliAxis::X, rng);
    REQUIRE_FALSE(r.deterministic);
    plus += r.outcome > 0;
    const auto again = s.measure_pauli(0, PauliAxis::X, rng);
    REQUIRE(again.deterministic);
    REQUIRE(again.outcome == r.outcome);
  }
  // binomial 5 sigma band around n/2
  const double sigma = 0.5 * std::sqrt(static_cast<double>(n));
  REQUIRE(std::fabs(plus - n / 2.0) < 5.0 * sigma);
}

TEST_CASE("post-measurement state stabilizes outcome times the axis") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    StabilizerState s(5);
    for (int k = 0; k < 10; ++k) {
      const std::size_t a = uniform_index(rng, 5);
      const std::size_t b = (a + 1 + uniform_index(rng, 4)) % 5;
      apply_gate(s, sample_gate(rng, 0.1), a, b);
    }
    const auto r = s.measure_pauli(2, PauliAxis::Y, rng);
    const auto again = s.measure_pauli(2, PauliAxis::Y, rng);
    REQUIRE(again.deterministic);
    REQUIRE(again.outcome == r.outcome);
    s.validate();
  }
}

TEST_CASE("deterministic branch leaves the tableau untouched") {
  Rng rng(2);
  StabilizerState s(3);
  s.apply_hadamard(0);
  s.apply_cnot(0, 1);
  const auto before = s.canonical_form();
  const auto r = s.measure_pauli(2, PauliAxis::Z, rng);
  REQUIRE(r.deterministic);
  REQUIRE(s.canonical_form() == before);
  REQUIRE(s.gauge() == Gauge::raw);
}
