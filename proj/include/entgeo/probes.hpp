#pragma once

#include <cassert>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "entgeo/bitvec.hpp"
#include "entgeo/circuit.hpp"
#include "entgeo/rng.hpp"
#include "entgeo/tableau.hpp"

namespace entgeo {

// Measures every reference ancilla except the kept layer's in a uniformly
// random Pauli basis: the surviving state on system + R_t is distributed as
// if R_t had been the only reference inserted.
inline void select_reference(StabilizerState& s, const ReferenceRegistry& reg,
                             std::size_t keep_layer, Rng& rng) {
  if (reg.find_layer(keep_layer) == nullptr)
    throw std::invalid_argument("no reference registered for that layer");
  static constexpr PauliAxis kAxes[3] = {PauliAxis::X, PauliAxis::Y,
                                         PauliAxis::Z};
  for (const auto& e : reg.entries) {
    if (e.layer == keep_layer) continue;
    const PauliAxis axis = kAxes[uniform_index(rng, 3)];
    s.measure_pauli(e.ancilla, axis, rng);
  }
}

// Moves the ancilla into the linear ordering at `insertion_site`, shifting
// the qubits in between one step. Pure relabeling: contiguous intervals
// through `insertion_site` then stand for interval-plus-ancilla regions of
// the original ordering.
inline void relocate_ancilla(StabilizerState& s, std::size_t ancilla,
                             std::size_t insertion_site) {
  if (ancilla < s.system_size() || ancilla >= s.width())
    throw std::invalid_argument("not an ancilla position");
  if (insertion_site > s.system_size())
    throw std::invalid_argument("insertion site out of range");
  s.relocate_qubit(ancilla, insertion_site);
}

// Per-realization wedge samples: I(R_t : A u B) for every insertion layer t
// and every relative reference position x, with A, B two fixed-size intervals
// separated by `separation` and centered on the chain.
//
// The (x, t) sweep reuses one multi-ancilla trajectory: translating the
// intervals covers all relative x, and selecting one ancilla per layer covers
// all t. Joint ranks over the sliding two-interval window come from a
// timestamped GF(2) basis, so a full map costs O(L^4) when T ~ L.
class WedgeScanner {
 public:
  WedgeScanner(std::size_t L, std::size_t a_size, std::size_t separation)
      : L_(L), a_(a_size), d_(separation) {
    if (a_size == 0 || 2 * a_size + separation > L)
      throw std::invalid_argument("intervals do not fit on the chain");
    // Center the A C B block so wedge lobes sit away from the x seam.
    a_start_ = (L - (2 * a_size + separation)) / 2;
    b_start_ = a_start_ + a_size + separation;
  }

  std::size_t interval_a_start() const { return a_start_; }
  std::size_t interval_b_start() const { return b_start_; }

  // I(R : A u B) with intervals shifted by s, reference ancilla `anc`;
  // out[x] receives the sample for relative coordinate x = ref_site - shift.
  std::vector<int> scan_layer(const StabilizerState& s, std::size_t anc,
                              std::size_t ref_site) const {
    const std::size_t W = s.width();
    const long s_r =
        s.entropy_of_sites(std::vector<std::size_t>{anc});
    RecencyBasis ab(W), rab(W);
    rab.insert(s.stab_x_plane(anc), INT64_MAX);
    rab.insert(s.stab_z_plane(anc), INT64_MAX);
    std::vector<int> out(L_, -1);
    const std::size_t positions = 2 * (L_ - 1) + 2 * a_;
    for (std::size_t p = 0; p < positions; ++p) {
      const std::size_t m = p >> 1;
      const std::size_t site =
          (a_start_ + m + ((p & 1) ? a_ + d_ : 0)) % L_;
      ab.insert(s.stab_x_plane(site), static_cast<std::int64_t>(p));
      ab.insert(s.stab_z_plane(site), static_cast<std::int64_t>(p));
      rab.insert(s.stab_x_plane(site), static_cast<std::int64_t>(p));
      rab.insert(s.stab_z_plane(site), static_cast<std::int64_t>(p));
      if (p + 1 >= 2 * a_ && ((p + 1 - 2 * a_) & 1) == 0) {
        const std::size_t shift = (p + 1 - 2 * a_) / 2;
        const auto lo = static_cast<std::int64_t>(2 * shift);
        const long s_ab =
            static_cast<long>(ab.rank_since(lo)) - static_cast<long>(2 * a_);
        const long s_rab = static_cast<long>(rab.rank_since(lo)) -
                           static_cast<long>(2 * a_ + 1);
        const long mi = s_r + s_ab - s_rab;
        assert(mi >= 0 && mi <= 2);
        const std::size_t x = (ref_site + L_ - shift % L_) % L_;
        out[x] = static_cast<int>(mi);
      }
    }
    return out;
  }

 private:
  std::size_t L_, a_, d_, a_start_ = 0, b_start_ = 0;
};

// All wedge samples of one trajectory: row t of the result holds I(R_t : AB)
// by relative x, or an empty row when layer t inserted no reference.
// All wedge samples of one trajectory, for several interval separations at
// once: result[k][t][x] = I(R_t : AB) at relative coordinate x for
// separations[k], or an empty row where layer t inserted no reference.
// One ancilla selection per layer is shared across the separations.
inline std::vector<std::vector<std::vector<int>>> wedge_realization(
    const TrajectoryRecord& rec, std::size_t depth, std::size_t a_size,
    std::span<const std::size_t> separations, Rng& analysis_rng) {
  const std::size_t L = rec.state.system_size();
  std::vector<WedgeScanner> scanners;
  scanners.reserve(separations.size());
  for (std::size_t d : separations) scanners.emplace_back(L, a_size, d);
  std::vector<std::vector<std::vector<int>>> out(
      separations.size(), std::vector<std::vector<int>>(depth));
  for (const auto& e : rec.registry.entries) {
    StabilizerState copy = rec.state;
    select_reference(copy, rec.registry, e.layer, analysis_rng);
    for (std::size_t k = 0; k < scanners.size(); ++k)
      out[k][e.layer] = scanners[k].scan_layer(copy, e.ancilla, e.site);
  }
  return out;
}

}  // namespace entgeo
