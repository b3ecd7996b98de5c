// Test-only GF(2) rank oracle: plain byte-per-bit Gaussian elimination,
// written independently of the word-packed implementation it checks.
#pragma once

#include <cstdint>
#include <vector>

#include "entgeo/tableau.hpp"

namespace oracle {

inline std::size_t gf2_rank(std::vector<std::vector<std::uint8_t>> m) {
  if (m.empty()) return 0;
  const std::size_t cols = m[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.size() && m[pivot][c] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][c] == 0) continue;
      for (std::size_t k = 0; k < cols; ++k) m[r][k] ^= m[rank][k];
    }
    ++rank;
  }
  return rank;
}

// Entropy of a site subset via the rank of the restricted generator matrix.
inline long entropy_bits(const entgeo::StabilizerState& s,
                         const std::vector<std::size_t>& sites) {
  const std::size_t w = s.width();
  std::vector<std::vector<std::uint8_t>> m(
      w, std::vector<std::uint8_t>(2 * sites.size(), 0));
  for (std::size_t i = 0; i < w; ++i) {
    const entgeo::PauliOperator g = s.stabilizer(i);
    for (std::size_t k = 0; k < sites.size(); ++k) {
      const std::uint8_t code = g.code_at(sites[k]);
      m[i][2 * k] = code & 1;
      m[i][2 * k + 1] = (code >> 1) & 1;
    }
  }
  return static_cast<long>(gf2_rank(std::move(m))) -
         static_cast<long>(sites.size());
}

}  // namespace oracle
