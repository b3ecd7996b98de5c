#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace entgeo {

using word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

inline std::size_t words_for(std::size_t bits) {
  return (bits + kWordBits - 1) / kWordBits;
}

inline bool get_bit(std::span<const word> w, std::size_t i) {
  return (w[i / kWordBits] >> (i % kWordBits)) & 1u;
}

inline void set_bit(std::span<word> w, std::size_t i) {
  w[i / kWordBits] |= word{1} << (i % kWordBits);
}

inline void clear_bit(std::span<word> w, std::size_t i) {
  w[i / kWordBits] &= ~(word{1} << (i % kWordBits));
}

inline void assign_bit(std::span<word> w, std::size_t i, bool v) {
  const word m = word{1} << (i % kWordBits);
  if (v)
    w[i / kWordBits] |= m;
  else
    w[i / kWordBits] &= ~m;
}

inline void flip_bit(std::span<word> w, std::size_t i) {
  w[i / kWordBits] ^= word{1} << (i % kWordBits);
}

// Index of the lowest set bit, or npos when empty.
inline constexpr std::size_t knpos = static_cast<std::size_t>(-1);

inline std::size_t lowest_set(std::span<const word> w) {
  for (std::size_t k = 0; k < w.size(); ++k)
    if (w[k]) return k * kWordBits + std::countr_zero(w[k]);
  return knpos;
}

inline std::size_t highest_set(std::span<const word> w) {
  for (std::size_t k = w.size(); k-- > 0;)
    if (w[k]) return k * kWordBits + (kWordBits - 1 - std::countl_zero(w[k]));
  return knpos;
}

inline bool any_set(std::span<const word> w) {
  for (word v : w)
    if (v) return true;
  return false;
}

inline std::size_t popcount(std::span<const word> w) {
  std::size_t n = 0;
  for (word v : w) n += static_cast<std::size_t>(std::popcount(v));
  return n;
}

template <class F>
inline void for_each_set(std::span<const word> w, F&& f) {
  for (std::size_t k = 0; k < w.size(); ++k) {
    word v = w[k];
    while (v) {
      f(k * kWordBits + std::countr_zero(v));
      v &= v - 1;
    }
  }
}

// In-place transpose of a 64x64 bit block: rows in m[0..63], bit j of m[i]
// is element (i, j); afterwards bit j of m[i] is the old element (j, i).
inline void transpose64(word* m) {
  word mask = 0x00000000ffffffffull;
  for (unsigned s = 32; s; s >>= 1, mask ^= mask << s) {
    for (unsigned i = 0; i < 64; i = (i + s + 1) & ~s) {
      const word t = ((m[i] >> s) ^ m[i + s]) & mask;
      m[i] ^= t << s;
      m[i + s] ^= t;
    }
  }
}

// Timestamped GF(2) basis over fixed-width bit vectors. Supports rank queries
// over any suffix window of the inserted column sequence: after inserting
// columns with non-decreasing timestamps, rank of the set of columns with
// timestamp >= lo equals the number of basis entries with timestamp >= lo.
// On a pivot collision the newer vector stays in the basis and the older one
// keeps reducing, which preserves the window property. Slot storage lives in
// one arena indexed by pivot bit.
class RecencyBasis {
 public:
  explicit RecencyBasis(std::size_t bits)
      : words_(words_for(bits)),
        arena_(bits * words_, 0),
        ts_(bits, 0),
        occupied_(bits, 0),
        scratch_(words_, 0) {}

  void clear() { std::fill(occupied_.begin(), occupied_.end(), 0); }

  void insert(std::span<const word> v, std::int64_t ts) {
    std::copy(v.begin(), v.end(), scratch_.begin());
    std::int64_t cur_ts = ts;
    for (;;) {
      const std::size_t j = lowest_set(std::span<const word>(scratch_));
      if (j == knpos) return;
      word* slot = &arena_[j * words_];
      if (!occupied_[j]) {
        occupied_[j] = 1;
        ts_[j] = cur_ts;
        std::copy(scratch_.begin(), scratch_.end(), slot);
        return;
      }
      if (ts_[j] < cur_ts) {
        std::swap(ts_[j], cur_ts);
        for (std::size_t k = 0; k < words_; ++k)
          std::swap(scratch_[k], slot[k]);
        // scratch_ now holds the evicted (older) vector; same pivot j.
      }
      for (std::size_t k = 0; k < words_; ++k) scratch_[k] ^= slot[k];
    }
  }

  // Number of independent columns among those inserted with ts >= lo.
  std::size_t rank_since(std::int64_t lo) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < occupied_.size(); ++j)
      if (occupied_[j] && ts_[j] >= lo) ++n;
    return n;
  }

 private:
  std::size_t words_;
  std::vector<word> arena_;
  std::vector<std::int64_t> ts_;
  std::vector<std::uint8_t> occupied_;
  std::vector<word> scratch_;
};

}  // namespace entgeo
