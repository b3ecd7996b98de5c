#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "entgeo/bitvec.hpp"

namespace entgeo {

// Single-qubit Paulis are encoded by (x, z) bit pairs packed into a 2-bit
// code x + 2z: 0 = I, 1 = X, 2 = Z, 3 = Y.
enum class PauliAxis : std::uint8_t { X = 0, Y = 1, Z = 2 };

inline constexpr std::uint8_t axis_code(PauliAxis a) {
  switch (a) {
    case PauliAxis::X: return 1;
    case PauliAxis::Y: return 3;
    case PauliAxis::Z: return 2;
  }
  return 0;
}

inline constexpr char axis_letter(PauliAxis a) {
  switch (a) {
    case PauliAxis::X: return 'X';
    case PauliAxis::Y: return 'Y';
    case PauliAxis::Z: return 'Z';
  }
  return '?';
}

// Exponent of i in sigma_a * sigma_b: +1 for the cyclic pairs XY, YZ, ZX,
// -1 (= 3 mod 4) for the reversed pairs, 0 otherwise.
inline constexpr int pauli_mul_phase(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0 || a == b) return 0;
  // cyclic order X(1) -> Y(3) -> Z(2) -> X(1)
  if ((a == 1 && b == 3) || (a == 3 && b == 2) || (a == 2 && b == 1)) return 1;
  return 3;
}

// Sum over sites of pauli_mul_phase for the product A*B (A on the left),
// word-parallel. Returns the total exponent of i, not reduced mod 4.
inline long long product_phase_exponent(std::span<const word> ax,
                                        std::span<const word> az,
                                        std::span<const word> bx,
                                        std::span<const word> bz) {
  long long plus = 0, minus = 0;
  for (std::size_t k = 0; k < ax.size(); ++k) {
    const word xa = ax[k], za = az[k], xb = bx[k], zb = bz[k];
    const word aX = xa & ~za, aZ = ~xa & za, aY = xa & za;
    const word bX = xb & ~zb, bZ = ~xb & zb, bY = xb & zb;
    const word p = (aX & bY) | (aY & bZ) | (aZ & bX);
    const word m = (aX & bZ) | (aY & bX) | (aZ & bY);
    plus += std::popcount(p);
    minus += std::popcount(m);
  }
  return plus - minus;
}

inline bool symplectic_anticommute(std::span<const word> ax,
                                   std::span<const word> az,
                                   std::span<const word> bx,
                                   std::span<const word> bz) {
  std::size_t acc = 0;
  for (std::size_t k = 0; k < ax.size(); ++k)
    acc += std::popcount((ax[k] & bz[k]) ^ (az[k] & bx[k]));
  return acc & 1u;
}

// A Pauli operator on n qubits: i^phase_exp * tensor of sigma(x_j, z_j).
// Hermitian operators carry phase_exp in {0, 2} (signs +1 / -1).
struct PauliOperator {
  std::size_t n = 0;
  std::vector<word> x, z;
  std::uint8_t phase_exp = 0;  // power of i, mod 4

  static PauliOperator identity(std::size_t n) {
    PauliOperator p;
    p.n = n;
    p.x.assign(words_for(n), 0);
    p.z.assign(words_for(n), 0);
    return p;
  }

  static PauliOperator single(std::size_t n, std::size_t site, PauliAxis a,
                              bool negative = false) {
    PauliOperator p = identity(n);
    const std::uint8_t c = axis_code(a);
    if (c & 1) set_bit(std::span<word>(p.x), site);
    if (c & 2) set_bit(std::span<word>(p.z), site);
    p.phase_exp = negative ? 2 : 0;
    return p;
  }

  std::uint8_t code_at(std::size_t site) const {
    return static_cast<std::uint8_t>(
        (get_bit(std::span<const word>(x), site) ? 1 : 0) |
        (get_bit(std::span<const word>(z), site) ? 2 : 0));
  }

  void set_code(std::size_t site, std::uint8_t c) {
    assign_bit(std::span<word>(x), site, c & 1);
    assign_bit(std::span<word>(z), site, (c >> 1) & 1);
  }

  bool is_hermitian() const { return (phase_exp & 1u) == 0; }
  bool is_identity_bits() const {
    return !any_set(std::span<const word>(x)) &&
           !any_set(std::span<const word>(z));
  }

  int sign() const {
    assert(is_hermitian());
    return phase_exp == 0 ? +1 : -1;
  }

  bool anticommutes_with(const PauliOperator& o) const {
    return symplectic_anticommute(x, z, o.x, o.z);
  }

  // this <- this * rhs, exact phase.
  void multiply_right(const PauliOperator& rhs) {
    const long long f = product_phase_exponent(x, z, rhs.x, rhs.z);
    phase_exp = static_cast<std::uint8_t>(
        ((phase_exp + rhs.phase_exp + f) % 4 + 4) % 4);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] ^= rhs.x[k];
      z[k] ^= rhs.z[k];
    }
  }

  bool operator==(const PauliOperator& o) const {
    return n == o.n && x == o.x && z == o.z && phase_exp == o.phase_exp;
  }

  std::string to_string() const {
    static const char* kPhase[4] = {"+", "+i", "-", "-i"};
    std::string s = kPhase[phase_exp];
    for (std::size_t q = 0; q < n; ++q) s += "IXZY"[code_at(q)];
    return s;
  }

  static PauliOperator from_string(const std::string& s) {
    std::size_t i = 0;
    std::uint8_t e = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      e = (s[i] == '-') ? 2 : 0;
      ++i;
    }
    if (i < s.size() && s[i] == 'i') {
      e = static_cast<std::uint8_t>((e + 1) % 4);
      ++i;
    }
    PauliOperator p = identity(s.size() - i);
    p.phase_exp = e;
    for (std::size_t q = 0; i < s.size(); ++i, ++q) {
      switch (s[i]) {
        case 'I': break;
        case 'X': p.set_code(q, 1); break;
        case 'Z': p.set_code(q, 2); break;
        case 'Y': p.set_code(q, 3); break;
        default: throw std::invalid_argument("bad Pauli letter");
      }
    }
    return p;
  }
};

// ---------------------------------------------------------------------------
// The 24 single-qubit Cliffords, identified by the signed images of X and Z
// under conjugation. Six symplectic actions times four sign choices.

struct Clifford1q {
  std::uint8_t id = 0;  // 0 is the identity
  bool operator==(const Clifford1q&) const = default;
};

inline constexpr std::size_t kNumClifford1q = 24;

struct C1Images {
  std::uint8_t xi, zi, yi;  // image codes of X, Z, Y
  bool xs, zs, ys;          // sign flips of the images
};

namespace detail {

inline std::array<C1Images, kNumClifford1q> build_c1_images() {
  std::array<C1Images, kNumClifford1q> t{};
  // Symplectic pairs in fixed order so that id 0 = identity, 8 = H, 20 = S.
  constexpr std::uint8_t pairs[6][2] = {{1, 2}, {1, 3}, {2, 1},
                                        {2, 3}, {3, 1}, {3, 2}};
  for (int p = 0; p < 6; ++p) {
    for (int xs = 0; xs < 2; ++xs) {
      for (int zs = 0; zs < 2; ++zs) {
        C1Images im{};
        im.xi = pairs[p][0];
        im.zi = pairs[p][1];
        im.xs = xs != 0;
        im.zs = zs != 0;
        im.yi = static_cast<std::uint8_t>(im.xi ^ im.zi);
        // U Y U+ = i (U X U+)(U Z U+); the extra i merges into a sign.
        const int f = pauli_mul_phase(im.xi, im.zi);
        im.ys = im.xs ^ im.zs ^ (((1 + f) / 2) & 1);
        t[static_cast<std::size_t>(p * 4 + xs * 2 + zs)] = im;
      }
    }
  }
  return t;
}

inline const std::array<C1Images, kNumClifford1q>& c1_images() {
  static const auto t = build_c1_images();
  return t;
}

}  // namespace detail

inline const C1Images& clifford1q_images(Clifford1q c) {
  return detail::c1_images()[c.id];
}

inline constexpr Clifford1q kC1Identity{0};
inline constexpr Clifford1q kC1H{8};
inline constexpr Clifford1q kC1S{20};
inline constexpr Clifford1q kC1Sdg{22};

// Image of (code, sign) under conjugation by c.
inline std::pair<std::uint8_t, bool> conjugate_code(Clifford1q c,
                                                    std::uint8_t code,
                                                    bool negative) {
  const C1Images& im = clifford1q_images(c);
  switch (code) {
    case 0: return {0, negative};
    case 1: return {im.xi, negative ^ im.xs};
    case 2: return {im.zi, negative ^ im.zs};
    default: return {im.yi, negative ^ im.ys};
  }
}

// compose(a, b): conjugation action of (b applied first, then a).
inline Clifford1q compose(Clifford1q a, Clifford1q b) {
  const auto bx = conjugate_code(b, 1, false);
  const auto bz = conjugate_code(b, 2, false);
  const auto [xc, xs] = conjugate_code(a, bx.first, bx.second);
  const auto [zc, zs] = conjugate_code(a, bz.first, bz.second);
  for (std::uint8_t id = 0; id < kNumClifford1q; ++id) {
    const C1Images& im = detail::c1_images()[id];
    if (im.xi == xc && im.xs == xs && im.zi == zc && im.zs == zs)
      return Clifford1q{id};
  }
  assert(false && "composition closed over the group");
  return kC1Identity;
}

inline Clifford1q inverse(Clifford1q c) {
  for (std::uint8_t id = 0; id < kNumClifford1q; ++id)
    if (compose(Clifford1q{id}, c) == kC1Identity) return Clifford1q{id};
  assert(false);
  return kC1Identity;
}

// The Clifford mapping sign*axis to +Z; used to reset a collapsed qubit.
inline Clifford1q rotation_to_z(PauliAxis axis, int sign) {
  const std::uint8_t code = axis_code(axis);
  const bool neg = sign < 0;
  for (std::uint8_t id = 0; id < kNumClifford1q; ++id) {
    const auto [c, s] = conjugate_code(Clifford1q{id}, code, neg);
    if (c == 2 && !s) return Clifford1q{id};
  }
  assert(false);
  return kC1Identity;
}

inline void conjugate_single(PauliOperator& p, Clifford1q c, std::size_t q) {
  const auto [code, neg] = conjugate_code(
      c, p.code_at(q), false);
  p.set_code(q, code);
  if (neg) p.phase_exp = static_cast<std::uint8_t>((p.phase_exp + 2) % 4);
}

}  // namespace entgeo
