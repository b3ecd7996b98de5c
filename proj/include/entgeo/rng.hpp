#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>

namespace entgeo {

// All randomness flows through mt19937_64 plus the hand-rolled draw helpers
// below. std::uniform_*_distribution is implementation-defined, so using it
// would break bit-exact replay across standard libraries.
using Rng = std::mt19937_64;

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), h);
}

// Stream seed for trajectory `index` of experiment `experiment_id` under a
// master seed. Independent of execution order and thread count.
inline std::uint64_t derive_stream_seed(std::uint64_t master,
                                        std::string_view experiment_id,
                                        std::uint64_t index) {
  unsigned char buf[16];
  std::memcpy(buf, &master, 8);
  std::memcpy(buf + 8, &index, 8);
  std::uint64_t h = fnv1a64(buf, 8);
  h = fnv1a64(experiment_id, h);
  h = fnv1a64(buf + 8, 8, h);
  return h;
}

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t bound = n * (UINT64_MAX / n);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= bound);
  return r % n;
}

inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

// Box-Muller, one value per call.
inline double gaussian(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace entgeo

