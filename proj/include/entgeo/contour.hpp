#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace entgeo {

// Scalar field on a regular grid, rows indexed by t, columns by x.
struct GridField {
  std::size_t nx = 0, nt = 0;
  std::vector<double> v;  // nt * nx, NaN marks missing cells

  double at(std::size_t t, std::size_t x) const { return v[t * nx + x]; }
  double& at(std::size_t t, std::size_t x) { return v[t * nx + x]; }
};

struct ContourPoint {
  double x = 0, t = 0;
};
using Polyline = std::vector<ContourPoint>;

namespace detail {

inline double lerp_cross(double a, double b, double level) {
  if (a == b) return 0.5;
  return (level - a) / (b - a);
}

struct SegKey {
  std::int64_t a, b;
  bool operator<(const SegKey& o) const {
    return a != o.a ? a < o.a : b < o.b;
  }
};

inline SegKey quantize(const ContourPoint& p) {
  return {static_cast<std::int64_t>(std::llround(p.x * 4096.0)),
          static_cast<std::int64_t>(std::llround(p.t * 4096.0))};
}

}  // namespace detail

// Level-set polylines of the field by marching squares with linear edge
// interpolation. Cells touching missing values are skipped. Saddle cells
// are disambiguated with the cell-center average. Segments sharing endpoints
// are chained into polylines.
inline std::vector<Polyline> marching_squares(const GridField& g,
                                              double level) {
  std::vector<std::pair<ContourPoint, ContourPoint>> segs;
  for (std::size_t t = 0; t + 1 < g.nt; ++t) {
    for (std::size_t x = 0; x + 1 < g.nx; ++x) {
      const double v00 = g.at(t, x), v10 = g.at(t, x + 1);
      const double v01 = g.at(t + 1, x), v11 = g.at(t + 1, x + 1);
      if (std::isnan(v00) || std::isnan(v10) || std::isnan(v01) ||
          std::isnan(v11))
        continue;
      int c = 0;
      if (v00 >= level) c |= 1;
      if (v10 >= level) c |= 2;
      if (v11 >= level) c |= 4;
      if (v01 >= level) c |= 8;
      if (c == 0 || c == 15) continue;
      const double xf = static_cast<double>(x), tf = static_cast<double>(t);
      // interpolated crossing points on the four cell edges
      const ContourPoint bottom{xf + detail::lerp_cross(v00, v10, level), tf};
      const ContourPoint top{xf + detail::lerp_cross(v01, v11, level), tf + 1};
      const ContourPoint left{xf, tf + detail::lerp_cross(v00, v01, level)};
      const ContourPoint right{xf + 1, tf + detail::lerp_cross(v10, v11, level)};
      auto emit = [&](ContourPoint a, ContourPoint b) {
        segs.emplace_back(a, b);
      };
      switch (c) {
        case 1: case 14: emit(left, bottom); break;
        case 2: case 13: emit(bottom, right); break;
        case 3: case 12: emit(left, right); break;
        case 4: case 11: emit(top, right); break;
        case 6: case 9: emit(bottom, top); break;
        case 7: case 8: emit(left, top); break;
        case 5: case 10: {
          // saddle: join or split the diagonal by the cell-center average
          const bool center_high =
              0.25 * (v00 + v10 + v01 + v11) >= level;
          const bool high_corners_joined = center_high;
          if ((c == 5) == high_corners_joined) {
            emit(bottom, right);
            emit(left, top);
          } else {
            emit(left, bottom);
            emit(top, right);
          }
          break;
        }
        default: break;
      }
    }
  }
  // chain segments endpoint-to-endpoint
  std::multimap<detail::SegKey, std::size_t> by_end;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    by_end.emplace(detail::quantize(segs[i].first), i);
    by_end.emplace(detail::quantize(segs[i].second), i);
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<Polyline> lines;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    Polyline line{segs[i].first, segs[i].second};
    for (int dir = 0; dir < 2; ++dir) {
      for (;;) {
        const ContourPoint tail = dir == 0 ? line.back() : line.front();
        const auto range = by_end.equal_range(detail::quantize(tail));
        std::size_t next = static_cast<std::size_t>(-1);
        for (auto it = range.first; it != range.second; ++it)
          if (!used[it->second]) {
            next = it->second;
            break;
          }
        if (next == static_cast<std::size_t>(-1)) break;
        used[next] = true;
        const auto& s = segs[next];
        const bool head_matches =
            detail::quantize(s.first).a == detail::quantize(tail).a &&
            detail::quantize(s.first).b == detail::quantize(tail).b;
        const ContourPoint add = head_matches ? s.second : s.first;
        if (dir == 0)
          line.push_back(add);
        else
          line.insert(line.begin(), add);
      }
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

// Connected components of {cell : value >= level}, 4-neighbor adjacency,
// periodic in x. Missing cells never join a component.
inline int count_components_above(const GridField& g, double level) {
  const std::size_t n = g.nt * g.nx;
  std::vector<std::uint8_t> in(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    in[i] = (!std::isnan(g.v[i]) && g.v[i] >= level) ? 1 : 0;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::size_t> stack;
  int comps = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (!in[start] || seen[start]) continue;
    ++comps;
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const std::size_t t = cur / g.nx, x = cur % g.nx;
      const std::size_t nb[4] = {
          t * g.nx + (x + 1) % g.nx, t * g.nx + (x + g.nx - 1) % g.nx,
          t + 1 < g.nt ? (t + 1) * g.nx + x : n, t > 0 ? (t - 1) * g.nx + x : n};
      for (std::size_t m : nb) {
        if (m >= n || !in[m] || seen[m]) continue;
        seen[m] = 1;
        stack.push_back(m);
      }
    }
  }
  return comps;
}

}  // namespace entgeo
