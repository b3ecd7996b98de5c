#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "entgeo/bitvec.hpp"
#include "entgeo/pauli.hpp"
#include "entgeo/rng.hpp"

namespace entgeo {

enum class Gauge { raw, clipped };

// A region of the periodic system chain plus optional ancilla qubits.
// `start` is taken modulo the system size; wraparound is permitted.
struct RegionSpec {
  std::size_t start = 0;
  std::size_t length = 0;
  std::vector<std::size_t> ancillas;

  static RegionSpec interval(std::size_t start, std::size_t length) {
    return RegionSpec{start, length, {}};
  }
};

struct MeasurementResult {
  int outcome = 0;  // +1 or -1
  bool deterministic = false;
};

struct CliffordSpec {
  enum class Kind { single, swap_gate, iswap_gate };
  Kind kind = Kind::single;
  Clifford1q c{};  // used when kind == single

  static CliffordSpec single(Clifford1q c) {
    return CliffordSpec{Kind::single, c};
  }
  static CliffordSpec swap() { return CliffordSpec{Kind::swap_gate, {}}; }
  static CliffordSpec iswap() { return CliffordSpec{Kind::iswap_gate, {}}; }
};

// Pure stabilizer state on `width` qubits in the Aaronson-Gottesman layout:
// `width` stabilizer generators plus paired destabilizers, stored column-major
// as per-site bit planes over generator index. That makes gates and the
// anticommutation scans in measurement word-parallel across the tableau; the
// clipped gauge transposes the generators into row-major scratch on demand.
class StabilizerState {
 public:
  explicit StabilizerState(std::size_t width, std::size_t system_size = 0)
      : w_(width),
        sys_(system_size == 0 ? width : system_size),
        rw_(words_for(width)),
        sw_(words_for(width)),
        bits_(width * 4 * rw_, 0),
        sign_s_(rw_, 0),
        sign_d_(rw_, 0) {
    if (width == 0) throw std::invalid_argument("width must be >= 1");
    if (sys_ > w_) throw std::invalid_argument("system size exceeds width");
    for (std::size_t r = 0; r < w_; ++r) {
      set_bit(sz(r), r);  // generator r = +Z_r
      set_bit(dx(r), r);  // destabilizer r = +X_r
    }
  }

  std::size_t width() const { return w_; }
  std::size_t system_size() const { return sys_; }
  Gauge gauge() const { return clip_.valid ? Gauge::clipped : Gauge::raw; }

  // --- gates ---------------------------------------------------------------

  void apply_single(std::size_t q, Clifford1q c) {
    check_site(q);
    const C1Images& im = clifford1q_images(c);
    const word mxX = mask(im.xi & 1), mzX = mask(im.xi & 2);
    const word mxZ = mask(im.zi & 1), mzZ = mask(im.zi & 2);
    const word mxY = mask(im.yi & 1), mzY = mask(im.yi & 2);
    const word msX = mask(im.xs), msZ = mask(im.zs), msY = mask(im.ys);
    auto upd = [&](std::span<word> x, std::span<word> z, std::span<word> s) {
      for (std::size_t k = 0; k < rw_; ++k) {
        const word xv = x[k], zv = z[k];
        const word aX = xv & ~zv, aZ = ~xv & zv, aY = xv & zv;
        x[k] = (aX & mxX) | (aZ & mxZ) | (aY & mxY);
        z[k] = (aX & mzX) | (aZ & mzZ) | (aY & mzY);
        s[k] ^= (aX & msX) ^ (aZ & msZ) ^ (aY & msY);
      }
    };
    upd(sx(q), sz(q), sign_s_);
    upd(dx(q), dz(q), sign_d_);
    touch();
  }

  void apply_swap(std::size_t a, std::size_t b) {
    check_pair(a, b);
    std::swap_ranges(block(a).begin(), block(a).end(), block(b).begin());
    touch();
  }

  void apply_cz(std::size_t a, std::size_t b) {
    check_pair(a, b);
    auto upd = [&](std::span<word> xa, std::span<word> za, std::span<word> xb,
                   std::span<word> zb, std::span<word> s) {
      for (std::size_t k = 0; k < rw_; ++k) {
        s[k] ^= xa[k] & xb[k] & (za[k] ^ zb[k]);
        const word ozb = zb[k];
        zb[k] ^= xa[k];
        za[k] ^= xb[k];
        (void)ozb;
      }
    };
    upd(sx(a), sz(a), sx(b), sz(b), sign_s_);
    upd(dx(a), dz(a), dx(b), dz(b), sign_d_);
    touch();
  }

  void apply_cnot(std::size_t control, std::size_t target) {
    check_pair(control, target);
    auto upd = [&](std::span<word> xc, std::span<word> zc, std::span<word> xt,
                   std::span<word> zt, std::span<word> s) {
      for (std::size_t k = 0; k < rw_; ++k) {
        s[k] ^= xc[k] & zt[k] & ~(xt[k] ^ zc[k]);
        xt[k] ^= xc[k];
        zc[k] ^= zt[k];
      }
    };
    upd(sx(control), sz(control), sx(target), sz(target), sign_s_);
    upd(dx(control), dz(control), dx(target), dz(target), sign_d_);
    touch();
  }

  void apply_hadamard(std::size_t q) { apply_single(q, kC1H); }

  void apply_iswap(std::size_t a, std::size_t b) {
    apply_single(a, kC1S);
    apply_single(b, kC1S);
    apply_cz(a, b);
    apply_swap(a, b);
  }

  void apply_iswap_inverse(std::size_t a, std::size_t b) {
    apply_swap(a, b);
    apply_cz(a, b);
    apply_single(a, kC1Sdg);
    apply_single(b, kC1Sdg);
  }

  void apply_clifford(const CliffordSpec& g,
                      std::span<const std::size_t> targets) {
    switch (g.kind) {
      case CliffordSpec::Kind::single:
        if (targets.size() != 1)
          throw std::invalid_argument("single-qubit gate takes one target");
        apply_single(targets[0], g.c);
        return;
      case CliffordSpec::Kind::swap_gate:
        if (targets.size() != 2)
          throw std::invalid_argument("SWAP takes two targets");
        apply_swap(targets[0], targets[1]);
        return;
      case CliffordSpec::Kind::iswap_gate:
        if (targets.size() != 2)
          throw std::invalid_argument("iSWAP takes two targets");
        apply_iswap(targets[0], targets[1]);
        return;
    }
  }

  // --- measurement ----------------------------------------------------------

  // Projective measurement of the single-site Pauli `axis` on `site`.
  // Deterministic outcomes leave the state (and the rng) untouched.
  MeasurementResult measure_pauli(std::size_t site, PauliAxis axis, Rng& rng) {
    check_site(site);
    const std::uint8_t code = axis_code(axis);
    const bool px = code & 1, pz = (code >> 1) & 1;

    ensure_meas_scratch();
    anticommute_mask(sx(site), sz(site), px, pz, anti_s_);
    const std::size_t pivot = lowest_set(std::span<const word>(anti_s_));
    if (pivot == knpos) return deterministic_measure(site, px, pz);

    const int outcome = coin(rng) ? -1 : +1;
    collapse(site, px, pz, pivot, outcome);
    touch();
    return {outcome, false};
  }

  // --- entropy --------------------------------------------------------------

  // Exact von Neumann entropy in bits: GF(2) rank of the generator matrix
  // restricted to the region's (x|z) columns, minus the region qubit count.
  long entropy_rank(const RegionSpec& region) const {
    return entropy_of_sites(resolve(region));
  }

  long entropy_of_sites(const std::vector<std::size_t>& sites_in) const {
    if (sites_in.empty()) return 0;
    if (sites_in.size() >= w_) return 0;
    const std::vector<std::size_t>* sites = &sites_in;
    std::vector<std::size_t> comp;
    if (2 * sites_in.size() > w_) {  // pure state: S_A = S_complement
      comp = complement_sites(sites_in);
      sites = &comp;
    }
    const long rank = region_rank(*sites);
    const long s = rank - static_cast<long>(sites->size());
    assert(s >= 0);
    return s;
  }

  // --- clipped gauge ----------------------------------------------------------

  // Canonicalizes the generators so that every site holds exactly two
  // endpoints (left or right). The clipped rows are kept in a cache alongside
  // the live tableau; any gate or measurement drops back to the raw gauge.
  void clip_gauge() {
    if (clip_.valid) return;
    to_rows(clip_.rx, clip_.rz, clip_.sign);
    left_reduce(clip_.rx, clip_.rz, clip_.sign);
    recompute_endpoints();
    right_reduce();
    clip_.valid = true;
  }

  // Entropy of the contiguous qubit range [pos, pos+len) in the current
  // ordering: half the number of clipped generators with exactly one
  // endpoint inside. O(width) per query.
  long entropy_clipped_range(std::size_t pos, std::size_t len) const {
    if (!clip_.valid)
      throw std::logic_error("entropy_clipped requires the clipped gauge");
    if (len == 0 || len >= w_) return 0;
    if (pos >= w_) throw std::invalid_argument("interval start out of range");
    if (pos + len > w_)  // wraps: answer via the complement interval
      return entropy_clipped_range((pos + len) % w_, w_ - len);
    const std::size_t a = pos, b = pos + len - 1;
    std::size_t crossings = 0;
    for (std::size_t i = 0; i < w_; ++i) {
      const bool inl = clip_.left[i] >= a && clip_.left[i] <= b;
      const bool inr = clip_.right[i] >= a && clip_.right[i] <= b;
      crossings += (inl != inr) ? 1 : 0;
    }
    assert(crossings % 2 == 0);
    return static_cast<long>(crossings / 2);
  }

  long entropy_clipped(const RegionSpec& region) const {
    if (!region.ancillas.empty())
      throw std::invalid_argument("clipped queries take plain intervals");
    if (region.length > sys_) throw std::invalid_argument("interval too long");
    const std::size_t start = region.start % sys_;
    if (start + region.length <= sys_)
      return entropy_clipped_range(start, region.length);
    if (sys_ != w_)
      throw std::invalid_argument(
          "wrapped interval with ancilla tail is not contiguous");
    return entropy_clipped_range(start, region.length);  // wraps mod width
  }

  // Clipped-gauge introspection (valid after clip_gauge()).
  std::size_t clipped_left(std::size_t i) const { return clip_.left[i]; }
  std::size_t clipped_right(std::size_t i) const { return clip_.right[i]; }
  PauliOperator clipped_generator(std::size_t i) const {
    PauliOperator p = PauliOperator::identity(w_);
    std::copy_n(&clip_.rx[i * sw_], sw_, p.x.begin());
    std::copy_n(&clip_.rz[i * sw_], sw_, p.z.begin());
    p.phase_exp = clip_.sign[i] ? 2 : 0;
    return p;
  }

  // --- structure ------------------------------------------------------------

  // Moves the qubit at position `from` to position `to`, shifting the ones in
  // between; a pure relabeling, so every entropy is invariant.
  void relocate_qubit(std::size_t from, std::size_t to) {
    check_site(from);
    check_site(to);
    if (from == to) return;
    const std::size_t bs = 4 * rw_;
    auto* base = bits_.data();
    if (from < to)
      std::rotate(base + from * bs, base + (from + 1) * bs,
                  base + (to + 1) * bs);
    else
      std::rotate(base + to * bs, base + from * bs, base + (from + 1) * bs);
    touch();
  }

  PauliOperator stabilizer(std::size_t i) const { return extract_row(i, true); }
  PauliOperator destabilizer(std::size_t i) const {
    return extract_row(i, false);
  }

  // Unique reduced-echelon serialization of the stabilizer group with phases;
  // equal groups give equal bytes.
  std::vector<std::uint8_t> canonical_form() const {
    std::vector<word> rx, rz;
    std::vector<std::uint8_t> sg;
    to_rows(rx, rz, sg);
    left_reduce(rx, rz, sg);
    std::vector<std::uint8_t> out;
    out.reserve(w_ * (2 * sw_ * 8 + 1));
    for (std::size_t i = 0; i < w_; ++i) {
      for (std::size_t k = 0; k < sw_; ++k) append_le(out, rx[i * sw_ + k]);
      for (std::size_t k = 0; k < sw_; ++k) append_le(out, rz[i * sw_ + k]);
      out.push_back(sg[i]);
    }
    return out;
  }

  std::uint64_t canonical_digest() const {
    const auto bytes = canonical_form();
    return fnv1a64(bytes.data(), bytes.size());
  }

  // Full invariant check; throws std::logic_error on the first violation.
  // Cubic in width, intended for tests and debugging.
  void validate() const {
    std::vector<PauliOperator> gen(w_), des(w_);
    for (std::size_t i = 0; i < w_; ++i) {
      gen[i] = stabilizer(i);
      des[i] = destabilizer(i);
      if (!gen[i].is_hermitian()) fail("generator phase not +/-1");
    }
    for (std::size_t i = 0; i < w_; ++i)
      for (std::size_t j = i + 1; j < w_; ++j)
        if (gen[i].anticommutes_with(gen[j])) fail("generators anticommute");
    for (std::size_t i = 0; i < w_; ++i)
      for (std::size_t j = 0; j < w_; ++j) {
        const bool anti = des[i].anticommutes_with(gen[j]);
        if (anti != (i == j)) fail("destabilizer pairing broken");
      }
    // Independence: full-rank stabilizer matrix.
    std::vector<std::size_t> all(w_);
    for (std::size_t q = 0; q < w_; ++q) all[q] = q;
    if (region_rank(all) != static_cast<long>(w_)) fail("generators dependent");
    if (clip_.valid) {
      std::vector<std::size_t> endpoints(w_, 0);
      for (std::size_t i = 0; i < w_; ++i) {
        ++endpoints[clip_.left[i]];
        ++endpoints[clip_.right[i]];
      }
      for (std::size_t j = 0; j < w_; ++j)
        if (endpoints[j] != 2) fail("clipped endpoint condition violated");
    }
  }

  // Plane access for rank-based analyses (read-only).
  std::span<const word> stab_x_plane(std::size_t q) const {
    return {&bits_[q * 4 * rw_], rw_};
  }
  std::span<const word> stab_z_plane(std::size_t q) const {
    return {&bits_[q * 4 * rw_ + rw_], rw_};
  }
  std::size_t plane_words() const { return rw_; }

  std::vector<std::size_t> resolve(const RegionSpec& r) const {
    if (r.length > sys_)
      throw std::invalid_argument("region length exceeds system size");
    std::vector<std::size_t> sites;
    sites.reserve(r.length + r.ancillas.size());
    for (std::size_t k = 0; k < r.length; ++k)
      sites.push_back((r.start + k) % sys_);
    for (std::size_t a : r.ancillas) {
      if (a < sys_ || a >= w_)
        throw std::invalid_argument("ancilla index out of range");
      sites.push_back(a);
    }
    std::sort(sites.begin(), sites.end());
    if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
      throw std::invalid_argument("region repeats a qubit");
    return sites;
  }

 private:
  std::size_t w_, sys_, rw_, sw_;
  std::vector<word> bits_;  // per site: [stab_x | stab_z | dest_x | dest_z]
  std::vector<word> sign_s_, sign_d_;

  struct ClipCache {
    bool valid = false;
    std::vector<word> rx, rz;        // row-major generator rows over sites
    std::vector<std::uint8_t> sign;  // 0 -> +1, 1 -> -1
    std::vector<std::size_t> left, right;
  };
  mutable ClipCache clip_;

  // measurement / rank scratch
  std::vector<word> anti_s_, anti_d_, cnt_lo_, cnt_hi_;
  mutable std::vector<word> piv_rows_;
  mutable std::vector<std::uint8_t> piv_used_;
  mutable std::vector<word> red_;

  static word mask(bool b) { return b ? ~word{0} : word{0}; }
  static word mask(int b) { return b ? ~word{0} : word{0}; }

  std::span<word> block(std::size_t q) { return {&bits_[q * 4 * rw_], 4 * rw_}; }
  std::span<word> sx(std::size_t q) { return {&bits_[q * 4 * rw_], rw_}; }
  std::span<word> sz(std::size_t q) { return {&bits_[q * 4 * rw_ + rw_], rw_}; }
  std::span<word> dx(std::size_t q) {
    return {&bits_[q * 4 * rw_ + 2 * rw_], rw_};
  }
  std::span<word> dz(std::size_t q) {
    return {&bits_[q * 4 * rw_ + 3 * rw_], rw_};
  }
  std::span<const word> sx(std::size_t q) const {
    return {&bits_[q * 4 * rw_], rw_};
  }
  std::span<const word> sz(std::size_t q) const {
    return {&bits_[q * 4 * rw_ + rw_], rw_};
  }
  std::span<const word> dx(std::size_t q) const {
    return {&bits_[q * 4 * rw_ + 2 * rw_], rw_};
  }
  std::span<const word> dz(std::size_t q) const {
    return {&bits_[q * 4 * rw_ + 3 * rw_], rw_};
  }

  void touch() { clip_.valid = false; }

  void check_site(std::size_t q) const {
    if (q >= w_) throw std::invalid_argument("qubit index out of range");
  }
  void check_pair(std::size_t a, std::size_t b) const {
    check_site(a);
    check_site(b);
    if (a == b) throw std::invalid_argument("two-qubit gate targets repeat");
  }

  [[noreturn]] static void fail(const char* what) {
    throw std::logic_error(what);
  }

  static void append_le(std::vector<std::uint8_t>& out, word v) {
    for (int k = 0; k < 8; ++k) out.push_back((v >> (8 * k)) & 0xff);
  }

  void ensure_meas_scratch() {
    if (anti_s_.size() != rw_) {
      anti_s_.assign(rw_, 0);
      anti_d_.assign(rw_, 0);
      cnt_lo_.assign(rw_, 0);
      cnt_hi_.assign(rw_, 0);
    }
  }

  static void anticommute_mask(std::span<const word> xp,
                               std::span<const word> zp, bool px, bool pz,
                               std::vector<word>& out) {
    const word mx = mask(pz), mz = mask(px);
    out.resize(xp.size());
    for (std::size_t k = 0; k < xp.size(); ++k)
      out[k] = (xp[k] & mx) ^ (zp[k] & mz);
  }

  // Anticommuting generator exists: collapse onto the +/- eigenstate.
  // One streaming pass over the site blocks does the pivot-row extraction,
  // its move into the destabilizer slot, and the word-parallel row
  // multiplications with mod-4 phase counters.
  void collapse(std::size_t site, bool px, bool pz, std::size_t pivot,
                int outcome) {
    anticommute_mask(dx(site), dz(site), px, pz, anti_d_);
    std::vector<word>& flag_s = anti_s_;
    std::vector<word>& flag_d = anti_d_;
    clear_bit(flag_s, pivot);
    clear_bit(flag_d, pivot);  // destabilizer row `pivot` gets overwritten
    std::fill(cnt_lo_.begin(), cnt_lo_.end(), 0);
    std::fill(cnt_hi_.begin(), cnt_hi_.end(), 0);
    const bool sp = get_bit(std::span<const word>(sign_s_), pivot);

    for (std::size_t q = 0; q < w_; ++q) {
      auto xq = sx(q), zq = sz(q), dxq = dx(q), dzq = dz(q);
      const bool bx = get_bit(xq, pivot);
      const bool bz = get_bit(zq, pivot);
      // pivot row moves to the paired destabilizer slot
      assign_bit(dxq, pivot, bx);
      assign_bit(dzq, pivot, bz);
      clear_bit(xq, pivot);
      clear_bit(zq, pivot);
      if (!bx && !bz) continue;
      const std::uint8_t pc = static_cast<std::uint8_t>((bx ? 1 : 0) |
                                                        (bz ? 2 : 0));
      const word bxm = mask(bx), bzm = mask(bz);
      for (std::size_t k = 0; k < rw_; ++k) {
        const word f = flag_s[k];
        const word xv = xq[k], zv = zq[k];
        word plus, minus;
        switch (pc) {
          case 1:  // pivot X: Z gains +i, Y gains -i
            plus = ~xv & zv;
            minus = xv & zv;
            break;
          case 2:  // pivot Z: Y gains +i, X gains -i
            plus = xv & zv;
            minus = xv & ~zv;
            break;
          default:  // pivot Y: X gains +i, Z gains -i
            plus = xv & ~zv;
            minus = ~xv & zv;
            break;
        }
        plus &= f;
        minus &= f;
        cnt_hi_[k] ^= (cnt_lo_[k] & plus) ^ (~cnt_lo_[k] & minus);
        cnt_lo_[k] ^= plus | minus;
        xq[k] ^= bxm & f;
        zq[k] ^= bzm & f;
        const word fd = flag_d[k];
        dxq[k] ^= bxm & fd;
        dzq[k] ^= bzm & fd;
      }
    }

    const word spm = mask(sp);
    for (std::size_t k = 0; k < rw_; ++k) {
      assert((cnt_lo_[k] & flag_s[k]) == 0 &&
             "commuting rows produce even phase");
      sign_s_[k] ^= (spm & flag_s[k]) ^ cnt_hi_[k];
      sign_d_[k] ^= spm & flag_d[k];
    }
    assign_bit(std::span<word>(sign_d_), pivot, sp);

    // fresh stabilizer: outcome * P on `site`
    if (px) set_bit(sx(site), pivot);
    if (pz) set_bit(sz(site), pivot);
    assign_bit(std::span<word>(sign_s_), pivot, outcome < 0);
  }

  // Measured operator is in the stabilizer group (up to sign): multiply out
  // the generators flagged by destabilizer anticommutation and read the sign.
  MeasurementResult deterministic_measure(std::size_t site, bool px, bool pz) {
    anticommute_mask(dx(site), dz(site), px, pz, anti_d_);
    std::vector<word> sxr(sw_, 0), szr(sw_, 0), txr(sw_, 0), tzr(sw_, 0);
    long long expn = 0;
    for_each_set(std::span<const word>(anti_d_), [&](std::size_t i) {
      std::fill(txr.begin(), txr.end(), 0);
      std::fill(tzr.begin(), tzr.end(), 0);
      for (std::size_t q = 0; q < w_; ++q) {
        if (get_bit(sx(q), i)) set_bit(std::span<word>(txr), q);
        if (get_bit(sz(q), i)) set_bit(std::span<word>(tzr), q);
      }
      expn += 2 * (get_bit(std::span<const word>(sign_s_), i) ? 1 : 0);
      expn += product_phase_exponent(sxr, szr, txr, tzr);
      for (std::size_t k = 0; k < sw_; ++k) {
        sxr[k] ^= txr[k];
        szr[k] ^= tzr[k];
      }
    });
#ifndef NDEBUG
    for (std::size_t q = 0; q < w_; ++q) {
      const bool ex = get_bit(std::span<const word>(sxr), q);
      const bool ez = get_bit(std::span<const word>(szr), q);
      assert(ex == (q == site && px) && ez == (q == site && pz));
    }
#endif
    const int m = static_cast<int>(((expn % 4) + 4) % 4);
    assert(m == 0 || m == 2);
    return {m == 0 ? +1 : -1, true};
  }

  std::vector<std::size_t> complement_sites(
      const std::vector<std::size_t>& sites) const {
    std::vector<std::size_t> comp;
    comp.reserve(w_ - sites.size());
    std::size_t k = 0;
    for (std::size_t q = 0; q < w_; ++q) {
      if (k < sites.size() && sites[k] == q) {
        ++k;
        continue;
      }
      comp.push_back(q);
    }
    return comp;
  }

  // Rank over GF(2) of the stabilizer matrix restricted to the sites'
  // (x|z) columns. The per-site planes are exactly the rows of the
  // transposed restriction, so no gather is needed.
  long region_rank(const std::vector<std::size_t>& sites) const {
    if (piv_rows_.size() != w_ * rw_) {
      piv_rows_.assign(w_ * rw_, 0);
      piv_used_.assign(w_, 0);
      red_.assign(rw_, 0);
    }
    std::fill(piv_used_.begin(), piv_used_.end(), 0);
    long rank = 0;
    auto insert = [&](std::span<const word> plane) {
      std::copy(plane.begin(), plane.end(), red_.begin());
      for (;;) {
        const std::size_t j = lowest_set(std::span<const word>(red_));
        if (j == knpos) return;
        word* pr = &piv_rows_[j * rw_];
        if (!piv_used_[j]) {
          piv_used_[j] = 1;
          std::copy(red_.begin(), red_.end(), pr);
          ++rank;
          return;
        }
        for (std::size_t k = 0; k < rw_; ++k) red_[k] ^= pr[k];
      }
    };
    for (std::size_t q : sites) {
      insert(sx(q));
      insert(sz(q));
    }
    return rank;
  }

  PauliOperator extract_row(std::size_t i, bool stab) const {
    PauliOperator p = PauliOperator::identity(w_);
    for (std::size_t q = 0; q < w_; ++q) {
      if (get_bit(stab ? sx(q) : dx(q), i)) set_bit(std::span<word>(p.x), q);
      if (get_bit(stab ? sz(q) : dz(q), i)) set_bit(std::span<word>(p.z), q);
    }
    const auto& sg = stab ? sign_s_ : sign_d_;
    p.phase_exp = get_bit(std::span<const word>(sg), i) ? 2 : 0;
    return p;
  }

  // Transpose the stabilizer planes into row-major rows (64x64 bit blocks).
  void to_rows(std::vector<word>& rx, std::vector<word>& rz,
               std::vector<std::uint8_t>& sign) const {
    rx.assign(w_ * sw_, 0);
    rz.assign(w_ * sw_, 0);
    sign.resize(w_);
    for (std::size_t i = 0; i < w_; ++i)
      sign[i] = get_bit(std::span<const word>(sign_s_), i) ? 1 : 0;
    word tile[64];
    for (int plane = 0; plane < 2; ++plane) {
      auto& rows = plane == 0 ? rx : rz;
      for (std::size_t sb = 0; sb < sw_; ++sb) {
        for (std::size_t rb = 0; rb < rw_; ++rb) {
          for (std::size_t k = 0; k < 64; ++k) {
            const std::size_t q = sb * 64 + k;
            tile[k] = q < w_ ? (plane == 0 ? sx(q)[rb] : sz(q)[rb]) : 0;
          }
          transpose64(tile);
          const std::size_t rmax = std::min<std::size_t>(64, w_ - rb * 64);
          for (std::size_t j = 0; j < rmax; ++j)
            rows[(rb * 64 + j) * sw_ + sb] = tile[j];
        }
      }
    }
  }

  std::span<word> row_x(std::vector<word>& rx, std::size_t i) const {
    return {&rx[i * sw_], sw_};
  }
  std::span<word> row_z(std::vector<word>& rz, std::size_t i) const {
    return {&rz[i * sw_], sw_};
  }

  // rows[b] <- rows[b] * rows[a], exact sign (rows commute).
  static void row_mul(std::vector<word>& rx, std::vector<word>& rz,
                      std::vector<std::uint8_t>& sign, std::size_t sw,
                      std::size_t b, std::size_t a) {
    std::span<word> bx{&rx[b * sw], sw}, bz{&rz[b * sw], sw};
    std::span<const word> ax{&rx[a * sw], sw}, az{&rz[a * sw], sw};
    const long long f = product_phase_exponent(bx, bz, ax, az);
    const long long e = 2 * sign[b] + 2 * sign[a] + f;
    assert(((e % 2) + 2) % 2 == 0);
    sign[b] = static_cast<std::uint8_t>((((e / 2) % 2) + 2) % 2);
    for (std::size_t k = 0; k < sw; ++k) {
      bx[k] ^= ax[k];
      bz[k] ^= az[k];
    }
  }

  // Reduced row echelon over column order (x_0, z_0, x_1, z_1, ...): sorts
  // rows by left endpoint with at most two starting on any site.
  void left_reduce(std::vector<word>& rx, std::vector<word>& rz,
                   std::vector<std::uint8_t>& sign) const {
    std::size_t rank = 0;
    for (std::size_t col = 0; col < 2 * w_ && rank < w_; ++col) {
      const std::size_t site = col >> 1;
      auto& rows = (col & 1) ? rz : rx;
      std::size_t pick = knpos;
      for (std::size_t i = rank; i < w_; ++i) {
        if (get_bit(std::span<const word>{&rows[i * sw_], sw_}, site)) {
          pick = i;
          break;
        }
      }
      if (pick == knpos) continue;
      if (pick != rank) {
        std::swap_ranges(&rx[pick * sw_], &rx[(pick + 1) * sw_],
                         &rx[rank * sw_]);
        std::swap_ranges(&rz[pick * sw_], &rz[(pick + 1) * sw_],
                         &rz[rank * sw_]);
        std::swap(sign[pick], sign[rank]);
      }
      for (std::size_t i = 0; i < w_; ++i) {
        if (i == rank) continue;
        if (get_bit(std::span<const word>{&rows[i * sw_], sw_}, site))
          row_mul(rx, rz, sign, sw_, i, rank);
      }
      ++rank;
    }
    assert(rank == w_ && "stabilizer matrix has full rank");
  }

  void recompute_endpoints() const {
    clip_.left.resize(w_);
    clip_.right.resize(w_);
    for (std::size_t i = 0; i < w_; ++i) endpoints_of(i);
  }

  void endpoints_of(std::size_t i) const {
    std::size_t lo = knpos, hi = knpos;
    for (std::size_t k = 0; k < sw_; ++k) {
      const word v = clip_.rx[i * sw_ + k] | clip_.rz[i * sw_ + k];
      if (!v) continue;
      if (lo == knpos) lo = k * 64 + std::countr_zero(v);
      hi = k * 64 + (63 - std::countl_zero(v));
    }
    assert(lo != knpos && "pure-state generators are never identity");
    clip_.left[i] = lo;
    clip_.right[i] = hi;
  }

  std::uint8_t clip_code_at(std::size_t i, std::size_t q) const {
    const bool bx = get_bit(
        std::span<const word>{&clip_.rx[i * sw_], sw_}, q);
    const bool bz = get_bit(
        std::span<const word>{&clip_.rz[i * sw_], sw_}, q);
    return static_cast<std::uint8_t>((bx ? 1 : 0) | (bz ? 2 : 0));
  }

  // Resolve right-endpoint conflicts site by site from the right. Two rows
  // ending on a site with the same Pauli there: multiply to shorten the one
  // with the smaller left endpoint. Three rows ending with pairwise distinct
  // Paulis: combine the two with the largest left endpoints, which creates a
  // duplicate for the next round. Multiplying a row with a larger-or-equal
  // left endpoint into another never moves the target's left endpoint.
  void right_reduce() const {
    auto mul = [&](std::size_t b, std::size_t a) {
      row_mul(clip_.rx, clip_.rz, clip_.sign, sw_, b, a);
      endpoints_of(b);
    };
    for (std::size_t j = w_; j-- > 0;) {
      for (;;) {
        std::size_t byc[4] = {knpos, knpos, knpos, knpos};
        std::size_t enders[3];
        std::size_t ne = 0;
        std::size_t dup_a = knpos, dup_b = knpos;
        for (std::size_t i = 0; i < w_ && dup_a == knpos; ++i) {
          if (clip_.right[i] != j) continue;
          if (ne < 3) enders[ne] = i;
          ++ne;
          const std::uint8_t c = clip_code_at(i, j);
          if (byc[c] != knpos) {
            dup_a = byc[c];
            dup_b = i;
          } else {
            byc[c] = i;
          }
        }
        if (dup_a != knpos) {
          // shorten the one with the smaller left endpoint
          if (clip_.left[dup_a] < clip_.left[dup_b]) std::swap(dup_a, dup_b);
          mul(dup_b, dup_a);
          continue;
        }
        if (ne == 3) {
          std::sort(enders, enders + 3, [&](std::size_t a, std::size_t b) {
            return clip_.left[a] > clip_.left[b];
          });
          mul(enders[1], enders[0]);
          continue;
        }
        break;
      }
    }
  }
};

// --- composite information quantities --------------------------------------

inline void require_disjoint(const StabilizerState& s,
                             std::initializer_list<const RegionSpec*> regions) {
  std::vector<std::size_t> seen;
  for (const RegionSpec* r : regions) {
    for (std::size_t q : s.resolve(*r)) seen.push_back(q);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw std::invalid_argument("regions overlap");
}

inline std::vector<std::size_t> union_sites(const StabilizerState& s,
                                            std::initializer_list<const RegionSpec*> regions) {
  std::vector<std::size_t> u;
  for (const RegionSpec* r : regions)
    for (std::size_t q : s.resolve(*r)) u.push_back(q);
  std::sort(u.begin(), u.end());
  return u;
}

inline long mutual_information(const StabilizerState& s, const RegionSpec& a,
                               const RegionSpec& b) {
  require_disjoint(s, {&a, &b});
  return s.entropy_rank(a) + s.entropy_rank(b) -
         s.entropy_of_sites(union_sites(s, {&a, &b}));
}

inline long tripartite_information(const StabilizerState& s,
                                   const RegionSpec& a, const RegionSpec& b,
                                   const RegionSpec& c) {
  require_disjoint(s, {&a, &b, &c});
  const long sa = s.entropy_rank(a);
  const long sb = s.entropy_rank(b);
  const long sc = s.entropy_rank(c);
  const long sab = s.entropy_of_sites(union_sites(s, {&a, &b}));
  const long sbc = s.entropy_of_sites(union_sites(s, {&b, &c}));
  const long sac = s.entropy_of_sites(union_sites(s, {&a, &c}));
  const long sabc = s.entropy_of_sites(union_sites(s, {&a, &b, &c}));
  return sa + sb + sc - sab - sbc - sac + sabc;
}

inline StabilizerState new_product_state(std::size_t width,
                                         std::size_t system_size = 0) {
  return StabilizerState(width, system_size);
}

}  // namespace entgeo
