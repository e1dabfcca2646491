// Copyright 2026 The amen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "amen/group.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace amen {

namespace {

using u128 = unsigned __int128;

constexpr int kLampOffset = 64;  // bit b holds site b - 64

u128 lamp_mask(const Element& e) {
  return (static_cast<u128>(static_cast<uint64_t>(e.c[1])) << 64) |
         static_cast<uint64_t>(e.c[0]);
}

void set_lamp_mask(Element& e, u128 m) {
  e.c[0] = static_cast<int64_t>(static_cast<uint64_t>(m));
  e.c[1] = static_cast<int64_t>(static_cast<uint64_t>(m >> 64));
}

// Moves every lit site s to s + p.
u128 shift_lamps(u128 m, int64_t p) {
  if (m == 0 || p == 0) return m;
  if (p >= 128 || p <= -128) throw std::overflow_error("lamplighter: lamp window exceeded");
  if (p > 0) {
    if ((m >> (128 - p)) != 0) throw std::overflow_error("lamplighter: lamp window exceeded");
    return m << p;
  }
  const int q = static_cast<int>(-p);
  if ((m & ((static_cast<u128>(1) << q) - 1)) != 0)
    throw std::overflow_error("lamplighter: lamp window exceeded");
  return m >> q;
}

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Box {
  std::array<int64_t, 4> lo{}, hi{};
};

Box bounding_box(const FiniteGroupSet& s, int d) {
  Box b;
  for (int i = 0; i < d; ++i) {
    b.lo[i] = INT64_MAX;
    b.hi[i] = INT64_MIN;
  }
  for (const auto& e : s) {
    for (int i = 0; i < d; ++i) {
      b.lo[i] = std::min(b.lo[i], e.c[i]);
      b.hi[i] = std::max(b.hi[i], e.c[i]);
    }
  }
  return b;
}

// Shared scan: x is a boundary point iff {k x} has points on both sides of
// the predicate. Candidates must be sorted; output keeps their order.
template <class Pred>
FiniteGroupSet boundary_scan(const Group& g, const FiniteGroupSet& k,
                             const std::vector<Element>& cand, Pred inside, Exec exec) {
  std::vector<char> hit(cand.size(), 0);
  auto test = [&](size_t j) {
    bool in = false, out = false;
    for (const auto& kk : k) {
      if (inside(g.mul(kk, cand[j]))) in = true;
      else out = true;
      if (in && out) return true;
    }
    return false;
  };
  const int64_t n = static_cast<int64_t>(cand.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 256)
    for (int64_t j = 0; j < n; ++j) hit[j] = test(j);
  } else {
    for (int64_t j = 0; j < n; ++j) hit[j] = test(j);
  }
  std::vector<Element> out;
  for (int64_t j = 0; j < n; ++j)
    if (hit[j]) out.push_back(cand[j]);
  return FiniteGroupSet::from_sorted(std::move(out));
}

}  // namespace

size_t ElementHash::operator()(const Element& e) const noexcept {
  uint64_t h = mix64(static_cast<uint64_t>(e.c[0]));
  h = mix64(h ^ static_cast<uint64_t>(e.c[1]));
  h = mix64(h ^ static_cast<uint64_t>(e.c[2]));
  h = mix64(h ^ static_cast<uint64_t>(e.c[3]));
  return static_cast<size_t>(h);
}

Group Group::zd(int d) {
  if (d < 1 || d > 4) throw std::invalid_argument("Zd: dimension must be in 1..4");
  return Group(Family::kZd, d);
}
Group Group::heisenberg() { return Group(Family::kHeisenberg, 3); }
Group Group::lamplighter() { return Group(Family::kLamplighter, 3); }

std::string Group::name() const {
  switch (family_) {
    case Family::kZd: return "Z" + std::to_string(dim_);
    case Family::kHeisenberg: return "heisenberg";
    case Family::kLamplighter: return "lamplighter";
  }
  return "?";
}

Element Group::mul(const Element& a, const Element& b) const {
  Element r;
  switch (family_) {
    case Family::kZd:
      for (int i = 0; i < dim_; ++i) r.c[i] = a.c[i] + b.c[i];
      return r;
    case Family::kHeisenberg:
      r.c[0] = a.c[0] + b.c[0];
      r.c[1] = a.c[1] + b.c[1];
      r.c[2] = a.c[2] + b.c[2] + a.c[0] * b.c[1];
      return r;
    case Family::kLamplighter:
      // (f,p)(f',p') = (f' xor (f shifted by p'), p + p'): the walker moves
      // and toggles by left multiplication.
      set_lamp_mask(r, lamp_mask(b) ^ shift_lamps(lamp_mask(a), b.c[2]));
      r.c[2] = a.c[2] + b.c[2];
      return r;
  }
  return r;
}

Element Group::inv(const Element& a) const {
  Element r;
  switch (family_) {
    case Family::kZd:
      for (int i = 0; i < dim_; ++i) r.c[i] = -a.c[i];
      return r;
    case Family::kHeisenberg:
      r.c[0] = -a.c[0];
      r.c[1] = -a.c[1];
      r.c[2] = -a.c[2] + a.c[0] * a.c[1];
      return r;
    case Family::kLamplighter:
      set_lamp_mask(r, shift_lamps(lamp_mask(a), -a.c[2]));
      r.c[2] = -a.c[2];
      return r;
  }
  return r;
}

std::vector<Element> Group::generators() const {
  std::vector<Element> gens;
  switch (family_) {
    case Family::kZd:
      for (int i = 0; i < dim_; ++i) {
        Element p, m;
        p.c[i] = 1;
        m.c[i] = -1;
        gens.push_back(p);
        gens.push_back(m);
      }
      break;
    case Family::kHeisenberg:
      gens = {heis(1, 0, 0), heis(-1, 0, 0), heis(0, 1, 0), heis(0, -1, 0)};
      break;
    case Family::kLamplighter:
      gens = {lamp({}, 1), lamp({}, -1), lamp({0}, 0)};
      break;
  }
  return gens;
}

Element Group::point(std::initializer_list<int64_t> coords) const {
  if (static_cast<int>(coords.size()) != dim_ || family_ == Family::kLamplighter)
    throw std::invalid_argument("point: coordinate count does not match group");
  Element e;
  int i = 0;
  for (int64_t v : coords) e.c[i++] = v;
  return e;
}

Element Group::heis(int64_t x, int64_t y, int64_t z) const {
  Element e;
  e.c = {x, y, z, 0};
  return e;
}

Element Group::lamp(const std::vector<int64_t>& lit, int64_t pos) const {
  u128 m = 0;
  for (int64_t s : lit) {
    if (s < -kLampOffset || s >= kLampOffset)
      throw std::overflow_error("lamplighter: lamp site outside [-64, 63]");
    m ^= static_cast<u128>(1) << (s + kLampOffset);
  }
  Element e;
  set_lamp_mask(e, m);
  e.c[2] = pos;
  return e;
}

std::vector<int64_t> Group::lit_sites(const Element& e) const {
  std::vector<int64_t> out;
  const u128 m = lamp_mask(e);
  for (int b = 0; b < 128; ++b)
    if ((m >> b) & 1) out.push_back(b - kLampOffset);
  return out;
}

std::vector<int64_t> Group::coords(const Element& e) const {
  if (family_ == Family::kLamplighter) {
    std::vector<int64_t> v{e.c[2]};
    for (int64_t s : lit_sites(e)) v.push_back(s);
    return v;
  }
  return std::vector<int64_t>(e.c.begin(), e.c.begin() + dim_);
}

Element Group::from_coords(const std::vector<int64_t>& v) const {
  if (family_ == Family::kLamplighter) {
    if (v.empty()) throw std::invalid_argument("lamplighter element needs a position");
    return lamp(std::vector<int64_t>(v.begin() + 1, v.end()), v[0]);
  }
  if (static_cast<int>(v.size()) != dim_)
    throw std::invalid_argument("element has " + std::to_string(v.size()) +
                                " coordinates, expected " + std::to_string(dim_));
  Element e;
  std::copy(v.begin(), v.end(), e.c.begin());
  return e;
}

std::string Group::format(const Element& e) const {
  std::ostringstream os;
  if (family_ == Family::kLamplighter) {
    os << "({";
    const auto lit = lit_sites(e);
    for (size_t i = 0; i < lit.size(); ++i) os << (i ? "," : "") << lit[i];
    os << "}," << e.c[2] << ")";
    return os.str();
  }
  os << "(";
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << e.c[i];
  os << ")";
  return os.str();
}

FiniteGroupSet::FiniteGroupSet(std::vector<Element> elems) : elems_(std::move(elems)) {
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

FiniteGroupSet::FiniteGroupSet(std::initializer_list<Element> elems)
    : FiniteGroupSet(std::vector<Element>(elems)) {}

FiniteGroupSet FiniteGroupSet::from_sorted(std::vector<Element> sorted_unique) {
  FiniteGroupSet s;
  s.elems_ = std::move(sorted_unique);
  return s;
}

bool FiniteGroupSet::contains(const Element& e) const {
  return std::binary_search(elems_.begin(), elems_.end(), e);
}

FiniteGroupSet set_union(const FiniteGroupSet& a, const FiniteGroupSet& b) {
  std::vector<Element> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteGroupSet::from_sorted(std::move(out));
}

FiniteGroupSet set_intersection(const FiniteGroupSet& a, const FiniteGroupSet& b) {
  std::vector<Element> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteGroupSet::from_sorted(std::move(out));
}

FiniteGroupSet set_difference(const FiniteGroupSet& a, const FiniteGroupSet& b) {
  std::vector<Element> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteGroupSet::from_sorted(std::move(out));
}

bool is_subset(const FiniteGroupSet& a, const FiniteGroupSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

SetIndex::SetIndex(const Group& g, const FiniteGroupSet& s) : size_(s.size()) {
  if (g.family() == Family::kZd && !s.empty()) {
    const Box b = bounding_box(s, g.dim());
    long double vol = 1;
    for (int i = 0; i < g.dim(); ++i) vol *= static_cast<long double>(b.hi[i] - b.lo[i] + 1);
    if (vol == static_cast<long double>(s.size())) {
      box_ = true;
      dim_ = g.dim();
      int64_t stride = 1;
      for (int i = dim_ - 1; i >= 0; --i) {
        lo_[i] = b.lo[i];
        ext_[i] = b.hi[i] - b.lo[i] + 1;
        stride_[i] = stride;
        stride *= ext_[i];
      }
      return;
    }
  }
  map_.reserve(s.size() * 2);
  for (size_t i = 0; i < s.size(); ++i) map_.emplace(s[i], static_cast<int64_t>(i));
}

int64_t SetIndex::find(const Element& e) const {
  if (box_) {
    int64_t r = 0;
    for (int i = 0; i < dim_; ++i) {
      const int64_t off = e.c[i] - lo_[i];
      if (off < 0 || off >= ext_[i]) return -1;
      r += off * stride_[i];
    }
    return r;
  }
  auto it = map_.find(e);
  return it == map_.end() ? -1 : it->second;
}

FiniteGroupSet right_translate(const Group& g, const FiniteGroupSet& a, const Element& x) {
  std::vector<Element> out;
  out.reserve(a.size());
  for (const auto& e : a) out.push_back(g.mul(e, x));
  return FiniteGroupSet(std::move(out));
}

FiniteGroupSet left_translate(const Group& g, const Element& x, const FiniteGroupSet& a) {
  std::vector<Element> out;
  out.reserve(a.size());
  for (const auto& e : a) out.push_back(g.mul(x, e));
  return FiniteGroupSet(std::move(out));
}

FiniteGroupSet inverse_set(const Group& g, const FiniteGroupSet& a) {
  std::vector<Element> out;
  out.reserve(a.size());
  for (const auto& e : a) out.push_back(g.inv(e));
  return FiniteGroupSet(std::move(out));
}

FiniteGroupSet product_set(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                           Exec exec) {
  if (k.empty() || t.empty()) return {};
  if (g.family() == Family::kZd) {
    // Dense marks over the bounding box of K + T when it is small enough.
    const int d = g.dim();
    const Box bk = bounding_box(k, d), bt = bounding_box(t, d);
    Box br;
    long double vol = 1;
    std::array<int64_t, 4> ext{}, stride{};
    for (int i = 0; i < d; ++i) {
      br.lo[i] = bk.lo[i] + bt.lo[i];
      br.hi[i] = bk.hi[i] + bt.hi[i];
      ext[i] = br.hi[i] - br.lo[i] + 1;
      vol *= static_cast<long double>(ext[i]);
    }
    if (vol <= static_cast<long double>(1 << 27)) {
      int64_t s = 1;
      for (int i = d - 1; i >= 0; --i) {
        stride[i] = s;
        s *= ext[i];
      }
      std::vector<uint8_t> mark(static_cast<size_t>(s), 0);
      for (const auto& a : k)
        for (const auto& b : t) {
          int64_t r = 0;
          for (int i = 0; i < d; ++i) r += (a.c[i] + b.c[i] - br.lo[i]) * stride[i];
          mark[r] = 1;
        }
      std::vector<Element> out;
      for (int64_t r = 0; r < s; ++r) {
        if (!mark[r]) continue;
        Element e;
        int64_t rem = r;
        for (int i = 0; i < d; ++i) {
          e.c[i] = br.lo[i] + rem / stride[i];
          rem %= stride[i];
        }
        out.push_back(e);
      }
      return FiniteGroupSet::from_sorted(std::move(out));
    }
  }
  const int64_t nk = static_cast<int64_t>(k.size());
  if (exec == Exec::kParallel) {
    std::vector<std::vector<Element>> parts(omp_get_max_threads());
#pragma omp parallel
    {
      std::unordered_set<Element, ElementHash> local;
#pragma omp for schedule(static)
      for (int64_t i = 0; i < nk; ++i)
        for (const auto& b : t) local.insert(g.mul(k[i], b));
      parts[omp_get_thread_num()].assign(local.begin(), local.end());
    }
    std::vector<Element> all;
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return FiniteGroupSet(std::move(all));
  }
  std::unordered_set<Element, ElementHash> acc;
  for (const auto& a : k)
    for (const auto& b : t) acc.insert(g.mul(a, b));
  return FiniteGroupSet(std::vector<Element>(acc.begin(), acc.end()));
}

namespace {

// Zd boundary by hit counting: |Kx n T| is a sum over runs of K along the
// last axis, each run read off row prefix sums of T. Returns false when the
// dense grids would be too large or slower than the direct scan.
bool zd_boundary_by_counts(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                           Exec exec, std::vector<Element>* out) {
  const int d = g.dim();
  const int last = d - 1;
  struct Run {
    std::array<int64_t, 4> a{};
    int64_t s, e;
  };
  std::vector<Run> runs;
  for (const auto& e : k) {
    if (!runs.empty()) {
      Run& r = runs.back();
      bool same = r.e + 1 == e.c[last];
      for (int i = 0; i < last && same; ++i) same = r.a[i] == e.c[i];
      if (same) {
        r.e = e.c[last];
        continue;
      }
    }
    Run r;
    for (int i = 0; i < last; ++i) r.a[i] = e.c[i];
    r.s = r.e = e.c[last];
    runs.push_back(r);
  }
  const Box bk = bounding_box(k, d), bt = bounding_box(t, d);
  std::array<int64_t, 4> xlo{}, xext{}, text{};
  long double xvol = 1, tvol = 1;
  for (int i = 0; i < d; ++i) {
    xlo[i] = bt.lo[i] - bk.hi[i];
    xext[i] = bt.hi[i] - bk.lo[i] - xlo[i] + 1;
    text[i] = bt.hi[i] - bt.lo[i] + 1;
    xvol *= xext[i];
    tvol *= text[i];
  }
  const long double limit = static_cast<long double>(1 << 27);
  if (xvol > limit || tvol > limit) return false;
  if (xvol * runs.size() > 4.0L * k.size() * t.size()) return false;

  // prefix[row * (text_last + 1) + j] = #T points in the row with last coordinate < lo + j.
  int64_t trows = 1;
  for (int i = 0; i < last; ++i) trows *= text[i];
  const int64_t tw = text[last] + 1;
  std::vector<int32_t> prefix(static_cast<size_t>(trows * tw), 0);
  for (const auto& e : t) {
    int64_t row = 0;
    for (int i = 0; i < last; ++i) row = row * text[i] + (e.c[i] - bt.lo[i]);
    prefix[row * tw + (e.c[last] - bt.lo[last]) + 1] = 1;
  }
  for (int64_t row = 0; row < trows; ++row)
    for (int64_t j = 1; j < tw; ++j) prefix[row * tw + j] += prefix[row * tw + j - 1];

  int64_t xrows = 1;
  for (int i = 0; i < last; ++i) xrows *= xext[i];
  const int64_t full = static_cast<int64_t>(k.size());
  std::vector<std::vector<Element>> rows(static_cast<size_t>(xrows));
  auto do_row = [&](int64_t xr) {
    std::array<int64_t, 4> x{};
    int64_t rem = xr;
    for (int i = last - 1; i >= 0; --i) {
      x[i] = xlo[i] + rem % xext[i];
      rem /= xext[i];
    }
    // Row offsets into the T grid for each run, or -1 if the row misses T.
    std::vector<int64_t> base(runs.size());
    for (size_t r = 0; r < runs.size(); ++r) {
      int64_t row = 0;
      bool ok = true;
      for (int i = 0; i < last; ++i) {
        const int64_t c = x[i] + runs[r].a[i] - bt.lo[i];
        if (c < 0 || c >= text[i]) {
          ok = false;
          break;
        }
        row = row * text[i] + c;
      }
      base[r] = ok ? row * tw : -1;
    }
    auto& outrow = rows[xr];
    for (int64_t j = 0; j < xext[last]; ++j) {
      const int64_t xl = xlo[last] + j;
      int64_t hits = 0;
      for (size_t r = 0; r < runs.size(); ++r) {
        if (base[r] < 0) continue;
        const int64_t u = std::clamp<int64_t>(xl + runs[r].s - bt.lo[last], 0, text[last]);
        const int64_t v = std::clamp<int64_t>(xl + runs[r].e - bt.lo[last] + 1, 0, text[last]);
        hits += prefix[base[r] + v] - prefix[base[r] + u];
      }
      if (hits > 0 && hits < full) {
        Element e;
        for (int i = 0; i < last; ++i) e.c[i] = x[i];
        e.c[last] = xl;
        outrow.push_back(e);
      }
    }
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t xr = 0; xr < xrows; ++xr) do_row(xr);
  } else {
    for (int64_t xr = 0; xr < xrows; ++xr) do_row(xr);
  }
  out->clear();
  for (auto& r : rows) out->insert(out->end(), r.begin(), r.end());
  return true;
}

}  // namespace

FiniteGroupSet k_boundary(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                          Exec exec) {
  if (k.empty() || t.empty()) throw std::invalid_argument("k_boundary: K and T must be nonempty");
  if (g.family() == Family::kZd) {
    std::vector<Element> out;
    if (zd_boundary_by_counts(g, k, t, exec, &out)) return FiniteGroupSet::from_sorted(std::move(out));
  }
  return k_boundary_scan(g, k, t, exec);
}

FiniteGroupSet k_boundary_scan(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                               Exec exec) {
  if (k.empty() || t.empty()) throw std::invalid_argument("k_boundary: K and T must be nonempty");
  const FiniteGroupSet cand = product_set(g, inverse_set(g, k), t, exec);
  const SetIndex idx(g, t);
  return boundary_scan(
      g, k, cand.elements(), [&](const Element& e) { return idx.contains(e); }, exec);
}

FiniteGroupSet k_boundary_of_complement(const Group& g, const FiniteGroupSet& k,
                                        const FiniteGroupSet& t) {
  if (k.empty() || t.empty()) throw std::invalid_argument("k_boundary: K and T must be nonempty");
  const SetIndex idx(g, t);
  std::function<bool(const Element&)> in_complement = [&](const Element& e) {
    return !idx.contains(e);
  };
  // A boundary point of the complement has Kx meeting T, so K^-1 T covers it.
  const FiniteGroupSet cand = product_set(g, inverse_set(g, k), t, Exec::kSerial);
  return boundary_scan(g, k, cand.elements(), in_complement, Exec::kSerial);
}

double invariance_ratio(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                        Exec exec) {
  if (t.empty()) throw std::invalid_argument("invariance_ratio: T must be nonempty");
  if (k.empty()) throw std::invalid_argument("invariance_ratio: K must be nonempty");
  return static_cast<double>(k_boundary(g, k, t, exec).size()) / static_cast<double>(t.size());
}

FiniteGroupSet FolnerSequence::operator()(int n) const {
  if (n < 1) throw std::invalid_argument("Folner index must be >= 1");
  const Group& g = group;
  std::vector<Element> out;
  if (kind == FolnerKind::kTrivial) return FiniteGroupSet{g.identity()};
  switch (g.family()) {
    case Family::kZd: {
      const int d = g.dim();
      int64_t total = 1;
      for (int i = 0; i < d; ++i) total *= n;
      out.reserve(total);
      for (int64_t r = 0; r < total; ++r) {
        Element e;
        int64_t rem = r;
        for (int i = d - 1; i >= 0; --i) {
          e.c[i] = rem % n;
          rem /= n;
        }
        out.push_back(e);
      }
      return FiniteGroupSet::from_sorted(std::move(out));
    }
    case Family::kHeisenberg: {
      const int64_t m = static_cast<int64_t>(n) * n;
      for (int64_t x = -n; x <= n; ++x)
        for (int64_t y = -n; y <= n; ++y)
          for (int64_t z = -m; z <= m; ++z) out.push_back(g.heis(x, y, z));
      return FiniteGroupSet::from_sorted(std::move(out));
    }
    case Family::kLamplighter: {
      if (n > 10) throw std::invalid_argument("lamplighter box index above 10 is too large");
      const int sites = 2 * n + 1;
      for (int64_t mask = 0; mask < (int64_t{1} << sites); ++mask) {
        std::vector<int64_t> lit;
        for (int b = 0; b < sites; ++b)
          if ((mask >> b) & 1) lit.push_back(b - n);
        for (int64_t p = -n; p <= n; ++p) out.push_back(g.lamp(lit, p));
      }
      return FiniteGroupSet(std::move(out));
    }
  }
  return {};
}

std::string FolnerSequence::name() const {
  return group.name() + (kind == FolnerKind::kTrivial ? "-trivial" : "-box");
}

FolnerSequence folner_generator(const Group& g, FolnerKind kind) {
  FolnerSequence s;
  s.group = g;
  s.kind = kind;
  s.nested = true;
  s.strong = true;
  // Box sequences in Zd are tempered by the closed-form union count; the
  // other families are not declared tempered.
  s.tempered = kind == FolnerKind::kTrivial || g.family() == Family::kZd;
  return s;
}

FolnerSequence folner_generator(const Group& g, const std::string& tag) {
  if (tag == "box") return folner_generator(g, FolnerKind::kBox);
  if (tag == "trivial") return folner_generator(g, FolnerKind::kTrivial);
  throw std::invalid_argument("unsupported Folner family tag: " + tag);
}

GrowthConstants growth_constants(const FolnerSequence& seq, int n_max) {
  if (n_max < 2) throw std::invalid_argument("growth_constants: N must be >= 2");
  const Group& g = seq.group;
  GrowthConstants gc;
  std::vector<FiniteGroupSet> inv;
  for (int m = 1; m <= n_max; ++m) {
    const FiniteGroupSet sm = seq(m);
    inv.push_back(inverse_set(g, sm));
    FiniteGroupSet below;  // union over i < m
    if (m >= 2) {
      if (seq.nested) {
        below = product_set(g, inv[m - 2], sm);
      } else {
        for (int i = 0; i + 1 < m; ++i) below = set_union(below, product_set(g, inv[i], sm));
      }
    }
    const FiniteGroupSet upto = seq.nested ? product_set(g, inv[m - 1], sm)
                                           : set_union(below, product_set(g, inv[m - 1], sm));
    const double size = static_cast<double>(sm.size());
    gc.tempelman = std::max(gc.tempelman, static_cast<double>(upto.size()) / size);
    gc.shulman = std::max(gc.shulman, static_cast<double>(below.size()) / size);
  }
  return gc;
}

Metric default_metric(const Group& g) {
  return g.family() == Family::kZd ? Metric::kSup : Metric::kWord;
}

FiniteGroupSet metric_ball(const Group& g, double r, Metric m) {
  if (r < 0 || std::isnan(r)) throw std::invalid_argument("metric radius must be >= 0");
  const int64_t rad = static_cast<int64_t>(std::floor(r));
  if (m == Metric::kSup) {
    if (g.family() != Family::kZd) throw std::invalid_argument("sup metric needs a Zd group");
    const int d = g.dim();
    const int64_t side = 2 * rad + 1;
    int64_t total = 1;
    for (int i = 0; i < d; ++i) total *= side;
    std::vector<Element> out;
    out.reserve(total);
    for (int64_t idx = 0; idx < total; ++idx) {
      Element e;
      int64_t rem = idx;
      for (int i = d - 1; i >= 0; --i) {
        e.c[i] = rem % side - rad;
        rem /= side;
      }
      out.push_back(e);
    }
    return FiniteGroupSet::from_sorted(std::move(out));
  }
  std::unordered_set<Element, ElementHash> seen{g.identity()};
  std::vector<Element> frontier{g.identity()};
  const auto gens = g.generators();
  for (int64_t step = 0; step < rad; ++step) {
    std::vector<Element> next;
    for (const auto& x : frontier)
      for (const auto& s : gens) {
        const Element y = g.mul(s, x);
        if (seen.insert(y).second) next.push_back(y);
      }
    frontier = std::move(next);
  }
  return FiniteGroupSet(std::vector<Element>(seen.begin(), seen.end()));
}

MetricBoundary metric_boundary(const Group& g, const FiniteGroupSet& q, double r, Metric m) {
  const FiniteGroupSet ball = metric_ball(g, r, m);
  MetricBoundary mb;
  if (q.empty()) return mb;
  const SetIndex idx(g, q);
  std::vector<Element> interior;
  for (const auto& x : q) {
    bool inside = true;
    for (const auto& b : ball)
      if (!idx.contains(g.mul(b, x))) {
        inside = false;
        break;
      }
    if (inside) interior.push_back(x);
  }
  mb.interior = FiniteGroupSet::from_sorted(std::move(interior));
  mb.closure = product_set(g, ball, q);
  mb.boundary = set_difference(mb.closure, mb.interior);
  return mb;
}

}  // namespace amen
