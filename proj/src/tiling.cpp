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

#include "amen/tiling.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace amen {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_basis(const Group& g, const std::vector<FiniteGroupSet>& basis, const TilingParams& p) {
  if (static_cast<int>(basis.size()) != p.N)
    throw std::invalid_argument("basis has " + std::to_string(basis.size()) + " sets, expected N=" +
                                std::to_string(p.N));
  if (basis.empty() || !basis[0].contains(g.identity()))
    throw std::invalid_argument("basis: T_1 must contain the identity");
  for (size_t i = 1; i < basis.size(); ++i)
    if (!is_subset(basis[i - 1], basis[i]))
      throw std::invalid_argument("basis is not nested at T_" + std::to_string(i + 1));
}

// Smallest n in [lo, max_index] with pred(n), for predicates that stay true
// once they hold along the sequence.
int smallest_index(int lo, int max_index, const std::function<bool(int)>& pred,
                   const std::string& what) {
  if (lo > max_index) throw NeedsLargerPrefix(what + ": prefix exhausted", lo);
  if (pred(lo)) return lo;
  int bad = lo;
  int good = -1;
  int64_t step = 1;
  while (good < 0) {
    const int64_t next = std::min<int64_t>(static_cast<int64_t>(bad) + step, max_index);
    if (pred(static_cast<int>(next))) {
      good = static_cast<int>(next);
    } else {
      if (next == max_index) throw NeedsLargerPrefix(what + ": prefix exhausted", max_index);
      bad = static_cast<int>(next);
      step *= 2;
    }
  }
  while (good - bad > 1) {
    const int mid = bad + (good - bad) / 2;
    if (pred(mid)) good = mid;
    else bad = mid;
  }
  return good;
}

// Tile elements with the identity first: most rejections happen at the center.
std::vector<Element> center_first(const Group& g, const FiniteGroupSet& tile) {
  std::vector<Element> v;
  v.reserve(tile.size());
  v.push_back(g.identity());
  for (const auto& e : tile)
    if (e != g.identity()) v.push_back(e);
  return v;
}

}  // namespace

int tile_count(double epsilon) {
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
  return static_cast<int>(std::ceil(std::log(epsilon) / std::log1p(-epsilon)));
}

TilingParams tiling_params(double epsilon, double beta, double zeta, bool strict) {
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
  if (epsilon > 0.5) throw std::invalid_argument("epsilon above 1/2 is not supported");
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
  if (!(zeta > 0)) throw std::invalid_argument("zeta must be positive");
  TilingParams p;
  p.epsilon = epsilon;
  p.beta = beta;
  p.zeta = zeta;
  p.strict = strict;
  p.N = tile_count(epsilon);
  p.eta.resize(p.N);
  for (int i = 1; i <= p.N; ++i) p.eta[i - 1] = epsilon * std::pow(1 - epsilon, p.N - i);
  p.delta0 = std::pow(6.0, -p.N) * beta / 4;
  if (strict) {
    const double cap = std::ldexp(epsilon, -p.N);
    if (epsilon > 0.1) throw std::invalid_argument("strict mode: epsilon must be <= 1/10");
    if (beta >= cap) throw std::invalid_argument("strict mode: beta must be < 2^-N epsilon");
    if (zeta >= cap) throw std::invalid_argument("strict mode: zeta must be < 2^-N epsilon");
  }
  return p;
}

EpsDisjointResult is_eps_disjoint(const std::vector<FiniteGroupSet>& family, double epsilon) {
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
  if (family.empty()) throw std::invalid_argument("is_eps_disjoint: empty family");
  EpsDisjointResult res;
  std::unordered_set<Element, ElementHash> seen;
  bool greedy_ok = true;
  for (const auto& a : family) {
    std::vector<Element> core;
    for (const auto& e : a)
      if (!seen.count(e)) core.push_back(e);
    if (static_cast<double>(core.size()) < (1 - epsilon) * static_cast<double>(a.size())) {
      greedy_ok = false;
      break;
    }
    res.cores.push_back(FiniteGroupSet::from_sorted(std::move(core)));
    seen.insert(a.begin(), a.end());
  }
  if (greedy_ok) return res;
  res.cores.clear();
  res.verdict = DisjointVerdict::kGreedyUndecided;
  // Disjoint cores force |A n B| <= |A \ core A| + |B \ core B| <= eps (|A| + |B|).
  for (size_t i = 0; i < family.size(); ++i)
    for (size_t j = i + 1; j < family.size(); ++j) {
      const double both = static_cast<double>(set_intersection(family[i], family[j]).size());
      if (both > epsilon * static_cast<double>(family[i].size() + family[j].size())) {
        res.verdict = DisjointVerdict::kViolated;
        return res;
      }
    }
  return res;
}

double alpha_coverage(const FiniteGroupSet& a, const FiniteGroupSet& b) {
  if (b.empty()) throw std::invalid_argument("alpha_coverage: B must be nonempty");
  return static_cast<double>(set_intersection(a, b).size()) / static_cast<double>(b.size());
}

std::vector<FiniteGroupSet> select_basis(const FolnerSequence& seq, const TilingParams& params,
                                         const FiniteGroupSet& l, int max_index) {
  const Group& g = seq.group;
  if (!l.contains(g.identity())) throw std::invalid_argument("select_basis: L must contain the identity");
  if (!seq.nested) throw std::invalid_argument("select_basis: sequence must be nested");
  const double target = params.zeta * params.zeta;
  std::vector<FiniteGroupSet> basis;
  int prev = 1;
  for (int i = 1; i <= params.N; ++i) {
    int n = std::max(i, prev);
    for (;; ++n) {
      if (n > max_index)
        throw NeedsLargerPrefix("select_basis: no (L, zeta^2)-invariant set for T_" +
                                    std::to_string(i),
                                i);
      if (n == prev && !basis.empty()) {
        // Already known to be invariant.
        break;
      }
      if (invariance_ratio(g, l, seq(n)) < target) break;
    }
    basis.push_back(seq(n));
    prev = n;
  }
  return basis;
}

FiniteGroupSet QuasiTiling::translate(int i, size_t k) const {
  return right_translate(group, basis[i - 1], centers[i - 1][k]);
}

FiniteGroupSet QuasiTiling::covered() const {
  std::vector<Element> all;
  for (int i = 1; i <= params.N; ++i)
    for (const auto& c : centers[i - 1])
      for (const auto& t : basis[i - 1]) all.push_back(group.mul(t, c));
  return FiniteGroupSet(std::move(all));
}

QuasiTiling quasi_tile(const Group& g, const FiniteGroupSet& t,
                       const std::vector<FiniteGroupSet>& basis, const TilingParams& params,
                       const QuasiTileOptions& opts) {
  if (t.empty()) throw std::invalid_argument("quasi_tile: empty target");
  check_basis(g, basis, params);
  const int big_n = params.N;
  QuasiTiling q;
  q.group = g;
  q.target = t;
  q.basis = basis;
  q.params = params;
  q.centers.assign(big_n, {});

  if (opts.check_precondition) {
    const auto& top = basis[big_n - 1];
    const FiniteGroupSet k = product_set(g, top, inverse_set(g, top));
    q.precondition_ratio = invariance_ratio(g, k, t);
    if (q.precondition_ratio >= params.delta0) {
      const std::string msg = "target invariance ratio " + fmt_double(q.precondition_ratio) +
                              " wrt T_N T_N^-1 is not below delta0 = " +
                              fmt_double(params.delta0);
      if (params.strict) throw TilingError(msg);
      q.warnings.push_back(msg);
    }
  }

  const SetIndex idx(g, t);
  const size_t n = t.size();
  std::vector<uint16_t> owner(n, 0);  // 0 = free, else the stage that claimed the point
  const double eps = params.epsilon;

  for (int i = big_n; i >= 1; --i) {
    const auto tile = center_first(g, basis[i - 1]);
    const size_t size = tile.size();
    const size_t cap = static_cast<size_t>(std::floor(eps * static_cast<double>(size) + 1e-9));
    const size_t min_gain = size - cap;
    const double target = params.eta[i - 1] * static_cast<double>(n);
    std::vector<int64_t> pos(size);
    size_t stage = 0;
    bool stopped = false;
    for (const auto& c : t) {
      const double need = target - static_cast<double>(stage);
      if (need <= 0 || 2 * need <= static_cast<double>(min_gain)) {
        stopped = true;
        break;
      }
      size_t overlap = 0;
      bool ok = true;
      for (size_t j = 0; j < size; ++j) {
        const int64_t p = idx.find(g.mul(tile[j], c));
        if (p < 0 || (owner[p] != 0 && owner[p] != i)) {
          ok = false;
          break;
        }
        if (owner[p] == i && ++overlap > cap) {
          ok = false;
          break;
        }
        pos[j] = p;
      }
      if (!ok) continue;
      const size_t gain = size - overlap;
      // Closest approach: only take translates that move the stage density toward eta_i.
      if (static_cast<double>(gain) >= 2 * need) continue;
      for (size_t j = 0; j < size; ++j)
        if (owner[pos[j]] == 0) owner[pos[j]] = static_cast<uint16_t>(i);
      stage += gain;
      q.centers[i - 1].push_back(c);
    }
    StageReport rep;
    rep.stage = i;
    rep.placed = q.centers[i - 1].size();
    rep.density = static_cast<double>(stage) / static_cast<double>(n);
    rep.target = params.eta[i - 1];
    rep.exhausted = !stopped;
    q.stages.push_back(rep);
  }
  return q;
}

QuasiTiling disjointify(const QuasiTiling& tiling, const FiniteGroupSet& l, double zeta,
                        std::vector<CoreBoundaryViolation>* violations) {
  const Group& g = tiling.group;
  const int big_n = tiling.params.N;
  QuasiTiling out = tiling;
  out.cores.assign(big_n, {});
  std::unordered_set<Element, ElementHash> taken;
  const double eps = tiling.params.epsilon;
  for (int i = big_n; i >= 1; --i) {
    const auto& tile = tiling.basis[i - 1];
    const double limit = l.empty() ? 0
                                   : static_cast<double>(k_boundary(g, l, tile, Exec::kSerial).size()) +
                                         zeta * static_cast<double>(tile.size());
    for (const auto& c : tiling.centers[i - 1]) {
      std::vector<Element> core;
      std::vector<Element> image;
      image.reserve(tile.size());
      for (const auto& t : tile) {
        const Element x = g.mul(t, c);
        if (!taken.count(x)) core.push_back(t);
        image.push_back(x);
      }
      if (static_cast<double>(core.size()) < (1 - eps) * static_cast<double>(tile.size()) - 1e-9)
        throw TilingError("core of stage " + std::to_string(i) + " center " + g.format(c) +
                          " has " + std::to_string(core.size()) + " points, below (1-eps)|T_i|");
      taken.insert(image.begin(), image.end());
      FiniteGroupSet cs = FiniteGroupSet::from_sorted(std::move(core));
      if (!l.empty() && violations) {
        const size_t b = k_boundary(g, l, cs, Exec::kSerial).size();
        if (static_cast<double>(b) > limit) violations->push_back({i, c, b, limit});
      }
      out.cores[i - 1].push_back(std::move(cs));
    }
  }
  return out;
}

bool TilingReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const Check* TilingReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

TilingReport verify_tiling(const QuasiTiling& q) {
  const Group& g = q.group;
  const int big_n = q.params.N;
  const double eps = q.params.epsilon;
  const double tsize = static_cast<double>(q.target.size());
  TilingReport rep;
  const SetIndex idx(g, q.target);

  // Containment of every translate.
  {
    Check c{"containment", true, 0, 0, ""};
    for (int i = 1; i <= big_n; ++i)
      for (const auto& ctr : q.centers[i - 1])
        for (const auto& t : q.basis[i - 1])
          if (!idx.contains(g.mul(t, ctr))) {
            if (c.pass) c.detail = "stage " + std::to_string(i) + " center " + g.format(ctr);
            c.pass = false;
            c.measured += 1;
            break;
          }
    rep.checks.push_back(c);
  }

  // Per stage: sequential overlap certificate and covered points.
  std::unordered_map<Element, int, ElementHash> owner;
  size_t clashes = 0;
  std::string clash_detail;
  std::vector<size_t> stage_size(big_n, 0);
  {
    Check c{"eps_disjoint", true, 0, eps, ""};
    for (int i = 1; i <= big_n; ++i) {
      std::unordered_set<Element, ElementHash> stage;
      const double tile = static_cast<double>(q.basis[i - 1].size());
      for (const auto& ctr : q.centers[i - 1]) {
        size_t overlap = 0;
        std::vector<Element> img;
        for (const auto& t : q.basis[i - 1]) {
          const Element x = g.mul(t, ctr);
          if (stage.count(x)) ++overlap;
          img.push_back(x);
        }
        const double frac = static_cast<double>(overlap) / tile;
        c.measured = std::max(c.measured, frac);
        if (frac > eps + 1e-12 && c.pass) {
          c.pass = false;
          c.detail = "greedy certificate fails at stage " + std::to_string(i) + " center " +
                     g.format(ctr);
        }
        stage.insert(img.begin(), img.end());
      }
      stage_size[i - 1] = stage.size();
      for (const auto& x : stage) {
        auto [it, fresh] = owner.emplace(x, i);
        if (!fresh) {
          if (clashes == 0)
            clash_detail = "stages " + std::to_string(it->second) + " and " + std::to_string(i) +
                           " share " + g.format(x);
          ++clashes;
        }
      }
    }
    rep.checks.push_back(c);
  }
  rep.checks.push_back(
      {"stage_disjoint", clashes == 0, static_cast<double>(clashes), 0, clash_detail});

  for (int i = 1; i <= big_n; ++i) {
    const double dens = static_cast<double>(stage_size[i - 1]) / tsize;
    const double dev = std::abs(dens - q.params.eta[i - 1]);
    rep.checks.push_back({"density stage " + std::to_string(i), dev < q.params.beta, dev,
                          q.params.beta,
                          "density " + fmt_double(dens) + " target " +
                              fmt_double(q.params.eta[i - 1])});
  }
  {
    double cover = 0;
    for (auto s : stage_size) cover += static_cast<double>(s);
    cover /= tsize;
    rep.checks.push_back({"coverage", cover >= 1 - 2 * eps, cover, 1 - 2 * eps, ""});
  }

  if (q.has_cores()) {
    Check sub{"core_subset", true, 0, 0, ""};
    Check big{"core_size", true, 1, 1 - eps, ""};
    Check dis{"core_disjoint", true, 0, 0, ""};
    std::unordered_set<Element, ElementHash> seen;
    size_t total = 0;
    for (int i = 1; i <= big_n; ++i) {
      const double tile = static_cast<double>(q.basis[i - 1].size());
      for (size_t k = 0; k < q.cores[i - 1].size(); ++k) {
        const auto& core = q.cores[i - 1][k];
        const Element& ctr = q.centers[i - 1][k];
        if (!is_subset(core, q.basis[i - 1])) {
          sub.pass = false;
          sub.measured += 1;
        }
        const double frac = static_cast<double>(core.size()) / tile;
        big.measured = std::min(big.measured, frac);
        if (frac < 1 - eps - 1e-12) big.pass = false;
        for (const auto& t : core) {
          if (!seen.insert(g.mul(t, ctr)).second) {
            dis.pass = false;
            dis.measured += 1;
          }
        }
        total += core.size();
      }
    }
    rep.checks.push_back(sub);
    rep.checks.push_back(big);
    rep.checks.push_back(dis);
    rep.checks.push_back({"core_partition", total == owner.size(), static_cast<double>(total),
                          static_cast<double>(owner.size()), ""});
  }
  return rep;
}

HullTiling tile_hull(const Group& g, const FiniteGroupSet& hull,
                     const std::vector<FiniteGroupSet>& background_basis,
                     const TilingParams& background_params,
                     const std::vector<FiniteGroupSet>& basis, const TilingParams& params) {
  HullTiling h;
  h.hull = hull;
  QuasiTileOptions no_pre;
  no_pre.check_precondition = false;
  h.background = disjointify(quasi_tile(g, hull, background_basis, background_params, no_pre),
                             FiniteGroupSet{g.identity()}, background_params.zeta);
  const SetIndex idx(g, hull);
  h.covered.assign(hull.size(), 0);
  h.center_stage.assign(hull.size(), 0);
  std::vector<std::vector<Element>> centers(params.N);
  for (int l = background_params.N; l >= 1; --l) {
    const auto& cs = h.background.centers[l - 1];
    for (size_t k = 0; k < cs.size(); ++k) {
      FiniteGroupSet p = right_translate(g, h.background.cores[l - 1][k], cs[k]);
      for (const auto& x : p) h.covered[idx.find(x)] = 1;
      const QuasiTiling inner = quasi_tile(g, p, basis, params, no_pre);
      for (int i = 1; i <= params.N; ++i)
        for (const auto& c : inner.centers[i - 1]) {
          centers[i - 1].push_back(c);
          h.center_stage[idx.find(c)] = static_cast<int8_t>(i);
        }
      h.core_sets.push_back(std::move(p));
    }
  }
  for (auto& v : centers) h.centers.emplace_back(std::move(v));
  return h;
}

namespace {

// Zd path: hits of P y in the hull and in the covered part are sums over runs
// of P along the last axis, read off row prefix sums.
bool zd_scan(const Group& g, const FiniteGroupSet& p, const HullTiling& h, double limit,
             Exec exec, IndexScan* out) {
  if (g.family() != Family::kZd) return false;
  const int d = g.dim();
  const int last = d - 1;
  std::array<int64_t, 4> lo{}, ext{};
  for (int i = 0; i < d; ++i) {
    lo[i] = INT64_MAX;
    int64_t hi = INT64_MIN;
    for (const auto& e : h.hull) {
      lo[i] = std::min(lo[i], e.c[i]);
      hi = std::max(hi, e.c[i]);
    }
    ext[i] = hi - lo[i] + 1;
  }
  long double vol = 1;
  for (int i = 0; i < d; ++i) vol *= ext[i];
  if (vol > static_cast<long double>(1 << 26)) return false;
  int64_t rows = 1;
  for (int i = 0; i < last; ++i) rows *= ext[i];
  const int64_t w = ext[last] + 1;
  std::vector<int32_t> in(static_cast<size_t>(rows * w), 0), cov(in.size(), 0);
  for (size_t j = 0; j < h.hull.size(); ++j) {
    const Element& e = h.hull[j];
    int64_t row = 0;
    for (int i = 0; i < last; ++i) row = row * ext[i] + (e.c[i] - lo[i]);
    const int64_t cell = row * w + (e.c[last] - lo[last]) + 1;
    in[cell] = 1;
    cov[cell] = h.covered[j];
  }
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t j = 1; j < w; ++j) {
      in[r * w + j] += in[r * w + j - 1];
      cov[r * w + j] += cov[r * w + j - 1];
    }
  struct Run {
    std::array<int64_t, 4> a{};
    int64_t s, e;
  };
  std::vector<Run> runs;
  for (const auto& e : p) {
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
  const Element p0inv = g.inv(p[0]);
  const int64_t n = static_cast<int64_t>(h.hull.size());
  std::vector<int64_t> miss(static_cast<size_t>(n), -1);  // -1: infeasible
  auto body = [&](int64_t j) {
    const Element y = g.mul(p0inv, h.hull[j]);
    int64_t m = 0;
    for (const auto& r : runs) {
      int64_t row = 0;
      for (int i = 0; i < last; ++i) {
        const int64_t c = r.a[i] + y.c[i] - lo[i];
        if (c < 0 || c >= ext[i]) return;
        row = row * ext[i] + c;
      }
      const int64_t u = r.s + y.c[last] - lo[last], v = r.e + y.c[last] - lo[last] + 1;
      if (u < 0 || v > ext[last]) return;
      const int64_t len = r.e - r.s + 1;
      if (in[row * w + v] - in[row * w + u] != len) return;
      m += len - (cov[row * w + v] - cov[row * w + u]);
    }
    miss[j] = m;
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (int64_t j = 0; j < n; ++j) body(j);
  } else {
    for (int64_t j = 0; j < n; ++j) body(j);
  }
  out->feasible = 0;
  const double psize = static_cast<double>(p.size());
  for (int64_t j = 0; j < n; ++j) {
    if (miss[j] < 0) continue;
    ++out->feasible;
    if (static_cast<double>(miss[j]) <= limit) {
      out->index.push_back(g.mul(p0inv, h.hull[j]));
      out->uncovered.push_back(static_cast<double>(miss[j]) / psize);
    }
  }
  return true;  // translation keeps the lexicographic order, so index is sorted
}

}  // namespace

IndexScan scan_index_family(const Group& g, const FiniteGroupSet& p, const HullTiling& h,
                            double threshold, Exec exec) {
  if (p.empty()) throw std::invalid_argument("scan_index_family: empty set");
  IndexScan fast;
  if (zd_scan(g, p, h, threshold * static_cast<double>(p.size()), exec, &fast)) return fast;
  return scan_index_family_direct(g, p, h, threshold, exec);
}

IndexScan scan_index_family_direct(const Group& g, const FiniteGroupSet& p, const HullTiling& h,
                                   double threshold, Exec exec) {
  if (p.empty()) throw std::invalid_argument("scan_index_family: empty set");
  const SetIndex idx(g, h.hull);
  const Element p0inv = g.inv(p[0]);
  const int64_t n = static_cast<int64_t>(h.hull.size());
  const double limit = threshold * static_cast<double>(p.size());
  struct Hit {
    Element e;
    double x;
  };
  std::vector<std::vector<Hit>> parts(exec == Exec::kParallel ? omp_get_max_threads() : 1);
  size_t feasible = 0;
  auto body = [&](int64_t j, std::vector<Hit>& out, size_t& feas) {
    const Element cand = g.mul(p0inv, h.hull[j]);
    size_t miss = 0;
    for (const auto& d : p) {
      const int64_t q = idx.find(g.mul(d, cand));
      if (q < 0) return;
      if (!h.covered[q]) ++miss;
    }
    ++feas;
    if (static_cast<double>(miss) <= limit)
      out.push_back({cand, static_cast<double>(miss) / static_cast<double>(p.size())});
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel reduction(+ : feasible)
    {
      auto& out = parts[omp_get_thread_num()];
#pragma omp for schedule(dynamic, 512)
      for (int64_t j = 0; j < n; ++j) body(j, out, feasible);
    }
  } else {
    for (int64_t j = 0; j < n; ++j) body(j, parts[0], feasible);
  }
  std::vector<Hit> all;
  for (auto& v : parts) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) { return a.e < b.e; });
  IndexScan s;
  s.feasible = feasible;
  for (const auto& hit : all) {
    s.index.push_back(hit.e);
    s.uncovered.push_back(hit.x);
  }
  return s;
}

namespace {

struct Background {
  std::vector<FiniteGroupSet> basis;
  TilingParams params;
  int top_index = 0;  // first Folner index containing T_N
};

double default_eps1(const TilingParams& p) {
  return std::min(p.epsilon * p.epsilon / 100, p.beta * p.beta);
}

Background background_tiles(const FolnerSequence& seq, const FiniteGroupSet& top, double eps1,
                            double delta, const HullOptions& opts) {
  const Group& g = seq.group;
  Background b;
  const int m = tile_count(eps1);
  if (m > opts.max_levels)
    throw std::invalid_argument("background tiling needs " + std::to_string(m) +
                                " levels; pass a larger eps1");
  b.params = tiling_params(eps1, eps1, eps1, false);
  b.top_index = smallest_index(
      1, opts.max_index, [&](int n) { return is_subset(top, seq(n)); }, "background tiles");
  const FiniteGroupSet k = product_set(g, top, inverse_set(g, top));
  const int inv_index = smallest_index(
      b.top_index, opts.max_index, [&](int n) { return invariance_ratio(g, k, seq(n)) < delta; },
      "background tiles");
  for (int l = 1; l <= m; ++l) b.basis.push_back(seq(std::max(l, inv_index)));
  return b;
}

FiniteGroupSet pick_hull(const FolnerSequence& seq, const FiniteGroupSet& t, double delta,
                         int max_index) {
  const Group& g = seq.group;
  const FiniteGroupSet k = product_set(g, t, inverse_set(g, t));
  const int n = smallest_index(
      1, max_index, [&](int i) { return invariance_ratio(g, k, seq(i)) < delta; }, "hull");
  return seq(n);
}

std::vector<FiniteGroupSet> centers_through(const Group& g, const FiniteGroupSet& domain,
                                            const Element& shift, const HullTiling& h,
                                            const SetIndex& idx, int big_n) {
  std::vector<std::vector<Element>> out(big_n);
  for (const auto& d : domain) {
    const int64_t q = idx.find(g.mul(d, shift));
    if (q >= 0 && h.center_stage[q] > 0) out[h.center_stage[q] - 1].push_back(d);
  }
  std::vector<FiniteGroupSet> res;
  for (auto& v : out) res.push_back(FiniteGroupSet::from_sorted(std::move(v)));
  return res;
}

}  // namespace

std::vector<FiniteGroupSet> UniformFamily::centers_for(const Element& lambda) const {
  const SetIndex idx(group, hull.hull);
  return centers_through(group, target, lambda, hull, idx, params.N);
}

UniformFamily uniform_family(const Group& g, const FiniteGroupSet& t,
                             const std::vector<FiniteGroupSet>& basis, const TilingParams& params,
                             const FolnerSequence& seq, const HullOptions& opts) {
  if (t.empty()) throw std::invalid_argument("uniform_family: empty target");
  check_basis(g, basis, params);
  if (!(seq.group == g)) throw std::invalid_argument("uniform_family: sequence over another group");
  UniformFamily fam;
  fam.group = g;
  fam.target = t;
  fam.basis = basis;
  fam.params = params;
  fam.eps1 = opts.eps1 > 0 ? opts.eps1 : default_eps1(params);
  const double bg_delta = opts.background_delta > 0 ? opts.background_delta : fam.eps1;
  const double hull_delta = opts.hull_delta > 0 ? opts.hull_delta : fam.eps1;

  const auto& top = basis.back();
  const Background bg = background_tiles(seq, top, fam.eps1, bg_delta, opts);
  {
    const FiniteGroupSet sj = seq(bg.top_index);
    const double r = invariance_ratio(g, product_set(g, sj, inverse_set(g, sj)), t);
    if (r >= params.delta0) {
      const std::string msg = "target invariance ratio " + fmt_double(r) +
                              " wrt S_J S_J^-1 is not below delta0 = " + fmt_double(params.delta0);
      if (params.strict) throw TilingError(msg);
      fam.warnings.push_back(msg);
    }
  }
  const FiniteGroupSet hull = pick_hull(seq, t, hull_delta, opts.max_index);
  fam.hull = tile_hull(g, hull, bg.basis, bg.params, basis, params);

  const IndexScan scan = scan_index_family(g, t, fam.hull, std::sqrt(fam.eps1));
  fam.a_size = scan.feasible;
  if (scan.index.empty()) {
    const IndexScan all = scan_index_family(g, t, fam.hull, 1.0);
    double lo = 1, hi = 0;
    for (double x : all.uncovered) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    throw TilingError("uniform_family: empty index family; uncovered fractions range over [" +
                      fmt_double(lo) + ", " + fmt_double(hi) + "] against sqrt(eps1) = " +
                      fmt_double(std::sqrt(fam.eps1)));
  }
  fam.lambda = scan.index;
  fam.uncovered = scan.uncovered;
  for (int i = 1; i <= params.N; ++i)
    fam.gamma.push_back(static_cast<double>(fam.hull.centers[i - 1].size()) /
                        static_cast<double>(hull.size()));
  return fam;
}

TilingReport verify_tiling(const UniformFamily& fam, const std::vector<FiniteGroupSet>& windows) {
  const Group& g = fam.group;
  const int big_n = fam.params.N;
  const double eps = fam.params.epsilon;
  const double tsize = static_cast<double>(fam.target.size());
  const SetIndex hidx(g, fam.hull.hull);
  const SetIndex tidx(g, fam.target);
  const int64_t nl = static_cast<int64_t>(fam.lambda.size());
  const size_t nw = windows.size();
  for (const auto& w : windows)
    if (!is_subset(w, fam.target)) throw std::invalid_argument("window is not inside the target");
  // Window membership per target position.
  std::vector<std::vector<uint8_t>> in_window(nw, std::vector<uint8_t>(fam.target.size(), 0));
  for (size_t w = 0; w < nw; ++w)
    for (const auto& e : windows[w]) in_window[w][tidx.find(e)] = 1;

  size_t outside = 0;
  double min_cover = 1;
  Element worst{};
  // counts[w * N + i] = sum over lambda of card(C_i^lambda n S_w).
  std::vector<int64_t> counts(nw * big_n, 0);

#pragma omp parallel
  {
    std::vector<int64_t> local(nw * big_n, 0);
    std::vector<uint8_t> mark(fam.target.size());
    size_t out_local = 0;
    double min_local = 1;
    Element worst_local{};
#pragma omp for schedule(dynamic, 64)
    for (int64_t j = 0; j < nl; ++j) {
      const Element& lam = fam.lambda[j];
      std::fill(mark.begin(), mark.end(), 0);
      size_t marked = 0;
      for (size_t di = 0; di < fam.target.size(); ++di) {
        const Element& d = fam.target[di];
        const int64_t q = hidx.find(g.mul(d, lam));
        if (q < 0) {
          ++out_local;
          continue;
        }
        const int i = fam.hull.center_stage[q];
        if (i == 0) continue;
        for (size_t w = 0; w < nw; ++w)
          if (in_window[w][di]) ++local[w * big_n + i - 1];
        // Only translates lying inside T count toward coverage of T.
        const auto& tile = fam.basis[i - 1];
        bool inside = true;
        for (const auto& s : tile)
          if (!tidx.contains(g.mul(s, d))) {
            inside = false;
            break;
          }
        if (!inside) continue;
        for (const auto& s : tile) {
          const int64_t p = tidx.find(g.mul(s, d));
          if (!mark[p]) {
            mark[p] = 1;
            ++marked;
          }
        }
      }
      const double cover = static_cast<double>(marked) / tsize;
      if (cover < min_local) {
        min_local = cover;
        worst_local = lam;
      }
    }
#pragma omp critical
    {
      for (size_t k = 0; k < local.size(); ++k) counts[k] += local[k];
      outside += out_local;
      if (min_local < min_cover || (min_local == min_cover && worst_local < worst)) {
        min_cover = min_local;
        worst = worst_local;
      }
    }
  }

  TilingReport rep;
  rep.checks.push_back({"index_in_hull", outside == 0, static_cast<double>(outside), 0, ""});
  rep.checks.push_back({"coverage", min_cover >= 1 - 4 * eps, min_cover, 1 - 4 * eps,
                        "worst index " + g.format(worst)});
  double weighted = 0;
  for (int i = 1; i <= big_n; ++i)
    weighted += fam.gamma[i - 1] * static_cast<double>(fam.basis[i - 1].size());
  rep.checks.push_back({"center_mass", weighted <= 2, weighted, 2, ""});

  for (int i = 1; i <= big_n; ++i) {
    const double ti = static_cast<double>(fam.basis[i - 1].size());
    const double limit = 4 * fam.params.beta / ti + 2 * eps * fam.gamma[i - 1];
    double worst_dev = 0;
    for (size_t w = 0; w < nw; ++w) {
      const double mean = static_cast<double>(counts[w * big_n + i - 1]) /
                          static_cast<double>(nl) / tsize;
      const double expect =
          fam.params.eta[i - 1] * static_cast<double>(windows[w].size()) / (ti * tsize);
      worst_dev = std::max(worst_dev, std::abs(mean - expect));
    }
    if (nw > 0)
      rep.checks.push_back(
          {"window_density stage " + std::to_string(i), worst_dev < limit, worst_dev, limit, ""});
  }

  {
    const double e1 = fam.eps1;
    const double bound =
        (1 - 6 * std::sqrt(e1)) * (1 - e1) * static_cast<double>(fam.hull.hull.size());
    rep.checks.push_back({"index_size", static_cast<double>(nl) >= bound,
                          static_cast<double>(nl), bound, ""});
  }

  // C_i^lambda = T n hull_centers_i lambda^-1, second route through set algebra.
  {
    Check c{"centers_two_ways", true, 0, 0, ""};
    const int64_t samples = std::min<int64_t>(nl, 16);
    for (int64_t s = 0; s < samples; ++s) {
      const Element& lam = fam.lambda[(s * nl) / samples];
      const auto direct = fam.centers_for(lam);
      for (int i = 1; i <= big_n; ++i) {
        const FiniteGroupSet other = set_intersection(
            fam.target, right_translate(g, fam.hull.centers[i - 1], g.inv(lam)));
        if (!(other == direct[i - 1])) {
          c.pass = false;
          c.measured += 1;
          c.detail = "index " + g.format(lam);
        }
      }
    }
    rep.checks.push_back(c);
  }
  return rep;
}

std::vector<Element> tower_lambda(const Group& g, const FiniteGroupSet& u, const HullTiling& hull,
                                  double eps1) {
  return scan_index_family(g, u, hull, std::sqrt(eps1)).index;
}

std::vector<FiniteGroupSet> DecompositionTower::hull_centers_for(const Element& y) const {
  const SetIndex idx(group, reference.hull);
  std::vector<std::vector<Element>> out(params.N);
  for (const auto& p : hull.core_sets) {
    const auto part = centers_through(group, p, y, reference, idx, params.N);
    for (int i = 0; i < params.N; ++i) out[i].insert(out[i].end(), part[i].begin(), part[i].end());
  }
  std::vector<FiniteGroupSet> res;
  for (auto& v : out) res.emplace_back(std::move(v));
  return res;
}

std::vector<FiniteGroupSet> DecompositionTower::centers_for(const Element& y,
                                                            const Element& lambda) const {
  const auto hc = hull_centers_for(y);
  std::vector<FiniteGroupSet> res;
  for (const auto& c : hc) {
    std::vector<Element> v;
    for (const auto& d : target)
      if (c.contains(group.mul(d, lambda))) v.push_back(d);
    res.push_back(FiniteGroupSet::from_sorted(std::move(v)));
  }
  return res;
}

DecompositionTower decomposition_tower(const Group& g, const FiniteGroupSet& u,
                                       const std::vector<FiniteGroupSet>& basis,
                                       const TilingParams& params, const FolnerSequence& seq,
                                       double eta, const HullOptions& opts) {
  if (u.empty()) throw std::invalid_argument("decomposition_tower: empty target");
  check_basis(g, basis, params);
  DecompositionTower tw;
  tw.group = g;
  tw.target = u;
  tw.basis = basis;
  tw.params = params;
  tw.eps1 = opts.eps1 > 0 ? opts.eps1 : default_eps1(params);
  tw.eps2 = opts.eps2 > 0 ? opts.eps2 : tw.eps1 * tw.eps1;
  tw.eta = eta;
  if (!(eta > 0 && eta < tw.eps1 / 2))
    throw std::invalid_argument("decomposition_tower: eta must lie in (0, eps1/2)");
  const double bg_delta = opts.background_delta > 0 ? opts.background_delta : tw.eps1;

  const Background bg = background_tiles(seq, basis.back(), tw.eps1, bg_delta, opts);
  const FiniteGroupSet hull = pick_hull(seq, u, eta, opts.max_index);
  tw.hull = tile_hull(g, hull, bg.basis, bg.params, basis, params);

  // Lambda is fixed here, before the reference set or any y exists.
  tw.lambda = tower_lambda(g, u, tw.hull, tw.eps1);
  if (tw.lambda.empty()) throw TilingError("decomposition_tower: empty Lambda");

  // Reference set: invariant wrt the hull and the background tiles.
  const FiniteGroupSet kh = product_set(g, hull, inverse_set(g, hull));
  const FiniteGroupSet& big_tile = bg.basis.back();
  const FiniteGroupSet kb = product_set(g, big_tile, inverse_set(g, big_tile));
  const int ref_index = smallest_index(
      1, opts.max_index,
      [&](int n) {
        const FiniteGroupSet s = seq(n);
        return invariance_ratio(g, kh, s) < tw.eps2 && invariance_ratio(g, kb, s) < tw.eps2;
      },
      "reference set");
  tw.reference = tile_hull(g, seq(ref_index), bg.basis, bg.params, basis, params);

  // Upsilon = intersection over hull cores P of {y : P y in reference, X_P(y) <= sqrt(eps2)}.
  bool first = true;
  for (const auto& p : tw.hull.core_sets) {
    IndexScan part = scan_index_family(g, p, tw.reference, std::sqrt(tw.eps2));
    tw.upsilon_part_sizes.push_back(part.index.size());
    if (first) {
      tw.upsilon = std::move(part.index);
      first = false;
    } else {
      std::vector<Element> meet;
      std::set_intersection(tw.upsilon.begin(), tw.upsilon.end(), part.index.begin(),
                            part.index.end(), std::back_inserter(meet));
      tw.upsilon = std::move(meet);
    }
  }
  if (tw.upsilon.empty()) throw TilingError("decomposition_tower: empty Upsilon");
  return tw;
}

TilingReport verify_tiling(const DecompositionTower& tw, int samples) {
  const Group& g = tw.group;
  TilingReport rep;
  const SetIndex hidx(g, tw.hull.hull);
  const double hsize = static_cast<double>(tw.hull.hull.size());
  const double nl = static_cast<double>(tw.lambda.size());

  size_t outside = 0;
  for (const auto& lam : tw.lambda)
    for (const auto& d : tw.target)
      if (!hidx.contains(g.mul(d, lam))) {
        ++outside;
        break;
      }
  rep.checks.push_back({"index_in_hull", outside == 0, static_cast<double>(outside), 0, ""});
  const double beta = tw.params.beta;
  rep.checks.push_back({"index_size", nl >= (1 - beta) * hsize && nl <= hsize, nl / hsize,
                        1 - beta, "|Lambda|/|hull| against 1 - beta"});

  {
    const std::vector<Element> again = tower_lambda(g, tw.target, tw.hull, tw.eps1);
    rep.checks.push_back({"index_independent", again == tw.lambda,
                          static_cast<double>(again.size()), nl, ""});
  }

  {
    size_t smallest_ratio_ok = 0;
    double worst = 1e300;
    for (size_t s : tw.upsilon_part_sizes) {
      const double r = static_cast<double>(tw.upsilon.size()) / static_cast<double>(s);
      worst = std::min(worst, r);
      if (r >= 1 - tw.eps1) ++smallest_ratio_ok;
    }
    rep.checks.push_back({"upsilon_size", smallest_ratio_ok == tw.upsilon_part_sizes.size(), worst,
                          1 - tw.eps1, "min |Upsilon| / |Upsilon(l,c)|"});
  }

  {
    Check c{"centers_two_ways", true, 0, 0, ""};
    const size_t ny = tw.upsilon.size(), nlam = tw.lambda.size();
    const size_t sy = std::min<size_t>(ny, samples), sl = std::min<size_t>(nlam, samples);
    for (size_t a = 0; a < sy; ++a) {
      const Element& y = tw.upsilon[(a * ny) / sy];
      const auto hc = tw.hull_centers_for(y);
      for (size_t b = 0; b < sl; ++b) {
        const Element& lam = tw.lambda[(b * nlam) / sl];
        const auto direct = tw.centers_for(y, lam);
        for (int i = 0; i < tw.params.N; ++i) {
          const FiniteGroupSet other =
              set_intersection(tw.target, right_translate(g, hc[i], g.inv(lam)));
          if (!(other == direct[i])) {
            c.pass = false;
            c.measured += 1;
            c.detail = "y " + g.format(y) + " lambda " + g.format(lam);
          }
        }
      }
    }
    rep.checks.push_back(c);
  }
  return rep;
}

namespace {

using nlohmann::json;

json set_json(const Group& g, const FiniteGroupSet& s) {
  json a = json::array();
  for (const auto& e : s) a.push_back(g.coords(e));
  return a;
}

FiniteGroupSet set_from_json(const Group& g, const json& a) {
  std::vector<Element> v;
  for (const auto& c : a) v.push_back(g.from_coords(c.get<std::vector<int64_t>>()));
  return FiniteGroupSet(std::move(v));
}

Group group_from_name(const std::string& name) {
  if (name == "heisenberg") return Group::heisenberg();
  if (name == "lamplighter") return Group::lamplighter();
  if (name.size() == 2 && name[0] == 'Z' && name[1] >= '1' && name[1] <= '4')
    return Group::zd(name[1] - '0');
  throw std::invalid_argument("unknown group '" + name + "'");
}

}  // namespace

std::string tiling_to_json(const QuasiTiling& q) {
  const Group& g = q.group;
  json j;
  j["group"] = g.name();
  j["params"] = {{"epsilon", q.params.epsilon},
                 {"beta", q.params.beta},
                 {"zeta", q.params.zeta},
                 {"strict", q.params.strict}};
  j["target"] = set_json(g, q.target);
  j["basis"] = json::array();
  for (const auto& b : q.basis) j["basis"].push_back(set_json(g, b));
  j["centers"] = json::array();
  for (const auto& cs : q.centers) {
    json a = json::array();
    for (const auto& c : cs) a.push_back(g.coords(c));
    j["centers"].push_back(a);
  }
  if (q.has_cores()) {
    j["cores"] = json::array();
    for (const auto& stage : q.cores) {
      json a = json::array();
      for (const auto& core : stage) a.push_back(set_json(g, core));
      j["cores"].push_back(a);
    }
  }
  return j.dump();
}

QuasiTiling tiling_from_json(const std::string& text) {
  const json j = json::parse(text);
  QuasiTiling q;
  q.group = group_from_name(j.at("group").get<std::string>());
  const auto& p = j.at("params");
  q.params = tiling_params(p.at("epsilon").get<double>(), p.at("beta").get<double>(),
                           p.at("zeta").get<double>(), p.value("strict", false));
  q.target = set_from_json(q.group, j.at("target"));
  for (const auto& b : j.at("basis")) q.basis.push_back(set_from_json(q.group, b));
  for (const auto& cs : j.at("centers")) {
    std::vector<Element> v;
    for (const auto& c : cs) v.push_back(q.group.from_coords(c.get<std::vector<int64_t>>()));
    q.centers.push_back(std::move(v));
  }
  if (static_cast<int>(q.basis.size()) != q.params.N ||
      static_cast<int>(q.centers.size()) != q.params.N)
    throw std::invalid_argument("tiling document: basis and centers need N entries");
  if (j.contains("cores")) {
    for (const auto& stage : j.at("cores")) {
      std::vector<FiniteGroupSet> v;
      for (const auto& core : stage) v.push_back(set_from_json(q.group, core));
      q.cores.push_back(std::move(v));
    }
  }
  return q;
}

}  // namespace amen
