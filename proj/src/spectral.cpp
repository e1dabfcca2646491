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

#include "amen/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace amen {

bool SymMatrix::symmetric() const {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < i; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

double SymMatrix::norm_inf() const {
  double m = 0;
  for (int i = 0; i < n_; ++i) {
    double s = 0;
    for (int j = 0; j < n_; ++j) s += std::abs((*this)(i, j));
    m = std::max(m, s);
  }
  return m;
}

void SymMatrix::swap_index(int i, int j) {
  if (i == j) return;
  for (int k = 0; k < n_; ++k) std::swap((*this)(i, k), (*this)(j, k));
  for (int k = 0; k < n_; ++k) std::swap((*this)(k, i), (*this)(k, j));
}

// ---------------------------------------------------------------------------
// Ensembles and restriction.

double OperatorEnsemble::kernel_at(const Element& g) const {
  for (const auto& h : kernel)
    if (h.offset == g) return h.value;
  return 0;
}

void OperatorEnsemble::validate() const {
  if (group.family() != Family::kZd) throw std::invalid_argument("operator ensembles are supported on Z^d only");
  if (R < 1) throw std::invalid_argument("hopping range R must be >= 1");
  for (size_t i = 0; i < kernel.size(); ++i) {
    const auto& h = kernel[i];
    for (size_t j = 0; j < i; ++j)
      if (kernel[j].offset == h.offset) throw std::invalid_argument("kernel lists an offset twice");
    for (int k = 0; k < group.dim(); ++k)
      if (std::abs(h.offset.c[static_cast<size_t>(k)]) > R)
        throw std::invalid_argument("kernel support exceeds the hopping range R");
    if (kernel_at(group.inv(h.offset)) != h.value) throw std::invalid_argument("kernel is not symmetric");
    if (!std::isfinite(h.value)) throw std::invalid_argument("kernel value is not finite");
  }
}

ConfigurationSpace OperatorEnsemble::omega(uint64_t seed) const {
  return ConfigurationSpace(group, potential, seed);
}

bool OperatorEnsemble::separable() const {
  if (random_potential) return false;
  for (const auto& h : kernel) {
    int nonzero = 0;
    for (int k = 0; k < group.dim(); ++k) {
      const int64_t c = h.offset.c[static_cast<size_t>(k)];
      if (c == 0) continue;
      if (std::abs(c) != 1) return false;
      ++nonzero;
    }
    if (nonzero > 1) return false;
  }
  return true;
}

OperatorEnsemble free_ensemble(int d) {
  OperatorEnsemble e;
  e.group = Group::zd(d);
  for (int k = 0; k < d; ++k)
    for (int s : {-1, 1}) {
      Element off;
      off.c[static_cast<size_t>(k)] = s;
      e.kernel.push_back({off, 1.0});
    }
  e.R = 1;
  e.kernel_name = "adjacency";
  e.validate();
  return e;
}

OperatorEnsemble anderson_ensemble(int d, double lo, double hi) {
  OperatorEnsemble e = free_ensemble(d);
  e.random_potential = true;
  e.potential = SiteLaw::uniform(lo, hi);
  return e;
}

RestrictedOperator restrict_operator(const OperatorEnsemble& ens, const ConfigurationSpace& omega,
                                     const FiniteGroupSet& q) {
  ens.validate();
  RestrictedOperator r;
  if (q.empty()) return r;
  r.sites = metric_boundary(ens.group, q, ens.R, Metric::kSup).interior;
  const int n = static_cast<int>(r.sites.size());
  r.h = SymMatrix(n);
  if (n == 0) return r;
  const SetIndex index(ens.group, r.sites);
  for (int i = 0; i < n; ++i) {
    const Element& x = r.sites[static_cast<size_t>(i)];
    for (const auto& hop : ens.kernel) {
      const int64_t j = index.find(ens.group.mul(x, hop.offset));
      if (j >= 0) r.h(i, static_cast<int>(j)) += hop.value;
    }
    if (ens.random_potential) r.h(i, i) += omega.value(x);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Dense eigenvalues: Householder to tridiagonal, then Sturm bisection.

Tridiagonal householder_tridiagonalize(SymMatrix h) {
  const int n = h.n();
  Tridiagonal t;
  t.diag.assign(static_cast<size_t>(n), 0);
  t.off.assign(static_cast<size_t>(std::max(n - 1, 0)), 0);
  std::vector<double> v, p, w;
  for (int k = 0; k + 2 < n; ++k) {
    const int m = n - k - 1;
    v.assign(static_cast<size_t>(m), 0);
    double sigma = 0;
    for (int i = 0; i < m; ++i) {
      v[static_cast<size_t>(i)] = h(k + 1 + i, k);
      sigma += v[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
    }
    if (sigma == 0) continue;
    const double alpha = -std::copysign(std::sqrt(sigma), v[0]);
    v[0] -= alpha;
    double vn = 0;
    for (double x : v) vn += x * x;
    vn = std::sqrt(vn);
    for (double& x : v) x /= vn;
    // p = A22 v from the lower triangle.
    p.assign(static_cast<size_t>(m), 0);
    for (int i = 0; i < m; ++i) {
      const double* row = &h(k + 1 + i, k + 1);
      const double vi = v[static_cast<size_t>(i)];
      double acc = 0;
      for (int j = 0; j < i; ++j) {
        acc += row[j] * v[static_cast<size_t>(j)];
        p[static_cast<size_t>(j)] += row[j] * vi;
      }
      p[static_cast<size_t>(i)] += acc + row[i] * vi;
    }
    double kk = 0;
    for (int i = 0; i < m; ++i) kk += v[static_cast<size_t>(i)] * p[static_cast<size_t>(i)];
    w.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) w[static_cast<size_t>(i)] = 2 * p[static_cast<size_t>(i)] - 2 * kk * v[static_cast<size_t>(i)];
    for (int i = 0; i < m; ++i) {
      double* row = &h(k + 1 + i, k + 1);
      const double vi = v[static_cast<size_t>(i)], wi = w[static_cast<size_t>(i)];
      for (int j = 0; j <= i; ++j) row[j] -= vi * w[static_cast<size_t>(j)] + wi * v[static_cast<size_t>(j)];
    }
    h(k + 1, k) = alpha;
    for (int i = 1; i < m; ++i) h(k + 1 + i, k) = 0;
  }
  for (int i = 0; i < n; ++i) t.diag[static_cast<size_t>(i)] = h(i, i);
  for (int i = 0; i + 1 < n; ++i) t.off[static_cast<size_t>(i)] = h(i + 1, i);
  return t;
}

namespace {

double pivot_floor(const Tridiagonal& t) {
  double m = 1;
  for (double e : t.off) m = std::max(m, e * e);
  return m * std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
}

int sturm_count_floor(const Tridiagonal& t, double e, double pivmin) {
  int count = 0;
  double q = 1;
  for (size_t i = 0; i < t.diag.size(); ++i) {
    q = t.diag[i] - e - (i > 0 ? t.off[i - 1] * t.off[i - 1] / q : 0.0);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0) ++count;
  }
  return count;
}

}  // namespace

int sturm_count(const Tridiagonal& t, double e) { return sturm_count_floor(t, e, pivot_floor(t)); }

std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t) {
  const size_t n = t.diag.size();
  std::vector<double> out;
  if (n == 0) return out;
  out.reserve(n);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  const double tol = 4 * std::numeric_limits<double>::epsilon() * scale;
  lo -= tol;
  hi += tol;
  const double pivmin = pivot_floor(t);
  struct Cell {
    double lo, hi;
    int clo, chi;
  };
  std::vector<Cell> stack{{lo, hi, sturm_count_floor(t, lo, pivmin), sturm_count_floor(t, hi, pivmin)}};
  // Depth first, upper half pushed first, so eigenvalues come out ascending.
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    if (c.chi == c.clo) continue;
    const double mid = 0.5 * (c.lo + c.hi);
    if (c.hi - c.lo <= tol || mid <= c.lo || mid >= c.hi) {
      for (int k = c.clo; k < c.chi; ++k) out.push_back(mid);
      continue;
    }
    const int cm = sturm_count_floor(t, mid, pivmin);
    stack.push_back({mid, c.hi, cm, c.chi});
    stack.push_back({c.lo, mid, c.clo, cm});
  }
  return out;
}

std::vector<double> symmetric_eigenvalues(const SymMatrix& h, int cap) {
  if (h.n() > cap)
    throw DimensionCapExceeded("dimension " + std::to_string(h.n()) + " exceeds the dense eigensolver cap " +
                               std::to_string(cap) + "; use inertia_count for per-energy counts");
  return tridiagonal_eigenvalues(householder_tridiagonalize(h));
}

StepFunction eigen_counting_function(const SymMatrix& h, int cap) {
  return StepFunction::counting(symmetric_eigenvalues(h, cap));
}

// ---------------------------------------------------------------------------
// Inertia by Bunch-Kaufman LDL^T.

namespace {

struct PivotInertia {
  Inertia in;
  double min_pivot = std::numeric_limits<double>::infinity();  // smallest |eigenvalue| of a D block
};

PivotInertia bunch_kaufman(SymMatrix a) {
  const int n = a.n();
  const double alpha = (1 + std::sqrt(17.0)) / 8;
  PivotInertia r;
  std::vector<double> l1(static_cast<size_t>(n)), l2(static_cast<size_t>(n));
  int k = 0;
  while (k < n) {
    double lambda = 0;
    int piv_row = -1;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > lambda) {
        lambda = std::abs(a(i, k));
        piv_row = i;
      }
    const double akk = std::abs(a(k, k));
    if (std::max(akk, lambda) == 0) {
      ++r.in.zero;
      r.min_pivot = 0;
      ++k;
      continue;
    }
    bool two = false;
    if (akk < alpha * lambda) {
      double sigma = 0;
      for (int j = k; j < n; ++j)
        if (j != piv_row) sigma = std::max(sigma, std::abs(a(j, piv_row)));
      if (akk * sigma >= alpha * lambda * lambda) {
        // 1x1 pivot at k
      } else if (std::abs(a(piv_row, piv_row)) >= alpha * sigma) {
        a.swap_index(k, piv_row);
      } else {
        a.swap_index(k + 1, piv_row);
        two = true;
      }
    }
    if (!two) {
      const double d = a(k, k);
      r.min_pivot = std::min(r.min_pivot, std::abs(d));
      (d < 0 ? r.in.negative : d > 0 ? r.in.positive : r.in.zero) += 1;
      for (int i = k + 1; i < n; ++i) l1[static_cast<size_t>(i)] = a(i, k) / d;
      for (int i = k + 1; i < n; ++i) {
        const double li = l1[static_cast<size_t>(i)];
        if (li == 0) continue;
        double* row = &a(i, 0);
        const double* prow = &a(k, 0);
        for (int j = k + 1; j < n; ++j) row[j] -= li * prow[j];
      }
      ++k;
    } else {
      const double p = a(k, k), b = a(k + 1, k), c = a(k + 1, k + 1);
      const double det = p * c - b * b;
      // Eigenvalues of the 2x2 block.
      const double mean = 0.5 * (p + c), rad = std::hypot(0.5 * (p - c), b);
      const double e1 = mean - rad, e2 = mean + rad;
      for (double e : {e1, e2}) {
        r.min_pivot = std::min(r.min_pivot, std::abs(e));
        (e < 0 ? r.in.negative : e > 0 ? r.in.positive : r.in.zero) += 1;
      }
      for (int i = k + 2; i < n; ++i) {
        const double x = a(i, k), y = a(i, k + 1);
        l1[static_cast<size_t>(i)] = (x * c - y * b) / det;
        l2[static_cast<size_t>(i)] = (y * p - x * b) / det;
      }
      for (int i = k + 2; i < n; ++i) {
        const double u = l1[static_cast<size_t>(i)], w = l2[static_cast<size_t>(i)];
        if (u == 0 && w == 0) continue;
        double* row = &a(i, 0);
        const double *r0 = &a(k, 0), *r1 = &a(k + 1, 0);
        for (int j = k + 2; j < n; ++j) row[j] -= u * r0[j] + w * r1[j];
      }
      k += 2;
    }
  }
  return r;
}

}  // namespace

Inertia ldlt_inertia(SymMatrix m) { return bunch_kaufman(std::move(m)).in; }

int64_t inertia_count(const SymMatrix& h, double e) {
  const double norm = h.norm_inf();
  const double tau = 1e-12 * std::max(norm, 1e-300);
  const double tiny = 1e-14 * std::max(norm + std::abs(e), 1e-300);
  double shift = e;
  for (int attempt = 0; attempt < 8; ++attempt) {
    SymMatrix m = h;
    for (int i = 0; i < m.n(); ++i) m(i, i) -= shift;
    const auto r = bunch_kaufman(std::move(m));
    if (r.min_pivot > tiny) return r.in.negative + r.in.zero;
    shift = e + tau * std::ldexp(1.0, attempt);
  }
  throw NumericFailure("inertia_count: LDL^T stays singular after perturbation retries");
}

// ---------------------------------------------------------------------------
// Separable spectra and the counting set function.

std::vector<double> path_spectrum(int64_t m) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(std::max<int64_t>(m, 0)));
  for (int64_t k = 1; k <= m; ++k)
    out.push_back(2 * std::cos(static_cast<double>(k) * std::numbers::pi / static_cast<double>(m + 1)));
  return out;
}

StepFunction path_oracle_profile(int64_t m) {
  if (m < 1) throw std::invalid_argument("path_oracle_profile needs m >= 1");
  return scale(StepFunction::counting(path_spectrum(m)), 1.0 / static_cast<double>(m));
}

namespace {

// Bounding box of q when q fills it completely.
bool as_box(const FiniteGroupSet& q, int d, std::array<int64_t, 4>& lo, std::array<int64_t, 4>& ext) {
  if (q.empty()) return false;
  std::array<int64_t, 4> hi{};
  lo = q[0].c;
  hi = q[0].c;
  for (const auto& x : q)
    for (int k = 0; k < d; ++k) {
      lo[static_cast<size_t>(k)] = std::min(lo[static_cast<size_t>(k)], x.c[static_cast<size_t>(k)]);
      hi[static_cast<size_t>(k)] = std::max(hi[static_cast<size_t>(k)], x.c[static_cast<size_t>(k)]);
    }
  double vol = 1;
  for (int k = 0; k < d; ++k) {
    ext[static_cast<size_t>(k)] = hi[static_cast<size_t>(k)] - lo[static_cast<size_t>(k)] + 1;
    vol *= static_cast<double>(ext[static_cast<size_t>(k)]);
  }
  return vol == static_cast<double>(q.size());
}

// Free axis kernel on a box: the interior is a product of paths and the
// spectrum is the Kronecker sum of the scaled path spectra.
bool separable_box_energies(const OperatorEnsemble& ens, const FiniteGroupSet& q, std::vector<double>* out) {
  const int d = ens.group.dim();
  std::array<int64_t, 4> lo{}, ext{};
  if (!as_box(q, d, lo, ext)) return false;
  double count = 1;
  for (int k = 0; k < d; ++k) count *= static_cast<double>(std::max<int64_t>(ext[static_cast<size_t>(k)] - 2 * ens.R, 0));
  if (count > static_cast<double>(int64_t{1} << 26)) return false;
  std::vector<double> vals{ens.kernel_at(ens.group.identity())};
  for (int k = 0; k < d; ++k) {
    const int64_t m = std::max<int64_t>(ext[static_cast<size_t>(k)] - 2 * ens.R, 0);
    Element unit;
    unit.c[static_cast<size_t>(k)] = 1;
    const double hop = ens.kernel_at(unit);
    std::vector<double> axis = path_spectrum(m);
    for (double& x : axis) x *= hop;
    std::vector<double> next;
    next.reserve(vals.size() * axis.size());
    for (double v : vals)
      for (double a : axis) next.push_back(v + a);
    vals = std::move(next);
  }
  *out = std::move(vals);
  return true;
}

StepFunction counting_on(const OperatorEnsemble& ens, const ConfigurationSpace& omega, const FiniteGroupSet& q) {
  std::vector<double> energies;
  if (ens.separable() && separable_box_energies(ens, q, &energies)) return StepFunction::counting(energies);
  return eigen_counting_function(restrict_operator(ens, omega, q).h);
}

}  // namespace

BoundaryTerm counting_boundary_term(const OperatorEnsemble& ens) {
  auto b = canonical_boundary_term(ens.group, metric_ball(ens.group, 2 * ens.R, Metric::kSup), 2);
  b.name = "2|d^2R|";
  return b;
}

SetFunction<StepFunction> counting_set_function(const OperatorEnsemble& ens, const ConfigurationSpace& omega,
                                                StepNorm mode) {
  ens.validate();
  SetFunction<StepFunction> f;
  f.eval = [ens, omega](const FiniteGroupSet& q) { return counting_on(ens, omega, q); };
  f.shifted = [ens, omega](const FiniteGroupSet& q, const Element& g) {
    return counting_on(ens, omega, right_translate(ens.group, q, g));
  };
  f.invariant = !ens.random_potential;
  f.C = 1;
  f.b = counting_boundary_term(ens);
  f.norm = [mode](const StepFunction& s) { return norm(s, mode); };
  f.name = "counting[" + ens.kernel_name + (ens.random_potential ? "+" + ens.potential.name() : "") + "]";
  return f;
}

// ---------------------------------------------------------------------------
// IDS experiments.

const IdsRow* IdsReport::find(uint64_t seed, int n) const {
  for (const auto& r : rows)
    if (r.seed == seed && r.n == n) return &r;
  return nullptr;
}

bool IdsReport::consecutive_decreasing(uint64_t seed) const {
  double prev = std::numeric_limits<double>::infinity();
  int seen = 0;
  for (const auto& r : rows) {
    if (r.seed != seed || r.dist_prev < 0) continue;
    if (!(r.dist_prev < prev)) return false;
    prev = r.dist_prev;
    ++seen;
  }
  return seen > 0;
}

IdsReport ids_experiment(const OperatorEnsemble& ens, const FolnerSequence& seq, const IdsOptions& opts) {
  ens.validate();
  if (opts.seeds.empty() || opts.ns.empty()) throw std::invalid_argument("ids_experiment needs seeds and sizes");
  IdsReport rep;
  std::vector<int> ns;
  for (int n : opts.ns) {
    const auto u = seq(n);
    std::vector<double> dummy;
    const bool fast = ens.separable() && separable_box_energies(ens, u, &dummy);
    const size_t dim = fast ? dummy.size() : metric_boundary(ens.group, u, ens.R, Metric::kSup).interior.size();
    if (!fast && dim > static_cast<size_t>(opts.cap))
      rep.truncated.push_back(n);
    else
      ns.push_back(n);
  }
  const size_t cells = opts.seeds.size() * ns.size();
  std::vector<IdsRow> rows(cells);
  const bool oracle = !ens.random_potential && ens.group.dim() == 1 && ens.kernel_name == "adjacency";
  const StepFunction oracle_profile = oracle ? path_oracle_profile(opts.oracle_n) : StepFunction{};
#pragma omp parallel for schedule(dynamic)
  for (int64_t c = 0; c < static_cast<int64_t>(cells); ++c) {
    const size_t s = static_cast<size_t>(c) / ns.size(), k = static_cast<size_t>(c) % ns.size();
    IdsRow& row = rows[static_cast<size_t>(c)];
    row.seed = opts.seeds[s];
    row.n = ns[k];
    const auto u = seq(row.n);
    const StepFunction f = counting_on(ens, ens.omega(row.seed), u);
    row.dim = static_cast<size_t>(f.total());
    row.normalized = scale(f, 1.0 / static_cast<double>(u.size()));
    if (oracle) row.dist_oracle = step_distance(row.normalized, oracle_profile);
  }
  for (size_t c = 0; c < cells; ++c)
    if (c % ns.size() > 0) rows[c].dist_prev = step_distance(rows[c].normalized, rows[c - 1].normalized, opts.consecutive_norm);
  for (size_t k = 0; k < ns.size(); ++k) {
    double worst = 0;
    std::vector<StepFunction> same_n;
    for (size_t s = 0; s < opts.seeds.size(); ++s) {
      const auto& a = rows[s * ns.size() + k];
      same_n.push_back(a.normalized);
      for (size_t t = 0; t < s; ++t)
        worst = std::max(worst, step_distance(a.normalized, rows[t * ns.size() + k].normalized, opts.cross_norm));
    }
    rep.cross_seed[ns[k]] = worst;
    rep.mean[ns[k]] = scale(tree_sum(std::move(same_n)), 1.0 / static_cast<double>(opts.seeds.size()));
  }
  rep.rows = std::move(rows);
  return rep;
}

// ---------------------------------------------------------------------------
// Limit profile from center-site spectral measures.

namespace {

// Implicit QL on a tridiagonal, tracking only the first row of the
// eigenvector matrix: nodes and squared first components (Golub-Welsch).
void first_row_ql(std::vector<double>& d, std::vector<double> e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  e.resize(static_cast<size_t>(n), 0.0);
  if (n > 0) e[static_cast<size_t>(n - 1)] = 0;
  z.assign(static_cast<size_t>(n), 0.0);
  if (n > 0) z[0] = 1;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0, m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[static_cast<size_t>(m)]) + std::abs(d[static_cast<size_t>(m + 1)]);
        if (std::abs(e[static_cast<size_t>(m)]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NumericFailure("QL iteration did not converge");
        double g = (d[static_cast<size_t>(l + 1)] - d[static_cast<size_t>(l)]) / (2 * e[static_cast<size_t>(l)]);
        double r = std::hypot(g, 1.0);
        g = d[static_cast<size_t>(m)] - d[static_cast<size_t>(l)] + e[static_cast<size_t>(l)] / (g + std::copysign(r, g));
        double s = 1, c = 1, p = 0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[static_cast<size_t>(i)];
          const double b = c * e[static_cast<size_t>(i)];
          e[static_cast<size_t>(i + 1)] = (r = std::hypot(f, g));
          if (r == 0) {
            d[static_cast<size_t>(i + 1)] -= p;
            e[static_cast<size_t>(m)] = 0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[static_cast<size_t>(i + 1)] - p;
          r = (d[static_cast<size_t>(i)] - g) * s + 2 * c * b;
          d[static_cast<size_t>(i + 1)] = g + (p = s * r);
          g = c * r - b;
          f = z[static_cast<size_t>(i + 1)];
          z[static_cast<size_t>(i + 1)] = s * z[static_cast<size_t>(i)] + c * f;
          z[static_cast<size_t>(i)] = c * z[static_cast<size_t>(i)] - s * f;
        }
        if (r == 0 && i >= l) continue;
        d[static_cast<size_t>(l)] -= p;
        e[static_cast<size_t>(l)] = g;
        e[static_cast<size_t>(m)] = 0;
      }
    } while (m != l);
  }
}

// Cumulative center-site weight of (-inf, E] on the grid.
std::vector<double> center_profile(const OperatorEnsemble& ens, const ConfigurationSpace& omega, int radius,
                                   const std::vector<double>& energies) {
  const int d = ens.group.dim();
  std::vector<Element> box;
  const int64_t r = radius + ens.R;
  std::array<int64_t, 4> x{};
  // Odometer over [-r, r]^d.
  for (int k = 0; k < d; ++k) x[static_cast<size_t>(k)] = -r;
  while (true) {
    Element e;
    e.c = x;
    box.push_back(e);
    int k = 0;
    while (k < d && ++x[static_cast<size_t>(k)] > r) x[static_cast<size_t>(k++)] = -r;
    if (k == d) break;
  }
  auto op = restrict_operator(ens, omega, FiniteGroupSet(std::move(box)));
  const auto it = std::lower_bound(op.sites.begin(), op.sites.end(), ens.group.identity());
  op.h.swap_index(0, static_cast<int>(it - op.sites.begin()));
  const auto t = householder_tridiagonalize(std::move(op.h));
  std::vector<double> nodes = t.diag, z;
  first_row_ql(nodes, t.off, z);
  std::vector<std::pair<double, double>> nw;
  for (size_t i = 0; i < nodes.size(); ++i) nw.emplace_back(snap_energy(nodes[i]), z[i] * z[i]);
  std::sort(nw.begin(), nw.end());
  std::vector<double> out(energies.size());
  size_t i = 0;
  double acc = 0;
  std::vector<size_t> order(energies.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return energies[a] < energies[b]; });
  for (size_t k : order) {
    while (i < nw.size() && nw[i].first <= energies[k]) acc += nw[i++].second;
    out[k] = acc;
  }
  return out;
}

}  // namespace

LimitEstimate ensemble_limit_estimate(const OperatorEnsemble& ens, const std::vector<double>& energies,
                                      int n_samples, int probe_radius, uint64_t first_seed) {
  ens.validate();
  if (n_samples < 10) throw std::invalid_argument("ensemble_limit_estimate needs at least 10 samples");
  if (probe_radius < 1) throw std::invalid_argument("probe radius must be >= 1");
  const size_t ne = energies.size();
  std::vector<std::vector<double>> full(static_cast<size_t>(n_samples)), half(static_cast<size_t>(n_samples));
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < n_samples; ++s) {
    const auto omega = ens.omega(first_seed + static_cast<uint64_t>(s));
    full[static_cast<size_t>(s)] = center_profile(ens, omega, probe_radius, energies);
    half[static_cast<size_t>(s)] = center_profile(ens, omega, std::max(1, probe_radius / 2), energies);
  }
  LimitEstimate est;
  est.energies = energies;
  est.probe_radius = probe_radius;
  est.samples = n_samples;
  est.profile.assign(ne, 0);
  est.std_error.assign(ne, 0);
  std::vector<double> half_mean(ne, 0);
  for (int s = 0; s < n_samples; ++s)
    for (size_t k = 0; k < ne; ++k) {
      est.profile[k] += full[static_cast<size_t>(s)][k];
      half_mean[k] += half[static_cast<size_t>(s)][k];
    }
  const double ns = n_samples;
  for (size_t k = 0; k < ne; ++k) {
    est.profile[k] /= ns;
    half_mean[k] /= ns;
    double var = 0;
    for (int s = 0; s < n_samples; ++s) {
      const double dlt = full[static_cast<size_t>(s)][k] - est.profile[k];
      var += dlt * dlt;
    }
    est.std_error[k] = std::sqrt(var / (ns - 1) / ns);
    est.boundary_diagnostic = std::max(est.boundary_diagnostic, std::abs(est.profile[k] - half_mean[k]));
  }
  return est;
}

double grid_sup_distance(const LimitEstimate& est, const StepFunction& f) {
  double m = 0;
  for (size_t k = 0; k < est.energies.size(); ++k) m = std::max(m, std::abs(est.profile[k] - f(est.energies[k])));
  return m;
}

}  // namespace amen
