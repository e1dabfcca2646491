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

// Boundary terms, almost-additive set functions and their averages.

#ifndef AMEN_ERGODIC_HPP_
#define AMEN_ERGODIC_HPP_

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amen/group.hpp"
#include "amen/tiling.hpp"
#include "amen/values.hpp"

namespace amen {

struct BoundaryTerm {
  std::function<double(const FiniteGroupSet&)> eval;  // empty means b == 0
  double D = 0;
  FiniteGroupSet L;
  double D_tilde = 1;  // constant under which the term is tiling-admissible
  std::string name = "zero";

  double operator()(const FiniteGroupSet& q) const { return eval ? eval(q) : 0.0; }
};

BoundaryTerm zero_boundary_term();

// b(Q) = D |dL(Q)|; D_tilde = max{1, D, max_{n <= prefix} b(S_n)/|S_n|}.
// The prefix scan stops after the first S_n with more than 2^15 elements.
BoundaryTerm canonical_boundary_term(const Group& g, const FiniteGroupSet& l, double d,
                                     const FolnerSequence& seq, int prefix = 16);
BoundaryTerm canonical_boundary_term(const Group& g, const FiniteGroupSet& l, double d);

template <class V>
struct SetFunction {
  using Value = V;
  std::function<V(const FiniteGroupSet&)> eval;
  // F(Qg) for orbit averages. Not needed when `invariant` is set.
  std::function<V(const FiniteGroupSet&, const Element&)> shifted;
  bool invariant = false;
  double C = 1;  // ||F(Q)|| <= C |Q|
  BoundaryTerm b;
  std::function<double(const V&)> norm;
  std::string name;

  V operator()(const FiniteGroupSet& q) const { return eval(q); }
};

// F(Q) = |Q| v: strictly additive and translation-invariant, b == 0.
SetFunction<VectorValue> additive_set_function(const VectorValue& v, double p = 2);

// Pairwise summation in a fixed tree order, independent of thread count.
template <class V>
V tree_sum(std::vector<V> xs) {
  if (xs.empty()) throw std::invalid_argument("tree_sum of nothing");
  while (xs.size() > 1) {
    std::vector<V> next;
    next.reserve((xs.size() + 1) / 2);
    for (size_t i = 0; i + 1 < xs.size(); i += 2) next.push_back(add(xs[i], xs[i + 1]));
    if (xs.size() % 2 == 1) next.push_back(std::move(xs.back()));
    xs = std::move(next);
  }
  return std::move(xs.front());
}

// Throws invalid_argument unless `parts` partition `q` exactly.
void require_partition(const FiniteGroupSet& q, const std::vector<FiniteGroupSet>& parts);

struct DefectBudget {
  double defect = 0;
  double budget = 0;  // sum of b over the parts
};

template <class V>
DefectBudget additivity_defect(const SetFunction<V>& f, const FiniteGroupSet& q,
                               const std::vector<FiniteGroupSet>& parts) {
  require_partition(q, parts);
  std::vector<V> vals;
  DefectBudget r;
  for (const auto& p : parts) {
    vals.push_back(f(p));
    r.budget += f.b(p);
  }
  r.defect = f.norm(sub(f(q), tree_sum(std::move(vals))));
  return r;
}

double eps_disjoint_bound_formula(double c, double eps, double alpha, double d_tilde, double q_size,
                                  double b_q, double sum_b_parts);

struct ErrorBound {
  double defect = 0;
  double bound = 0;
  double alpha = 0;
  double b_q = 0;
  double sum_b_parts = 0;
  // b(Q_k) <= D_tilde |Q_k| and b(core_k) <= D_tilde (b(Q_k) + eps |Q_k|) for every part.
  bool admissible = true;
  std::string detail;
  bool holds() const { return defect <= bound; }
};

// Everything except the defect; throws when the parts leave q or no cores are certified.
ErrorBound prepare_error_bound(const FiniteGroupSet& q, const std::vector<FiniteGroupSet>& parts,
                               double eps, double c, const BoundaryTerm& b);

template <class V>
ErrorBound eps_disjoint_error_bound(const SetFunction<V>& f, const FiniteGroupSet& q,
                                    const std::vector<FiniteGroupSet>& parts, double eps) {
  ErrorBound r = prepare_error_bound(q, parts, eps, f.C, f.b);
  std::vector<V> vals;
  vals.reserve(parts.size());
  for (const auto& p : parts) vals.push_back(f(p));
  const V whole = f(q);
  r.defect = parts.empty() ? f.norm(whole) : f.norm(sub(whole, tree_sum(std::move(vals))));
  return r;
}

template <class V>
struct FolnerAverage {
  int j = 0;
  size_t size = 0;
  V value;
  double norm = 0;
  bool degenerate = false;  // |U_j| = 0, value set to 0
};

template <class V>
struct FolnerAverages {
  std::vector<FolnerAverage<V>> rows;
  std::vector<double> consecutive;  // ||v_{k+1} - v_k|| along the grid
  double extreme = 0;               // ||v_last - v_first||
};

template <class V>
FolnerAverages<V> folner_averages(const SetFunction<V>& f, const FolnerSequence& seq,
                                  const std::vector<int>& js) {
  FolnerAverages<V> out;
  for (int j : js) {
    const auto u = seq(j);
    FolnerAverage<V> row;
    row.j = j;
    row.size = u.size();
    const V raw = f(u);
    row.degenerate = u.empty();
    row.value = scale(raw, u.empty() ? 0.0 : 1.0 / static_cast<double>(u.size()));
    row.norm = f.norm(row.value);
    out.rows.push_back(std::move(row));
  }
  for (size_t k = 1; k < out.rows.size(); ++k)
    out.consecutive.push_back(f.norm(sub(out.rows[k].value, out.rows[k - 1].value)));
  if (out.rows.size() > 1) out.extreme = f.norm(sub(out.rows.back().value, out.rows.front().value));
  return out;
}

// |U|^{-1} sum_{g in U} F(Qg), or F(Q) for an invariant F.
template <class V>
V orbit_average(const SetFunction<V>& f, const FiniteGroupSet& q, const FiniteGroupSet& u,
                Exec exec = Exec::kParallel) {
  if (f.invariant) return f(q);
  if (!f.shifted) throw std::invalid_argument("orbit_average: no shift hook for a non-invariant F");
  if (u.empty()) throw std::invalid_argument("orbit_average: empty averaging set");
  std::vector<V> vals(u.size());
  const auto n = static_cast<int64_t>(u.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::kParallel)
  for (int64_t i = 0; i < n; ++i) vals[static_cast<size_t>(i)] = f.shifted(q, u[static_cast<size_t>(i)]);
  return scale(tree_sum(std::move(vals)), 1.0 / static_cast<double>(u.size()));
}

// sum_i eta_i S(T_i)/|T_i| with S the orbit average over u.
template <class V>
V tiling_limit_estimate(const SetFunction<V>& f, const TilingParams& params,
                        const std::vector<FiniteGroupSet>& basis, const FiniteGroupSet& u,
                        Exec exec = Exec::kParallel) {
  if (static_cast<int>(basis.size()) != params.N)
    throw std::invalid_argument("tiling_limit_estimate: basis size differs from N");
  std::vector<V> terms;
  for (int i = 0; i < params.N; ++i) {
    const auto& t = basis[static_cast<size_t>(i)];
    if (t.empty()) throw std::invalid_argument("tiling_limit_estimate: empty basis set");
    terms.push_back(scale(orbit_average(f, t, u, exec), params.eta[static_cast<size_t>(i)] /
                                                            static_cast<double>(t.size())));
  }
  V acc = terms.front();
  for (size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
  return acc;
}

}  // namespace amen

#endif  // AMEN_ERGODIC_HPP_
