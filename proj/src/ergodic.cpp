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

#include "amen/ergodic.hpp"

#include <algorithm>
#include <sstream>

namespace amen {

namespace {
// Boxes of the non-abelian families grow fast; the supremum is attained on
// the first few anyway.
constexpr size_t kMaxPrefixSet = size_t{1} << 15;
}  // namespace

BoundaryTerm zero_boundary_term() { return BoundaryTerm{}; }

BoundaryTerm canonical_boundary_term(const Group& g, const FiniteGroupSet& l, double d,
                                     const FolnerSequence& seq, int prefix) {
  if (!(d > 0)) throw std::invalid_argument("canonical_boundary_term: D must be positive");
  if (!l.contains(g.identity())) throw std::invalid_argument("canonical_boundary_term: L must contain the identity");
  if (prefix < 1) throw std::invalid_argument("canonical_boundary_term: empty prefix");
  BoundaryTerm b;
  b.D = d;
  b.L = l;
  b.name = "D|dL|";
  b.eval = [g, l, d](const FiniteGroupSet& q) {
    if (q.empty()) return 0.0;
    return d * static_cast<double>(k_boundary(g, l, q).size());
  };
  double sup = 0;
  for (int n = 1; n <= prefix; ++n) {
    const auto s = seq(n);
    if (!s.empty()) sup = std::max(sup, b(s) / static_cast<double>(s.size()));
    if (s.size() > kMaxPrefixSet) break;
  }
  b.D_tilde = std::max({1.0, d, sup});
  return b;
}

BoundaryTerm canonical_boundary_term(const Group& g, const FiniteGroupSet& l, double d) {
  return canonical_boundary_term(g, l, d, folner_generator(g));
}

SetFunction<VectorValue> additive_set_function(const VectorValue& v, double p) {
  SetFunction<VectorValue> f;
  f.eval = [v](const FiniteGroupSet& q) { return scale(v, static_cast<double>(q.size())); };
  f.invariant = true;
  f.C = norm(v, p);
  f.b = zero_boundary_term();
  f.norm = [p](const VectorValue& x) { return norm(x, p); };
  f.name = "additive";
  return f;
}

namespace {

// Sorted union of many sets in one pass.
std::vector<Element> merged_elements(const std::vector<FiniteGroupSet>& parts, size_t* total) {
  std::vector<Element> all;
  size_t n = 0;
  for (const auto& p : parts) n += p.size();
  all.reserve(n);
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  if (total) *total = n;
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

}  // namespace

void require_partition(const FiniteGroupSet& q, const std::vector<FiniteGroupSet>& parts) {
  size_t total = 0;
  const auto all = merged_elements(parts, &total);
  if (total != all.size()) throw std::invalid_argument("additivity_defect: parts overlap");
  if (all != q.elements()) throw std::invalid_argument("additivity_defect: parts do not cover Q exactly");
}

double eps_disjoint_bound_formula(double c, double eps, double alpha, double d_tilde, double q_size,
                                  double b_q, double sum_b_parts) {
  return c * (2 * eps + 1 - (1 - eps) * alpha) * q_size + 10 * d_tilde * eps * q_size + b_q +
         (5 * d_tilde + 1) * sum_b_parts;
}

ErrorBound prepare_error_bound(const FiniteGroupSet& q, const std::vector<FiniteGroupSet>& parts,
                               double eps, double c, const BoundaryTerm& b) {
  if (q.empty()) throw std::invalid_argument("eps_disjoint_error_bound: empty Q");
  for (size_t k = 0; k < parts.size(); ++k)
    if (!is_subset(parts[k], q))
      throw std::invalid_argument("eps_disjoint_error_bound: part " + std::to_string(k) + " leaves Q");
  ErrorBound r;
  std::vector<FiniteGroupSet> cores;
  if (!parts.empty()) {
    const auto dis = is_eps_disjoint(parts, eps);
    if (!dis.ok())
      throw TilingError(dis.verdict == DisjointVerdict::kViolated
                            ? "eps_disjoint_error_bound: parts are not eps-disjoint"
                            : "eps_disjoint_error_bound: no certified cores (greedy undecided)");
    cores = dis.cores;
  }
  const auto covered = merged_elements(parts, nullptr);
  r.alpha = static_cast<double>(covered.size()) / static_cast<double>(q.size());
  r.b_q = b(q);
  std::ostringstream why;
  for (size_t k = 0; k < parts.size(); ++k) {
    const double bk = b(parts[k]);
    r.sum_b_parts += bk;
    const double sz = static_cast<double>(parts[k].size());
    const double bc = b(cores[k]);
    if (bk > b.D_tilde * sz || bc > b.D_tilde * (bk + eps * sz)) {
      if (r.admissible) why << "part " << k << ": b=" << bk << " b(core)=" << bc;
      r.admissible = false;
    }
  }
  r.detail = why.str();
  r.bound = eps_disjoint_bound_formula(c, eps, r.alpha, b.D_tilde, static_cast<double>(q.size()), r.b_q,
                                       r.sum_b_parts);
  return r;
}

}  // namespace amen
