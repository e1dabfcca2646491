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

// Random finite-range operators on Z^d, their restrictions to finite sets,
// eigenvalue counting functions and integrated-density-of-states runs.

#ifndef AMEN_SPECTRAL_HPP_
#define AMEN_SPECTRAL_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "amen/ergodic.hpp"
#include "amen/group.hpp"
#include "amen/random_field.hpp"
#include "amen/values.hpp"

namespace amen {

inline constexpr int kDenseCap = 3600;

struct DimensionCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense symmetric matrix, row-major.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0) {}
  int n() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)]; }
  double operator()(int i, int j) const {
    return a_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)];
  }
  bool symmetric() const;
  double norm_inf() const;  // max absolute row sum, bounds the spectral radius
  void swap_index(int i, int j);  // simultaneous row and column swap

 private:
  int n_ = 0;
  std::vector<double> a_;
};

struct Hopping {
  Element offset;
  double value = 0;
};

struct OperatorEnsemble {
  Group group = Group::zd(1);
  std::vector<Hopping> kernel;  // a(g); a(g) = a(g^-1), support within sup distance R
  int R = 1;
  bool random_potential = false;
  SiteLaw potential;
  std::string kernel_name = "custom";

  void validate() const;
  ConfigurationSpace omega(uint64_t seed) const;
  double kernel_at(const Element& g) const;
  // Free operator whose kernel lives on the coordinate axes: box spectra separate.
  bool separable() const;
};

OperatorEnsemble free_ensemble(int d);  // adjacency, V == 0
OperatorEnsemble anderson_ensemble(int d, double lo, double hi);

struct RestrictedOperator {
  FiniteGroupSet sites;  // R-interior of Q, canonical order
  SymMatrix h;
};

// h(x,y) = a(x^-1 y) + V(x) [x = y] on the R-interior of q.
RestrictedOperator restrict_operator(const OperatorEnsemble& ens, const ConfigurationSpace& omega,
                                     const FiniteGroupSet& q);

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1
};

// Householder reduction from the top; the orthogonal factor fixes e_0.
Tridiagonal householder_tridiagonalize(SymMatrix h);
// Number of eigenvalues < e, by Sturm sequence.
int sturm_count(const Tridiagonal& t, double e);
// All eigenvalues, ascending, by bisection on Sturm counts.
std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t);
std::vector<double> symmetric_eigenvalues(const SymMatrix& h, int cap = kDenseCap);

StepFunction eigen_counting_function(const SymMatrix& h, int cap = kDenseCap);

struct Inertia {
  int64_t negative = 0, zero = 0, positive = 0;
};
// Bunch-Kaufman LDL^T of m; updates skip zero multipliers, so band structure
// is cheap when no pivoting is needed.
Inertia ldlt_inertia(SymMatrix m);
// #{eigenvalues <= e} from the inertia of h - e I. Near-singular shifts are
// retried at e + tau, tau = 1e-12 ||h||.
int64_t inertia_count(const SymMatrix& h, double e);

// 2 cos(k pi / (m+1)), k = 1..m.
std::vector<double> path_spectrum(int64_t m);
// Counting function of the m-site path divided by m.
StepFunction path_oracle_profile(int64_t m);

SetFunction<StepFunction> counting_set_function(const OperatorEnsemble& ens, const ConfigurationSpace& omega,
                                                StepNorm mode = StepNorm::sup());
// Boundary term 2 |d^{2R}(Q)| used by the counting function.
BoundaryTerm counting_boundary_term(const OperatorEnsemble& ens);

struct IdsOptions {
  std::vector<int> ns = {8, 16, 32, 48};
  std::vector<uint64_t> seeds = {1, 2};
  StepNorm consecutive_norm = StepNorm::sup();
  StepNorm cross_norm = StepNorm::lp(2, -5, 5);
  int cap = kDenseCap;
  int64_t oracle_n = 2000;  // free d = 1 only
};

struct IdsRow {
  uint64_t seed = 0;
  int n = 0;
  size_t dim = 0;
  StepFunction normalized;  // F(U_n) / |U_n|
  double dist_prev = -1;    // consecutive_norm distance to the previous n; -1 on the first
  double dist_oracle = -1;  // sup distance to path_oracle_profile(oracle_n); -1 when not free d = 1
};

struct IdsReport {
  std::vector<IdsRow> rows;                       // seed-major, n ascending
  std::map<int, double> cross_seed;               // n -> max pairwise cross_norm distance
  std::map<int, StepFunction> mean;               // n -> seed average
  std::vector<int> truncated;                     // n skipped: dimension above cap
  const IdsRow* find(uint64_t seed, int n) const;
  bool consecutive_decreasing(uint64_t seed) const;
};

IdsReport ids_experiment(const OperatorEnsemble& ens, const FolnerSequence& seq, const IdsOptions& opts);

struct LimitEstimate {
  std::vector<double> energies;
  std::vector<double> profile;     // mean center-site spectral weight of (-inf, E]
  std::vector<double> std_error;
  int probe_radius = 0;
  int samples = 0;
  double boundary_diagnostic = 0;  // sup gap to the same estimate at half the radius
};

// Monte-Carlo estimate of the limit profile from center-site spectral
// measures of probe boxes [-r, r]^d (Golub-Welsch on the tridiagonal form).
LimitEstimate ensemble_limit_estimate(const OperatorEnsemble& ens, const std::vector<double>& energies,
                                      int n_samples, int probe_radius, uint64_t first_seed = 1000);

// Sup distance between a profile on a grid and a step function at the same energies.
double grid_sup_distance(const LimitEstimate& est, const StepFunction& f);

}  // namespace amen

#endif  // AMEN_SPECTRAL_HPP_
