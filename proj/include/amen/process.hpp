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

// Bounded additive processes over iid site fields, the Vitali-type covering
// used for maximal inequalities, and Monte-Carlo experiments on them.

#ifndef AMEN_PROCESS_HPP_
#define AMEN_PROCESS_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "amen/group.hpp"
#include "amen/random_field.hpp"

namespace amen {

// f(omega) = phi(omega(w_1), ..., omega(w_m)) for a finite window.
struct CylinderFunction {
  std::vector<Element> window;
  std::function<double(const std::vector<double>&)> phi;
  double sup = 0;                       // bound on |f|
  double mean = std::nan("");           // E f when known
  std::string name;
};

CylinderFunction cylinder_constant(double c);
CylinderFunction cylinder_coordinate(const SiteLaw& law);                    // omega(e)
CylinderFunction cylinder_threshold(double t, const SiteLaw& law);           // 1{omega(e) > t}
CylinderFunction cylinder_difference(const Element& other, const SiteLaw& law);  // omega(e) - omega(other)

struct ProcessParams {
  double p = 0.5;                // point-count occupation probability
  SiteLaw law;                   // site law for the absolutely continuous kind
  CylinderFunction f;            // absolutely continuous kind
  uint64_t base_seed = 0;
};

// F(Q)(omega) = sum_{g in Q} kernel(omega, g). The kernel of the absolutely
// continuous kind is f(g.omega), which makes F(Q g^-1)(omega) = F(Q)(g^-1.omega) exact.
struct AdditiveProcess {
  std::string kind;
  Group group = Group::zd(1);
  SiteLaw law;
  uint64_t base_seed = 0;
  std::function<double(const ConfigurationSpace&, const Element&)> kernel;
  double K = 0;                 // |kernel| <= K
  double kernel_mean = std::nan("");

  double operator()(const FiniteGroupSet& q, const ConfigurationSpace& omega) const;
  // Sample i of the product law.
  ConfigurationSpace sample(uint64_t i) const;
};

// kind: "absolutely-continuous" or "bernoulli-point-count".
AdditiveProcess make_process(const std::string& kind, const ProcessParams& params, const Group& g);

// F0(Q)(omega) = sum_{g in Q} |kernel(omega, g)|.
AdditiveProcess dominating_process(const AdditiveProcess& f);

struct VitaliCover {
  std::vector<size_t> chosen;  // indices into B, in acceptance order
  bool disjoint = false;       // U_theta(b) b pairwise disjoint over chosen b
  bool covers = false;         // B inside the union of U^-1 U b over chosen b
};

// levels[k] is U_{first_level + k}; theta[i] is the level of b_i.
VitaliCover vitali_cover(const Group& g, const std::vector<Element>& b, const std::vector<int>& theta,
                         const std::vector<FiniteGroupSet>& levels, int first_level);

struct TailEstimate {
  double lambda = 0;
  double tail = 0;          // fraction of samples with max_j |F(U_j)|/|U_j| > lambda
  double tail_sigma = 0;
  double sup_l1 = 0;        // max_j E|F(U_j)| / |U_j|, Monte-Carlo
  double sup_l1_sigma = 0;
  double kappa = 1;
  double kappa_tilde = 0;
  double bound = 0;         // kappa kappa_tilde / lambda * sup_l1
  double clamped_bound() const;
  // tail <= min(1, bound) up to 3 sigma of both estimates.
  bool plausible() const;
};

TailEstimate maximal_tail_estimate(const AdditiveProcess& f, const FolnerSequence& seq, double lambda, int m,
                                   int j_max, int n_samples, Exec exec = Exec::kParallel);

// F_n(Q)(omega) = F(Q)(omega) unless sup_{j <= j_max} F0(U_j)(omega)/|U_j| > n.
struct TruncatedProcess {
  AdditiveProcess base;
  double n = 0;
  std::vector<FiniteGroupSet> prefix;
  bool in_bad_set(const ConfigurationSpace& omega) const;
  double operator()(const FiniteGroupSet& q, const ConfigurationSpace& omega) const;
};

TruncatedProcess truncate_process(const AdditiveProcess& f, double n, const FolnerSequence& seq, int j_max);

// F(U_j)(omega)/|U_j| for each j.
std::vector<double> pointwise_trajectory(const AdditiveProcess& f, const ConfigurationSpace& omega,
                                         const FolnerSequence& seq, const std::vector<int>& js);

}  // namespace amen

#endif  // AMEN_PROCESS_HPP_
