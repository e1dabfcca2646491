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

// Epsilon quasi tilings, uniform families and decomposition towers over
// finite subsets of a discrete group.

#ifndef AMEN_TILING_HPP_
#define AMEN_TILING_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "amen/group.hpp"

namespace amen {

class TilingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A Folner prefix ran out before some requirement was met.
class NeedsLargerPrefix : public std::runtime_error {
 public:
  NeedsLargerPrefix(const std::string& what, int failing) : std::runtime_error(what), failing_index(failing) {}
  int failing_index;
};

// ceil(log eps / log(1 - eps)).
int tile_count(double epsilon);

struct TilingParams {
  double epsilon = 0;
  double beta = 0;
  double zeta = 0;
  int N = 0;
  std::vector<double> eta;  // eta[i-1] = eps (1-eps)^(N-i)
  double delta0 = 0;        // 6^-N beta / 4
  bool strict = false;
};

// Strict mode enforces eps <= 1/10 and beta, zeta < 2^-N eps; otherwise any
// eps in (0, 1/2) is accepted.
TilingParams tiling_params(double epsilon, double beta, double zeta, bool strict = false);

enum class DisjointVerdict { kCertified, kGreedyUndecided, kViolated };

struct EpsDisjointResult {
  DisjointVerdict verdict = DisjointVerdict::kCertified;
  std::vector<FiniteGroupSet> cores;  // filled when certified
  bool ok() const { return verdict == DisjointVerdict::kCertified; }
};

// Greedy sequential cores: core k is A_k minus the earlier sets. A failure
// is a proven violation only if some pair overlaps by more than eps(|A|+|B|).
EpsDisjointResult is_eps_disjoint(const std::vector<FiniteGroupSet>& family, double epsilon);

// |A n B| / |B|.
double alpha_coverage(const FiniteGroupSet& a, const FiniteGroupSet& b);

// Smallest nested indices n_1 <= ... <= n_N with n_i >= i and S_{n_i}
// (L, zeta^2)-invariant.
std::vector<FiniteGroupSet> select_basis(const FolnerSequence& seq, const TilingParams& params,
                                         const FiniteGroupSet& l, int max_index = 1 << 14);

struct StageReport {
  int stage = 0;
  size_t placed = 0;
  double density = 0;  // |T_i C_i| / |T|
  double target = 0;
  bool exhausted = false;  // ran out of candidates before reaching the target
};

struct QuasiTiling {
  Group group = Group::zd(1);
  FiniteGroupSet target;
  std::vector<FiniteGroupSet> basis;          // T_1 .. T_N
  std::vector<std::vector<Element>> centers;  // centers[i-1] = C_i, in acceptance order
  TilingParams params;
  // cores[i-1][k] is the core of basis[i-1] for centers[i-1][k].
  std::vector<std::vector<FiniteGroupSet>> cores;
  std::vector<StageReport> stages;  // ordered i = N .. 1
  double precondition_ratio = -1;   // invariance of T wrt T_N T_N^-1; -1 if unchecked
  std::vector<std::string> warnings;

  bool has_cores() const { return !cores.empty(); }
  FiniteGroupSet translate(int i, size_t k) const;  // T_i c, i is 1-based
  FiniteGroupSet covered() const;                   // union of all translates
};

struct QuasiTileOptions {
  bool check_precondition = true;
};

// Greedy construction, stages N down to 1, candidates in canonical order.
// A candidate c is taken when T_i c lies in T, misses all higher stages, and
// overlaps the accepted stage i translates in at most eps |T_i| points. A
// stage ends when no candidate can bring its density closer to eta_i.
QuasiTiling quasi_tile(const Group& g, const FiniteGroupSet& t,
                       const std::vector<FiniteGroupSet>& basis, const TilingParams& params,
                       const QuasiTileOptions& opts = {});

struct CoreBoundaryViolation {
  int stage;
  Element center;
  size_t core_boundary;
  double limit;
};

// Cores drop every point already claimed by an earlier translate (stages
// N..1, acceptance order). Throws TilingError if a core falls below
// (1-eps)|T_i|; boundary growth beyond |d_L T_i| + zeta |T_i| is recorded.
QuasiTiling disjointify(const QuasiTiling& tiling, const FiniteGroupSet& l, double zeta,
                        std::vector<CoreBoundaryViolation>* violations = nullptr);

struct Check {
  std::string name;
  bool pass = true;
  double measured = 0;
  double limit = 0;
  std::string detail;
};

struct TilingReport {
  std::vector<Check> checks;
  bool all_pass() const;
  const Check* find(const std::string& name) const;
};

TilingReport verify_tiling(const QuasiTiling& tiling);

// A background tiling of a hull with disjoint cores, each core quasi tiled
// by the small basis.
struct HullTiling {
  FiniteGroupSet hull;
  QuasiTiling background;                // carries cores
  std::vector<FiniteGroupSet> core_sets;  // translated cores, processing order
  std::vector<FiniteGroupSet> centers;    // hull centers per stage of the small basis
  std::vector<uint8_t> covered;           // per hull position: inside a core
  std::vector<int8_t> center_stage;       // per hull position: stage of a center, or 0
};

HullTiling tile_hull(const Group& g, const FiniteGroupSet& hull,
                     const std::vector<FiniteGroupSet>& background_basis,
                     const TilingParams& background_params,
                     const std::vector<FiniteGroupSet>& basis, const TilingParams& params);

// Indices g with P g inside H whose translate misses at most `threshold` of
// its mass outside the covered part of H.
struct IndexScan {
  std::vector<Element> index;      // sorted
  std::vector<double> uncovered;   // X(g) per index entry
  size_t feasible = 0;             // |{g : P g in H}|
};
IndexScan scan_index_family(const Group& g, const FiniteGroupSet& p, const HullTiling& h,
                            double threshold, Exec exec = Exec::kParallel);
// Candidate by candidate membership scan; reference for the Zd prefix-sum path.
IndexScan scan_index_family_direct(const Group& g, const FiniteGroupSet& p, const HullTiling& h,
                                   double threshold, Exec exec = Exec::kParallel);

// Scale parameters for the hull constructions. Zero selects the default
// schedule: eps1 = min(eps^2/100, beta^2), every other tolerance = eps1.
struct HullOptions {
  double eps1 = 0;
  double background_delta = 0;  // background tiles vs T_N T_N^-1
  double hull_delta = 0;        // hull vs T T^-1
  double eps2 = 0;              // reference set of a tower
  int max_index = 1 << 22;
  int max_levels = 4096;
};

struct UniformFamily {
  Group group = Group::zd(1);
  FiniteGroupSet target;
  std::vector<FiniteGroupSet> basis;
  TilingParams params;
  double eps1 = 0;
  HullTiling hull;
  std::vector<Element> lambda;
  std::vector<double> uncovered;  // X(lambda)
  size_t a_size = 0;              // |{g : T g in hull}|
  std::vector<double> gamma;      // card(hull centers_i) / |hull|
  std::vector<std::string> warnings;

  // C_i^lambda = {d in T : d lambda is a stage i hull center}.
  std::vector<FiniteGroupSet> centers_for(const Element& lambda) const;
};

UniformFamily uniform_family(const Group& g, const FiniteGroupSet& t,
                             const std::vector<FiniteGroupSet>& basis, const TilingParams& params,
                             const FolnerSequence& seq, const HullOptions& opts = {});

// Windows are subsets of T used for the averaged center density check.
TilingReport verify_tiling(const UniformFamily& fam, const std::vector<FiniteGroupSet>& windows);

struct DecompositionTower {
  Group group = Group::zd(1);
  FiniteGroupSet target;  // U
  std::vector<FiniteGroupSet> basis;
  TilingParams params;
  double eps1 = 0, eps2 = 0, eta = 0;
  HullTiling hull;       // background tiling of the hull of U
  std::vector<Element> lambda;
  HullTiling reference;  // shared reference set and its tiling
  std::vector<Element> upsilon;
  std::vector<size_t> upsilon_part_sizes;  // |Upsilon(l,c)| per hull core
  std::vector<std::string> warnings;

  // Hull centers for one y: union over cores P of {d in P : d y is a center}.
  std::vector<FiniteGroupSet> hull_centers_for(const Element& y) const;
  // {d in U : d lambda in hull_centers_for(y)}.
  std::vector<FiniteGroupSet> centers_for(const Element& y, const Element& lambda) const;
};

// Lambda for a tower, from U and the hull tiling alone.
std::vector<Element> tower_lambda(const Group& g, const FiniteGroupSet& u, const HullTiling& hull,
                                  double eps1);

DecompositionTower decomposition_tower(const Group& g, const FiniteGroupSet& u,
                                       const std::vector<FiniteGroupSet>& basis,
                                       const TilingParams& params, const FolnerSequence& seq,
                                       double eta, const HullOptions& opts = {});

// `samples` bounds the number of y and lambda values used for the
// two-way center comparison.
TilingReport verify_tiling(const DecompositionTower& tower, int samples = 12);

std::string tiling_to_json(const QuasiTiling& tiling);
QuasiTiling tiling_from_json(const std::string& text);

}  // namespace amen

#endif  // AMEN_TILING_HPP_
