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

// Discrete amenable groups: elements, finite sets, boundaries, Folner sets.

#ifndef AMEN_GROUP_HPP_
#define AMEN_GROUP_HPP_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <vector>

namespace amen {

enum class Family { kZd, kHeisenberg, kLamplighter };

// Every parallel kernel also has a serial path; tests compare the two.
enum class Exec { kSerial, kParallel };

// Canonical coordinates. Unused slots stay zero, so the defaulted ordering
// is the lexicographic order on coordinates.
//   Zd:          c[0..d-1]
//   Heisenberg:  (x, y, z)
//   Lamplighter: (lamp bits for sites -64..-1, lamp bits for 0..63, position)
struct Element {
  std::array<int64_t, 4> c{};
  friend auto operator<=>(const Element&, const Element&) = default;
};

struct ElementHash {
  size_t operator()(const Element& e) const noexcept;
};

class Group {
 public:
  static Group zd(int d);
  static Group heisenberg();
  static Group lamplighter();

  Family family() const { return family_; }
  int dim() const { return dim_; }
  std::string name() const;

  Element identity() const { return Element{}; }
  Element mul(const Element& a, const Element& b) const;
  Element inv(const Element& a) const;

  // Symmetric generating set, identity excluded.
  std::vector<Element> generators() const;

  Element point(std::initializer_list<int64_t> coords) const;
  Element heis(int64_t x, int64_t y, int64_t z) const;
  // Lamp sites must lie in [-64, 63]; products leaving the window throw.
  Element lamp(const std::vector<int64_t>& lit, int64_t pos) const;
  std::vector<int64_t> lit_sites(const Element& e) const;

  // Portable coordinate list (lamplighter: position then lit sites).
  std::vector<int64_t> coords(const Element& e) const;
  Element from_coords(const std::vector<int64_t>& v) const;
  std::string format(const Element& e) const;

  friend bool operator==(const Group&, const Group&) = default;

 private:
  Group(Family f, int d) : family_(f), dim_(d) {}
  Family family_;
  int dim_;
};

// Finite set of canonical elements, stored sorted and duplicate free.
class FiniteGroupSet {
 public:
  FiniteGroupSet() = default;
  explicit FiniteGroupSet(std::vector<Element> elems);
  FiniteGroupSet(std::initializer_list<Element> elems);
  static FiniteGroupSet from_sorted(std::vector<Element> sorted_unique);

  size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  bool contains(const Element& e) const;
  const std::vector<Element>& elements() const { return elems_; }
  const Element& operator[](size_t i) const { return elems_[i]; }
  std::vector<Element>::const_iterator begin() const { return elems_.begin(); }
  std::vector<Element>::const_iterator end() const { return elems_.end(); }

  friend bool operator==(const FiniteGroupSet&, const FiniteGroupSet&) = default;

 private:
  std::vector<Element> elems_;
};

FiniteGroupSet set_union(const FiniteGroupSet& a, const FiniteGroupSet& b);
FiniteGroupSet set_intersection(const FiniteGroupSet& a, const FiniteGroupSet& b);
FiniteGroupSet set_difference(const FiniteGroupSet& a, const FiniteGroupSet& b);
bool is_subset(const FiniteGroupSet& a, const FiniteGroupSet& b);

// Constant time membership for large sets. Zd boxes use arithmetic ranks
// (equal to positions in the sorted order); everything else hashes.
class SetIndex {
 public:
  SetIndex() = default;
  SetIndex(const Group& g, const FiniteGroupSet& s);
  // Position of e in the sorted set, or -1.
  int64_t find(const Element& e) const;
  bool contains(const Element& e) const { return find(e) >= 0; }
  size_t size() const { return size_; }

 private:
  size_t size_ = 0;
  bool box_ = false;
  int dim_ = 0;
  std::array<int64_t, 4> lo_{}, ext_{}, stride_{};
  std::unordered_map<Element, int64_t, ElementHash> map_;
};

FiniteGroupSet right_translate(const Group& g, const FiniteGroupSet& a, const Element& x);
FiniteGroupSet left_translate(const Group& g, const Element& x, const FiniteGroupSet& a);
FiniteGroupSet inverse_set(const Group& g, const FiniteGroupSet& a);
FiniteGroupSet product_set(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                           Exec exec = Exec::kParallel);

// {x : Kx meets T and Kx leaves T}; candidates are scanned in K^-1 T only.
FiniteGroupSet k_boundary(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                          Exec exec = Exec::kParallel);
// Direct scan of every candidate in K^-1 T; reference path for the counting
// kernel that k_boundary uses on Zd.
FiniteGroupSet k_boundary_scan(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                               Exec exec = Exec::kParallel);
// Same boundary for the complement G \ T, evaluated through a membership
// predicate that never enumerates the complement.
FiniteGroupSet k_boundary_of_complement(const Group& g, const FiniteGroupSet& k,
                                        const FiniteGroupSet& t);
double invariance_ratio(const Group& g, const FiniteGroupSet& k, const FiniteGroupSet& t,
                        Exec exec = Exec::kParallel);

enum class FolnerKind { kBox, kTrivial };

struct FolnerSequence {
  Group group = Group::zd(1);
  FolnerKind kind = FolnerKind::kBox;
  bool nested = true;
  bool strong = true;
  bool tempered = true;
  // n >= 1.
  FiniteGroupSet operator()(int n) const;
  std::string name() const;
};

// Zd: [0,n)^d. Heisenberg: |x|,|y| <= n, |z| <= n^2.
// Lamplighter: lit sites in [-n,n], |position| <= n.
FolnerSequence folner_generator(const Group& g, FolnerKind kind = FolnerKind::kBox);
FolnerSequence folner_generator(const Group& g, const std::string& tag);

struct GrowthConstants {
  double tempelman = 0;
  double shulman = 0;
};
GrowthConstants growth_constants(const FolnerSequence& seq, int n_max);

enum class Metric { kSup, kWord };
Metric default_metric(const Group& g);
// Closed ball of radius r around the identity.
FiniteGroupSet metric_ball(const Group& g, double r, Metric m);

struct MetricBoundary {
  FiniteGroupSet interior;  // {x : d(x, G \ Q) > r}
  FiniteGroupSet closure;   // {x : d(x, Q) <= r}
  FiniteGroupSet boundary;  // closure \ interior
};
MetricBoundary metric_boundary(const Group& g, const FiniteGroupSet& q, double r, Metric m);

}  // namespace amen

#endif  // AMEN_GROUP_HPP_
