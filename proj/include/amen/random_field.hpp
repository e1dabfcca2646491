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

// iid site fields over a group, sampled by hashing (seed, site). The shift
// g.omega only moves an offset, so shifted fields are bit-identical
// relabelings of the original.

#ifndef AMEN_RANDOM_FIELD_HPP_
#define AMEN_RANDOM_FIELD_HPP_

#include <cstdint>
#include <string>

#include "amen/group.hpp"

namespace amen {

uint64_t splitmix64(uint64_t x);
// Uniform in [0, 1) from the top 53 bits.
double unit_double(uint64_t h);

struct SiteLaw {
  enum Kind { kUniform, kBernoulli } kind = kUniform;
  double a = 0, b = 1;  // uniform on [a, b); Bernoulli: P(1) = a

  static SiteLaw uniform(double lo, double hi);
  static SiteLaw bernoulli(double p);
  double sample(uint64_t h) const;
  double mean() const;
  double sup_abs() const;  // bound on |value|
  std::string name() const;
};

// omega(x) = site value at x . offset under the seed.
class ConfigurationSpace {
 public:
  ConfigurationSpace(Group g, SiteLaw law, uint64_t seed, Element offset = {});

  double value(const Element& x) const;
  // g.omega with (g.omega)(x) = omega(x g).
  ConfigurationSpace shifted(const Element& g) const;

  const Group& group() const { return group_; }
  const SiteLaw& law() const { return law_; }
  uint64_t seed() const { return seed_; }
  const Element& offset() const { return offset_; }

 private:
  Group group_;
  SiteLaw law_;
  uint64_t seed_;
  Element offset_;
};

}  // namespace amen

#endif  // AMEN_RANDOM_FIELD_HPP_
