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

#include "amen/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace amen {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_double(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

SiteLaw SiteLaw::uniform(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw std::invalid_argument("uniform site law needs finite lo < hi");
  return SiteLaw{kUniform, lo, hi};
}

SiteLaw SiteLaw::bernoulli(double p) {
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("Bernoulli site law needs 0 <= p <= 1");
  return SiteLaw{kBernoulli, p, 0};
}

double SiteLaw::sample(uint64_t h) const {
  const double u = unit_double(h);
  return kind == kUniform ? a + (b - a) * u : (u < a ? 1.0 : 0.0);
}

double SiteLaw::mean() const { return kind == kUniform ? (a + b) / 2 : a; }

double SiteLaw::sup_abs() const { return kind == kUniform ? std::max(std::abs(a), std::abs(b)) : 1.0; }

std::string SiteLaw::name() const {
  std::ostringstream o;
  if (kind == kUniform)
    o << "uniform[" << a << "," << b << ")";
  else
    o << "bernoulli(" << a << ")";
  return o.str();
}

ConfigurationSpace::ConfigurationSpace(Group g, SiteLaw law, uint64_t seed, Element offset)
    : group_(std::move(g)), law_(law), seed_(seed), offset_(offset) {}

double ConfigurationSpace::value(const Element& x) const {
  const Element site = group_.mul(x, offset_);
  uint64_t h = splitmix64(seed_);
  for (int64_t c : site.c) h = splitmix64(h ^ static_cast<uint64_t>(c));
  return law_.sample(h);
}

ConfigurationSpace ConfigurationSpace::shifted(const Element& g) const {
  return ConfigurationSpace(group_, law_, seed_, group_.mul(g, offset_));
}

}  // namespace amen
