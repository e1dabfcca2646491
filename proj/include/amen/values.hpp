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

// Value spaces for set functions: real vectors and right-continuous step
// functions on the real line.

#ifndef AMEN_VALUES_HPP_
#define AMEN_VALUES_HPP_

#include <string>
#include <vector>

namespace amen {

struct VectorValue {
  std::vector<double> v;
  friend bool operator==(const VectorValue&, const VectorValue&) = default;
};

VectorValue add(const VectorValue& a, const VectorValue& b);
VectorValue sub(const VectorValue& a, const VectorValue& b);
VectorValue scale(const VectorValue& a, double s);
// p >= 1; p = 0 selects the max norm.
double norm(const VectorValue& a, double p = 2);

// Eigenvalues are snapped to this grid so that equal energies computed on
// different matrices compare equal.
inline constexpr double kEnergyResolution = 1e-9;
double snap_energy(double e);

// f(E) = values[k] for jumps[k] <= E < jumps[k+1]; 0 left of jumps[0].
// Jumps are strictly increasing.
class StepFunction {
 public:
  StepFunction() = default;
  // Counting function of a multiset of energies (snapped first).
  static StepFunction counting(std::vector<double> energies);
  static StepFunction from_pieces(std::vector<double> jumps, std::vector<double> values);

  double operator()(double e) const;
  const std::vector<double>& jumps() const { return jumps_; }
  const std::vector<double>& values() const { return values_; }
  double total() const { return values_.empty() ? 0 : values_.back(); }
  bool nondecreasing() const;

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  std::vector<double> jumps_;
  std::vector<double> values_;
};

StepFunction add(const StepFunction& a, const StepFunction& b);
StepFunction sub(const StepFunction& a, const StepFunction& b);
StepFunction scale(const StepFunction& a, double s);

struct StepNorm {
  enum Kind { kSup, kLp } kind = kSup;
  double p = 2;
  double lo = -5, hi = 5;  // the interval I for kLp
  static StepNorm sup() { return {}; }
  static StepNorm lp(double p, double lo, double hi);
  std::string name() const;
};

double norm(const StepFunction& f, const StepNorm& mode = StepNorm::sup());
// Exact piecewise evaluation of ||f - g||.
double step_distance(const StepFunction& f, const StepFunction& g,
                     const StepNorm& mode = StepNorm::sup());

std::string step_to_json(const StepFunction& f);
StepFunction step_from_json(const std::string& text);

}  // namespace amen

#endif  // AMEN_VALUES_HPP_
