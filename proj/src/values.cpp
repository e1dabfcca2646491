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

#include "amen/values.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace amen {

VectorValue add(const VectorValue& a, const VectorValue& b) {
  if (a.v.size() != b.v.size()) throw std::invalid_argument("vector values of different length");
  VectorValue r = a;
  for (size_t i = 0; i < r.v.size(); ++i) r.v[i] += b.v[i];
  return r;
}

VectorValue sub(const VectorValue& a, const VectorValue& b) { return add(a, scale(b, -1)); }

VectorValue scale(const VectorValue& a, double s) {
  VectorValue r = a;
  for (auto& x : r.v) x *= s;
  return r;
}

double norm(const VectorValue& a, double p) {
  if (p == 0) {
    double m = 0;
    for (double x : a.v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p < 1) throw std::invalid_argument("vector norm needs p >= 1");
  double s = 0;
  for (double x : a.v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1 / p);
}

double snap_energy(double e) { return std::nearbyint(e / kEnergyResolution) * kEnergyResolution; }

StepFunction StepFunction::counting(std::vector<double> energies) {
  for (auto& e : energies) e = snap_energy(e);
  std::sort(energies.begin(), energies.end());
  StepFunction f;
  for (size_t i = 0; i < energies.size(); ++i) {
    if (!f.jumps_.empty() && f.jumps_.back() == energies[i]) {
      f.values_.back() += 1;
    } else {
      f.jumps_.push_back(energies[i]);
      f.values_.push_back(static_cast<double>(i + 1));
    }
  }
  return f;
}

StepFunction StepFunction::from_pieces(std::vector<double> jumps, std::vector<double> values) {
  if (jumps.size() != values.size()) throw std::invalid_argument("step function: size mismatch");
  for (size_t i = 1; i < jumps.size(); ++i)
    if (!(jumps[i] > jumps[i - 1])) throw std::invalid_argument("step function: jumps must increase");
  StepFunction f;
  f.jumps_ = std::move(jumps);
  f.values_ = std::move(values);
  return f;
}

double StepFunction::operator()(double e) const {
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), e);
  if (it == jumps_.begin()) return 0;
  return values_[static_cast<size_t>(it - jumps_.begin()) - 1];
}

bool StepFunction::nondecreasing() const {
  double prev = 0;
  for (double v : values_) {
    if (v < prev) return false;
    prev = v;
  }
  return true;
}

namespace {

// Pointwise combination on the merged jump list.
template <class Op>
StepFunction combine(const StepFunction& a, const StepFunction& b, Op op) {
  const auto &ja = a.jumps(), &jb = b.jumps();
  const auto &va = a.values(), &vb = b.values();
  std::vector<double> jumps, values;
  jumps.reserve(ja.size() + jb.size());
  values.reserve(ja.size() + jb.size());
  size_t i = 0, k = 0;
  double fa = 0, fb = 0;
  while (i < ja.size() || k < jb.size()) {
    double x;
    if (k >= jb.size() || (i < ja.size() && ja[i] < jb[k])) {
      x = ja[i];
      fa = va[i++];
    } else if (i >= ja.size() || jb[k] < ja[i]) {
      x = jb[k];
      fb = vb[k++];
    } else {
      x = ja[i];
      fa = va[i++];
      fb = vb[k++];
    }
    jumps.push_back(x);
    values.push_back(op(fa, fb));
  }
  return StepFunction::from_pieces(std::move(jumps), std::move(values));
}

}  // namespace

StepFunction add(const StepFunction& a, const StepFunction& b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}

StepFunction sub(const StepFunction& a, const StepFunction& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}

StepFunction scale(const StepFunction& a, double s) {
  std::vector<double> v = a.values();
  for (auto& x : v) x *= s;
  return StepFunction::from_pieces(a.jumps(), std::move(v));
}

StepNorm StepNorm::lp(double p, double lo, double hi) {
  if (!(p > 1 && std::isfinite(p))) throw std::invalid_argument("L^p norm needs 1 < p < inf");
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw std::invalid_argument("L^p norm needs a bounded interval");
  StepNorm m;
  m.kind = kLp;
  m.p = p;
  m.lo = lo;
  m.hi = hi;
  return m;
}

std::string StepNorm::name() const {
  if (kind == kSup) return "sup";
  return "L" + std::to_string(p).substr(0, 4) + "[" + std::to_string(lo).substr(0, 5) + "," +
         std::to_string(hi).substr(0, 5) + "]";
}

double norm(const StepFunction& f, const StepNorm& mode) {
  const auto& j = f.jumps();
  const auto& v = f.values();
  if (mode.kind == StepNorm::kSup) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  // Integrate |f|^p over [lo, hi], piece by piece.
  double acc = 0;
  double left = mode.lo;
  double cur = f(mode.lo);
  size_t k = static_cast<size_t>(std::upper_bound(j.begin(), j.end(), mode.lo) - j.begin());
  for (; k < j.size() && j[k] < mode.hi; ++k) {
    acc += std::pow(std::abs(cur), mode.p) * (j[k] - left);
    left = j[k];
    cur = v[k];
  }
  acc += std::pow(std::abs(cur), mode.p) * (mode.hi - left);
  return std::pow(acc, 1 / mode.p);
}

double step_distance(const StepFunction& f, const StepFunction& g, const StepNorm& mode) {
  return norm(sub(f, g), mode);
}

std::string step_to_json(const StepFunction& f) {
  nlohmann::json j;
  j["jumps"] = nlohmann::json::array();
  for (size_t k = 0; k < f.jumps().size(); ++k) j["jumps"].push_back({f.jumps()[k], f.values()[k]});
  return j.dump();
}

StepFunction step_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<double> jumps, values;
  for (const auto& p : j.at("jumps")) {
    jumps.push_back(p.at(0).get<double>());
    values.push_back(p.at(1).get<double>());
  }
  return StepFunction::from_pieces(std::move(jumps), std::move(values));
}

}  // namespace amen
