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

#include "amen/process.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace amen {

CylinderFunction cylinder_constant(double c) {
  CylinderFunction f;
  f.phi = [c](const std::vector<double>&) { return c; };
  f.sup = std::abs(c);
  f.mean = c;
  f.name = "constant";
  return f;
}

CylinderFunction cylinder_coordinate(const SiteLaw& law) {
  CylinderFunction f;
  f.window = {Element{}};
  f.phi = [](const std::vector<double>& w) { return w[0]; };
  f.sup = law.sup_abs();
  f.mean = law.mean();
  f.name = "coordinate";
  return f;
}

CylinderFunction cylinder_threshold(double t, const SiteLaw& law) {
  CylinderFunction f;
  f.window = {Element{}};
  f.phi = [t](const std::vector<double>& w) { return w[0] > t ? 1.0 : 0.0; };
  f.sup = 1;
  if (law.kind == SiteLaw::kUniform)
    f.mean = std::clamp((law.b - t) / (law.b - law.a), 0.0, 1.0);
  else
    f.mean = t < 0 ? 1.0 : t < 1 ? law.a : 0.0;
  f.name = "threshold";
  return f;
}

CylinderFunction cylinder_difference(const Element& other, const SiteLaw& law) {
  CylinderFunction f;
  f.window = {Element{}, other};
  f.phi = [](const std::vector<double>& w) { return w[0] - w[1]; };
  f.sup = 2 * law.sup_abs();
  f.mean = 0;  // both sites share the law
  f.name = "difference";
  return f;
}

double AdditiveProcess::operator()(const FiniteGroupSet& q, const ConfigurationSpace& omega) const {
  // Summing in value order makes F a function of the multiset of site terms,
  // so relabelled sets (Q g) give bit-identical totals.
  std::vector<double> terms;
  terms.reserve(q.size());
  for (const auto& g : q) terms.push_back(kernel(omega, g));
  std::sort(terms.begin(), terms.end());
  double s = 0;
  for (double t : terms) s += t;
  return s;
}

ConfigurationSpace AdditiveProcess::sample(uint64_t i) const {
  return ConfigurationSpace(group, law, splitmix64(base_seed ^ splitmix64(i)));
}

AdditiveProcess make_process(const std::string& kind, const ProcessParams& params, const Group& g) {
  AdditiveProcess f;
  f.kind = kind;
  f.group = g;
  f.base_seed = params.base_seed;
  if (kind == "bernoulli-point-count") {
    f.law = SiteLaw::bernoulli(params.p);
    f.kernel = [](const ConfigurationSpace& omega, const Element& x) { return omega.value(x); };
    f.K = 1;
    f.kernel_mean = params.p;
  } else if (kind == "absolutely-continuous") {
    if (!params.f.phi) throw std::invalid_argument("absolutely-continuous process needs a cylinder function");
    f.law = params.law;
    const CylinderFunction cf = params.f;
    f.kernel = [cf, g](const ConfigurationSpace& omega, const Element& x) {
      // (x.omega)(w) = omega(w x).
      std::vector<double> vals;
      vals.reserve(cf.window.size());
      for (const auto& w : cf.window) vals.push_back(omega.value(g.mul(w, x)));
      return cf.phi(vals);
    };
    f.K = cf.sup;
    f.kernel_mean = cf.mean;
  } else {
    throw std::invalid_argument("unsupported process kind: " + kind);
  }
  return f;
}

AdditiveProcess dominating_process(const AdditiveProcess& f) {
  AdditiveProcess d = f;
  d.kind = "dominating(" + f.kind + ")";
  const auto k = f.kernel;
  d.kernel = [k](const ConfigurationSpace& omega, const Element& x) { return std::abs(k(omega, x)); };
  d.kernel_mean = std::nan("");
  return d;
}

VitaliCover vitali_cover(const Group& g, const std::vector<Element>& b, const std::vector<int>& theta,
                         const std::vector<FiniteGroupSet>& levels, int first_level) {
  if (b.size() != theta.size()) throw std::invalid_argument("vitali_cover: theta must be total on B");
  if (levels.empty()) throw std::invalid_argument("vitali_cover: no levels");
  const int last_level = first_level + static_cast<int>(levels.size()) - 1;
  for (int t : theta)
    if (t < first_level || t > last_level) throw std::invalid_argument("vitali_cover: theta out of range");
  for (size_t k = 1; k < levels.size(); ++k)
    if (!is_subset(levels[k - 1], levels[k])) throw std::invalid_argument("vitali_cover: levels must be nested");
  auto level = [&](int j) -> const FiniteGroupSet& { return levels[static_cast<size_t>(j - first_level)]; };

  // Canonical order within a level.
  std::vector<size_t> order(b.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return theta[x] != theta[y] ? theta[x] > theta[y] : b[x] < b[y];
  });
  VitaliCover out;
  std::unordered_set<Element, ElementHash> taken;
  for (size_t i : order) {
    const auto shape = right_translate(g, level(theta[i]), b[i]);
    bool free = true;
    for (const auto& x : shape)
      if (taken.count(x)) {
        free = false;
        break;
      }
    if (!free) continue;
    taken.insert(shape.begin(), shape.end());
    out.chosen.push_back(i);
  }

  // Post-hoc brute-force checks of both properties.
  size_t total = 0;
  std::vector<Element> all;
  for (size_t i : out.chosen) {
    const auto shape = right_translate(g, level(theta[i]), b[i]);
    total += shape.size();
    all.insert(all.end(), shape.begin(), shape.end());
  }
  std::sort(all.begin(), all.end());
  out.disjoint = std::unique(all.begin(), all.end()) == all.end() && all.size() == total;
  std::unordered_set<Element, ElementHash> reach;
  for (size_t i : out.chosen) {
    const auto& u = level(theta[i]);
    const auto blob = right_translate(g, product_set(g, inverse_set(g, u), u), b[i]);
    reach.insert(blob.begin(), blob.end());
  }
  out.covers = std::all_of(b.begin(), b.end(), [&](const Element& x) { return reach.count(x) > 0; });
  return out;
}

double TailEstimate::clamped_bound() const { return std::min(1.0, bound); }

bool TailEstimate::plausible() const {
  const double bound_sigma = kappa * kappa_tilde / lambda * sup_l1_sigma;
  return tail <= clamped_bound() + 3 * tail_sigma + 3 * bound_sigma;
}

TailEstimate maximal_tail_estimate(const AdditiveProcess& f, const FolnerSequence& seq, double lambda, int m,
                                   int j_max, int n_samples, Exec exec) {
  if (n_samples < 100) throw std::invalid_argument("maximal_tail_estimate needs at least 100 samples");
  if (!(lambda > 0)) throw std::invalid_argument("maximal_tail_estimate needs lambda > 0");
  if (m < 1 || j_max < m) throw std::invalid_argument("maximal_tail_estimate needs 1 <= M <= J");
  std::vector<FiniteGroupSet> sets;
  for (int j = m; j <= j_max; ++j) sets.push_back(seq(j));
  const size_t nj = sets.size();
  // Per sample: exceedance flag and |F(U_j)|/|U_j| for each j.
  std::vector<uint8_t> hit(static_cast<size_t>(n_samples));
  std::vector<double> ratios(static_cast<size_t>(n_samples) * nj);
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (int s = 0; s < n_samples; ++s) {
    const auto omega = f.sample(static_cast<uint64_t>(s));
    double mx = 0;
    for (size_t j = 0; j < nj; ++j) {
      const double r = std::abs(f(sets[j], omega)) / static_cast<double>(sets[j].size());
      ratios[static_cast<size_t>(s) * nj + j] = r;
      mx = std::max(mx, r);
    }
    hit[static_cast<size_t>(s)] = mx > lambda;
  }
  TailEstimate t;
  t.lambda = lambda;
  const double n = n_samples;
  double hits = 0;
  for (uint8_t h : hit) hits += h;
  t.tail = hits / n;
  t.tail_sigma = std::sqrt(t.tail * (1 - t.tail) / n);
  for (size_t j = 0; j < nj; ++j) {
    double mean = 0, sq = 0;
    for (int s = 0; s < n_samples; ++s) mean += ratios[static_cast<size_t>(s) * nj + j];
    mean /= n;
    for (int s = 0; s < n_samples; ++s) {
      const double d = ratios[static_cast<size_t>(s) * nj + j] - mean;
      sq += d * d;
    }
    if (mean > t.sup_l1) {
      t.sup_l1 = mean;
      t.sup_l1_sigma = std::sqrt(sq / (n - 1) / n);
    }
  }
  t.kappa = 1;
  t.kappa_tilde = growth_constants(seq, std::max(j_max, 2)).tempelman;
  t.bound = t.kappa * t.kappa_tilde / lambda * t.sup_l1;
  return t;
}

bool TruncatedProcess::in_bad_set(const ConfigurationSpace& omega) const {
  const auto dom = dominating_process(base);
  for (const auto& u : prefix)
    if (dom(u, omega) / static_cast<double>(u.size()) > n) return true;
  return false;
}

double TruncatedProcess::operator()(const FiniteGroupSet& q, const ConfigurationSpace& omega) const {
  return in_bad_set(omega) ? 0.0 : base(q, omega);
}

TruncatedProcess truncate_process(const AdditiveProcess& f, double n, const FolnerSequence& seq, int j_max) {
  if (j_max < 1) throw std::invalid_argument("truncate_process needs a nonempty prefix");
  TruncatedProcess t;
  t.base = f;
  t.n = n;
  for (int j = 1; j <= j_max; ++j) t.prefix.push_back(seq(j));
  return t;
}

std::vector<double> pointwise_trajectory(const AdditiveProcess& f, const ConfigurationSpace& omega,
                                         const FolnerSequence& seq, const std::vector<int>& js) {
  std::vector<double> out;
  out.reserve(js.size());
  for (int j : js) {
    const auto u = seq(j);
    out.push_back(u.empty() ? 0.0 : f(u, omega) / static_cast<double>(u.size()));
  }
  return out;
}

}  // namespace amen
