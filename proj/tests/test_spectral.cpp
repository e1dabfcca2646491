#include "amen/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "random_sets.hpp"

namespace amen {
namespace {

FiniteGroupSet interval(const Group& g, int64_t a, int64_t b) {
  std::vector<Element> v;
  for (int64_t x = a; x < b; ++x) v.push_back(g.point({x}));
  return FiniteGroupSet(std::move(v));
}

FiniteGroupSet rect(const Group& g, int64_t x0, int64_t x1, int64_t y0, int64_t y1) {
  std::vector<Element> v;
  for (int64_t x = x0; x < x1; ++x)
    for (int64_t y = y0; y < y1; ++y) v.push_back(g.point({x, y}));
  return FiniteGroupSet(std::move(v));
}

SymMatrix path_matrix(int n) {
  SymMatrix h(n);
  for (int i = 0; i + 1 < n; ++i) h(i, i + 1) = h(i + 1, i) = 1;
  return h;
}

SymMatrix random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  SymMatrix h(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = nd(rng);
  return h;
}

TEST(EigenCounting, SmallExamples) {
  SymMatrix a(2);
  a(0, 1) = a(1, 0) = 1;
  const auto f = eigen_counting_function(a);
  ASSERT_EQ(f.jumps().size(), 2u);
  EXPECT_NEAR(f.jumps()[0], -1, 1e-12);
  EXPECT_NEAR(f.jumps()[1], 1, 1e-12);
  EXPECT_EQ(f(0), 1);

  const auto z = eigen_counting_function(SymMatrix(5));
  ASSERT_EQ(z.jumps().size(), 1u);
  EXPECT_EQ(z.jumps()[0], 0);
  EXPECT_EQ(z.total(), 5);

  const auto p = eigen_counting_function(path_matrix(3));
  ASSERT_EQ(p.jumps().size(), 3u);
  // Jumps sit on the energy grid.
  EXPECT_NEAR(p.jumps()[0], -std::sqrt(2.0), kEnergyResolution);
  EXPECT_NEAR(p.jumps()[1], 0, kEnergyResolution);
  EXPECT_NEAR(p.jumps()[2], std::sqrt(2.0), kEnergyResolution);
  EXPECT_EQ(p(0), 2);
  EXPECT_EQ(eigen_counting_function(SymMatrix(0)).total(), 0);
}

TEST(EigenCounting, PathSpectrumUpTo500) {
  for (int n : {1, 2, 3, 7, 64, 199, 500}) {
    const auto ev = symmetric_eigenvalues(path_matrix(n));
    ASSERT_EQ(ev.size(), static_cast<size_t>(n));
    for (int k = 1; k <= n; ++k) {
      // Ascending order pairs with descending k.
      const double expect = 2 * std::cos((n + 1 - k) * std::numbers::pi / (n + 1));
      EXPECT_NEAR(ev[static_cast<size_t>(k - 1)], expect, 1e-9) << n << " " << k;
    }
  }
}

TEST(EigenCounting, TraceAndFrobeniusInvariants) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 5 + static_cast<int>(rng() % 80);
    const auto h = random_symmetric(rng, n);
    const auto ev = symmetric_eigenvalues(h);
    double tr = 0, fro = 0, s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        fro += h(i, j) * h(i, j);
        if (i == j) tr += h(i, i);
      }
    for (double e : ev) {
      s1 += e;
      s2 += e * e;
    }
    EXPECT_NEAR(s1, tr, 1e-9 * n);
    EXPECT_NEAR(s2, fro, 1e-9 * fro);
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
  }
}

TEST(EigenCounting, CapRefusal) {
  try {
    eigen_counting_function(path_matrix(20), 10);
    FAIL();
  } catch (const DimensionCapExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("inertia_count"), std::string::npos);
  }
}

TEST(Inertia, Examples) {
  SymMatrix a(2);
  a(0, 1) = a(1, 0) = 1;
  EXPECT_EQ(inertia_count(a, 0), 1);
  const auto h = path_matrix(30);
  EXPECT_EQ(inertia_count(h, -h.norm_inf() - 0.1), 0);
  EXPECT_EQ(inertia_count(h, h.norm_inf() + 0.1), 30);
  // Exactly at an eigenvalue (0 for odd paths) the closed count includes it.
  EXPECT_EQ(inertia_count(path_matrix(5), 0), 3);
  const auto in = ldlt_inertia(path_matrix(4));
  EXPECT_EQ(in.negative, 2);
  EXPECT_EQ(in.positive, 2);
  EXPECT_EQ(ldlt_inertia(SymMatrix(3)).zero, 3);
}

// Two independent routes: LDL^T inertia against Householder + Sturm bisection.
TEST(Inertia, AgreesWithEigenCountingAwayFromEigenvalues) {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 120);
    SymMatrix h = random_symmetric(rng, n);
    if (rep % 4 == 0)  // banded
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (std::abs(i - j) > 3) h(i, j) = 0;
    const auto f = eigen_counting_function(h);
    const double guard = std::max(1e-12 * h.norm_inf(), kEnergyResolution);
    std::uniform_real_distribution<double> ue(-h.norm_inf(), h.norm_inf());
    for (int k = 0; k < 50; ++k) {
      const double e = ue(rng);
      bool near = false;
      for (double j : f.jumps()) near |= std::abs(j - e) <= guard;
      if (near) continue;
      EXPECT_EQ(inertia_count(h, e), f(e)) << "n=" << n << " e=" << e;
    }
  }
}

TEST(Restrict, FreePathInterior) {
  const auto ens = free_ensemble(1);
  const Group& g = ens.group;
  const int n = 11;
  const auto r = restrict_operator(ens, ens.omega(0), interval(g, 0, n + 2));
  ASSERT_EQ(r.h.n(), n);
  EXPECT_EQ(r.sites, interval(g, 1, n + 1));
  const auto ev = symmetric_eigenvalues(r.h);
  for (int k = 1; k <= n; ++k)
    EXPECT_NEAR(ev[static_cast<size_t>(k - 1)], 2 * std::cos((n + 1 - k) * std::numbers::pi / (n + 1)), 1e-12);
  EXPECT_EQ(restrict_operator(ens, ens.omega(0), interval(g, 0, 2)).h.n(), 0);
  EXPECT_EQ(restrict_operator(ens, ens.omega(0), FiniteGroupSet{}).h.n(), 0);
}

TEST(Restrict, AndersonEntries) {
  const auto ens = anderson_ensemble(2, 0, 1);
  const Group& g = ens.group;
  const auto omega = ens.omega(9);
  std::mt19937_64 rng(3);
  const auto q = set_union(rect(g, 0, 6, 0, 5), testing::random_set(g, rng, 30, 4));
  const auto r = restrict_operator(ens, omega, q);
  ASSERT_TRUE(r.h.symmetric());
  for (int i = 0; i < r.h.n(); ++i) {
    const auto xi = g.coords(r.sites[static_cast<size_t>(i)]);
    EXPECT_EQ(r.h(i, i), omega.value(r.sites[static_cast<size_t>(i)]));
    for (int j = 0; j < r.h.n(); ++j) {
      if (i == j) continue;
      const auto xj = g.coords(r.sites[static_cast<size_t>(j)]);
      const int64_t l1 = std::abs(xi[0] - xj[0]) + std::abs(xi[1] - xj[1]);
      EXPECT_EQ(r.h(i, j), l1 == 1 ? 1.0 : 0.0);
    }
  }
}

TEST(Ensemble, Validation) {
  auto ens = free_ensemble(1);
  ens.kernel.push_back({ens.group.point({2}), 0.5});
  EXPECT_THROW(ens.validate(), std::invalid_argument);  // asymmetric and out of range
  ens.R = 2;
  EXPECT_THROW(ens.validate(), std::invalid_argument);  // still asymmetric
  ens.kernel.push_back({ens.group.point({-2}), 0.5});
  EXPECT_NO_THROW(ens.validate());
  EXPECT_FALSE(ens.separable());
  auto bad = free_ensemble(1);
  bad.group = Group::heisenberg();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(SeparablePath, MatchesDenseOnBoxes) {
  for (int d = 1; d <= 3; ++d) {
    auto ens = free_ensemble(d);
    const auto f = counting_set_function(ens, ens.omega(0));
    auto dense = ens;
    dense.kernel_name = "dense";
    dense.random_potential = true;  // disable the fast path, with V == 0
    dense.potential = SiteLaw::uniform(0, 1e-300);
    const auto fd = counting_set_function(dense, dense.omega(0));
    const auto seq = folner_generator(ens.group);
    for (int n : {3, 5, 8, d == 3 ? 9 : 17}) {
      const auto a = f(seq(n));
      const auto b = fd(seq(n));
      ASSERT_EQ(a.total(), b.total());
      // Compare sorted spectra through the step functions at jump midpoints.
      std::vector<double> pts;
      for (size_t k = 0; k + 1 < a.jumps().size(); ++k) pts.push_back(0.5 * (a.jumps()[k] + a.jumps()[k + 1]));
      for (double e : pts) EXPECT_EQ(a(e), b(e)) << d << " " << n << " " << e;
    }
  }
}

TEST(CountingSetFunction, SupNormIsInteriorSize) {
  const auto ens = anderson_ensemble(2, 0, 1);
  const auto f = counting_set_function(ens, ens.omega(4));
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto q = set_union(rect(ens.group, 0, 4, 0, 4), testing::random_set(ens.group, rng, 50, 4));
    const auto v = f(q);
    const auto interior = metric_boundary(ens.group, q, 1, Metric::kSup).interior;
    EXPECT_EQ(norm(v), static_cast<double>(interior.size()));
    EXPECT_LE(norm(v), f.C * static_cast<double>(q.size()));
    EXPECT_TRUE(v.nondecreasing());
    // L^p(I) bound by |I|^{1/p} times the sup norm.
    EXPECT_LE(norm(v, StepNorm::lp(2, -5, 5)), std::sqrt(10.0) * norm(v) + 1e-12);
  }
}

TEST(CountingSetFunction, EquivarianceExact) {
  const auto ens = anderson_ensemble(2, 0, 1);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto q = set_union(rect(ens.group, 0, 3, 0, 3), testing::random_set(ens.group, rng, 40, 4));
    const auto g = testing::random_element(ens.group, rng, 50);
    const auto omega = ens.omega(rng());
    const auto lhs = counting_set_function(ens, omega)(right_translate(ens.group, q, g));
    const auto rhs = counting_set_function(ens, omega.shifted(g))(q);
    EXPECT_EQ(lhs, rhs);
    const double e = std::uniform_real_distribution<double>(-5, 5)(rng);
    EXPECT_EQ(lhs(e), rhs(e));
  }
}

TEST(CountingSetFunction, SplitBoxDefectWithinBoundary) {
  const auto ens = anderson_ensemble(2, 0, 1);
  const auto f = counting_set_function(ens, ens.omega(11));
  const Group& g = ens.group;
  std::mt19937_64 rng(8);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const int64_t w = 8 + static_cast<int64_t>(rng() % 10), h = 8 + static_cast<int64_t>(rng() % 10);
    const int64_t cx = 2 + static_cast<int64_t>(rng() % static_cast<uint64_t>(w - 3));
    const int64_t cy = 2 + static_cast<int64_t>(rng() % static_cast<uint64_t>(h - 3));
    const std::vector<FiniteGroupSet> parts{rect(g, 0, cx, 0, cy), rect(g, cx, w, 0, cy), rect(g, 0, cx, cy, h),
                                            rect(g, cx, w, cy, h)};
    const auto r = additivity_defect(f, rect(g, 0, w, 0, h), parts);
    EXPECT_LE(r.defect, r.budget);
    // Budget from the definition: 2 |metric boundary of radius 2|.
    double budget = 0;
    for (const auto& p : parts) budget += 2.0 * static_cast<double>(metric_boundary(g, p, 2, Metric::kSup).boundary.size());
    EXPECT_EQ(r.budget, budget);
    worst = std::max(worst, r.defect / r.budget);
  }
  RecordProperty("worst_defect_ratio", std::to_string(worst));
}

TEST(CountingSetFunction, JsonFormat) {
  const auto f = eigen_counting_function(path_matrix(3));
  const auto text = step_to_json(f);
  EXPECT_NE(text.find("\"jumps\""), std::string::npos);
  EXPECT_EQ(step_from_json(text), f);
}

TEST(IdsExperiment, FreeChainApproachesOracle) {
  const auto ens = free_ensemble(1);
  IdsOptions o;
  o.ns = {25, 50, 100, 200};
  o.seeds = {1};
  const auto rep = ids_experiment(ens, folner_generator(ens.group), o);
  ASSERT_EQ(rep.rows.size(), 4u);
  double prev = 1;
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.dim, static_cast<size_t>(r.n - 2));
    EXPECT_LT(r.dist_oracle, prev);
    prev = r.dist_oracle;
  }
  EXPECT_LE(rep.find(1, 200)->dist_oracle, 0.05);
  EXPECT_TRUE(rep.consecutive_decreasing(1));
}

TEST(IdsExperiment, CapTruncatesRange) {
  const auto ens = anderson_ensemble(2, 0, 1);
  IdsOptions o;
  o.ns = {4, 6, 12};
  o.seeds = {1, 2, 3};
  o.cap = 50;
  const auto rep = ids_experiment(ens, folner_generator(ens.group), o);
  ASSERT_EQ(rep.truncated, std::vector<int>{12});
  EXPECT_EQ(rep.rows.size(), 6u);
  EXPECT_EQ(rep.mean.size(), 2u);
  EXPECT_GT(rep.cross_seed.at(6), 0);
  for (const auto& r : rep.rows) EXPECT_EQ(r.dist_oracle, -1);
  // Schedule independence: the same cell computed alone is identical.
  IdsOptions one = o;
  one.seeds = {2};
  one.ns = {6};
  EXPECT_EQ(ids_experiment(ens, folner_generator(ens.group), one).rows[0].normalized, rep.find(2, 6)->normalized);
}

TEST(LimitEstimate, FreeChainMatchesOracle) {
  const auto ens = free_ensemble(1);
  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) grid.push_back(-5 + 10.0 * k / 400);
  const auto est = ensemble_limit_estimate(ens, grid, 10, 100);
  EXPECT_LE(grid_sup_distance(est, path_oracle_profile(2000)), 0.05);
  EXPECT_EQ(est.profile.front(), 0);
  EXPECT_NEAR(est.profile.back(), 1, 1e-12);
  for (double s : est.std_error) EXPECT_LE(s, 1e-15);  // no randomness
  EXPECT_THROW(ensemble_limit_estimate(ens, grid, 9, 100), std::invalid_argument);
}

TEST(LimitEstimate, WeightsAreACenterSpectralMeasure) {
  // Oracle: for the free path the center weight of eigenvalue k is
  // 2/(m+1) sin^2(k pi c/(m+1)) with c the center position (1-based).
  const auto ens = free_ensemble(1);
  const int r = 6, m = 2 * r + 1;
  std::vector<double> grid;
  for (int k = 1; k <= m; ++k) grid.push_back(2 * std::cos(k * std::numbers::pi / (m + 1)) + 1e-6);
  const auto est = ensemble_limit_estimate(ens, grid, 10, r);
  for (size_t i = 0; i < grid.size(); ++i) {
    double expect = 0;
    for (int k = 1; k <= m; ++k)
      if (2 * std::cos(k * std::numbers::pi / (m + 1)) <= grid[i])
        expect += 2.0 / (m + 1) * std::pow(std::sin(k * std::numbers::pi * (r + 1) / (m + 1)), 2);
    EXPECT_NEAR(est.profile[i], expect, 1e-10) << i;
  }
}

}  // namespace
}  // namespace amen
