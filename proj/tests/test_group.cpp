#include <gtest/gtest.h>

#include <random>
#include <set>

#include "amen/group.hpp"
#include "random_sets.hpp"

namespace amen {
namespace {

FiniteGroupSet interval(const Group& g, int64_t a, int64_t b) {
  std::vector<Element> v;
  for (int64_t x = a; x < b; ++x) v.push_back(g.point({x}));
  return FiniteGroupSet(v);
}

FiniteGroupSet square(const Group& g, int64_t n) {
  std::vector<Element> v;
  for (int64_t x = 0; x < n; ++x)
    for (int64_t y = 0; y < n; ++y) v.push_back(g.point({x, y}));
  return FiniteGroupSet(v);
}

// Definition-level oracle: every x in an explicit window, tested directly.
FiniteGroupSet boundary_by_window(const Group& g, const FiniteGroupSet& k,
                                  const FiniteGroupSet& t, const std::vector<Element>& window) {
  std::set<Element> ts(t.begin(), t.end());
  std::vector<Element> out;
  for (const auto& x : window) {
    bool in = false, out_ = false;
    for (const auto& kk : k) (ts.count(g.mul(kk, x)) ? in : out_) = true;
    if (in && out_) out.push_back(x);
  }
  return FiniteGroupSet(out);
}

std::vector<Element> heis_window(const Group& g, int64_t rxy, int64_t rz) {
  std::vector<Element> w;
  for (int64_t x = -rxy; x <= rxy; ++x)
    for (int64_t y = -rxy; y <= rxy; ++y)
      for (int64_t z = -rz; z <= rz; ++z) w.push_back(g.heis(x, y, z));
  return w;
}

TEST(GroupAxioms, RandomTriplesAllFamilies) {
  std::mt19937_64 rng(7);
  for (const Group& g : {Group::zd(1), Group::zd(3), Group::heisenberg(), Group::lamplighter()}) {
    for (int rep = 0; rep < 300; ++rep) {
      const Element a = testing::random_element(g, rng, 4);
      const Element b = testing::random_element(g, rng, 4);
      const Element c = testing::random_element(g, rng, 4);
      EXPECT_EQ(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c))) << g.name();
      EXPECT_EQ(g.mul(a, g.inv(a)), g.identity());
      EXPECT_EQ(g.mul(g.inv(a), a), g.identity());
      EXPECT_EQ(g.mul(g.identity(), a), a);
      EXPECT_EQ(g.from_coords(g.coords(a)), a);
    }
  }
}

TEST(GroupAxioms, HeisenbergLaw) {
  const Group g = Group::heisenberg();
  EXPECT_EQ(g.mul(g.heis(1, 0, 0), g.heis(0, 1, 0)), g.heis(1, 1, 1));
  EXPECT_EQ(g.mul(g.heis(0, 1, 0), g.heis(1, 0, 0)), g.heis(1, 1, 0));
}

TEST(GroupAxioms, LamplighterMovesByLeftMultiplication) {
  const Group g = Group::lamplighter();
  const Element x = g.lamp({-1, 2}, 3);
  EXPECT_EQ(g.mul(g.lamp({}, 1), x), g.lamp({-1, 2}, 4));
  EXPECT_EQ(g.mul(g.lamp({0}, 0), x), g.lamp({-1, 2, 3}, 3));
  EXPECT_THROW(g.mul(g.lamp({60}, 0), g.lamp({}, 10)), std::overflow_error);
}

TEST(FiniteSet, CountingMeasure) {
  std::mt19937_64 rng(11);
  for (const Group& g : {Group::zd(2), Group::heisenberg(), Group::lamplighter()}) {
    for (int rep = 0; rep < 100; ++rep) {
      const auto a = testing::random_set(g, rng, 20, 3);
      const auto b = testing::random_set(g, rng, 20, 3);
      EXPECT_EQ(set_union(a, b).size() + set_intersection(a, b).size(), a.size() + b.size());
      const Element x = testing::random_element(g, rng, 3);
      EXPECT_EQ(right_translate(g, a, x).size(), a.size());
      EXPECT_EQ(left_translate(g, x, a).size(), a.size());
    }
  }
}

TEST(SetIndex, BoxAndHashAgree) {
  const Group g = Group::zd(2);
  const auto box = square(g, 7);
  const SetIndex idx(g, box);
  for (size_t i = 0; i < box.size(); ++i) EXPECT_EQ(idx.find(box[i]), static_cast<int64_t>(i));
  EXPECT_EQ(idx.find(g.point({7, 0})), -1);
  EXPECT_EQ(idx.find(g.point({-1, 3})), -1);
  auto holey = set_difference(box, FiniteGroupSet{g.point({3, 3})});
  const SetIndex hidx(g, holey);
  for (size_t i = 0; i < holey.size(); ++i) EXPECT_EQ(hidx.find(holey[i]), static_cast<int64_t>(i));
  EXPECT_EQ(hidx.find(g.point({3, 3})), -1);
}

TEST(KBoundary, IntervalExample) {
  const Group g = Group::zd(1);
  const auto b = k_boundary(g, interval(g, 0, 2), interval(g, 0, 10));
  EXPECT_EQ(b, (FiniteGroupSet{g.point({-1}), g.point({9})}));
}

TEST(KBoundary, SingletonKernelIsEmpty) {
  std::mt19937_64 rng(3);
  for (const Group& g : {Group::zd(2), Group::heisenberg(), Group::lamplighter()}) {
    const auto t = testing::random_set(g, rng, 30, 3);
    EXPECT_TRUE(k_boundary(g, FiniteGroupSet{g.identity()}, t).empty());
  }
}

TEST(KBoundary, SquareExample) {
  const Group g = Group::zd(2);
  const FiniteGroupSet k{g.point({0, 0}), g.point({1, 0})};
  const auto b = k_boundary(g, k, square(g, 10));
  std::vector<Element> expect;
  for (int64_t y = 0; y < 10; ++y) {
    expect.push_back(g.point({-1, y}));
    expect.push_back(g.point({9, y}));
  }
  EXPECT_EQ(b, FiniteGroupSet(expect));
}

TEST(KBoundary, EmptyArgumentsThrow) {
  const Group g = Group::zd(1);
  EXPECT_THROW(k_boundary(g, {}, interval(g, 0, 3)), std::invalid_argument);
  EXPECT_THROW(k_boundary(g, interval(g, 0, 3), {}), std::invalid_argument);
}

TEST(KBoundary, MatchesWindowScanZ2) {
  const Group g = Group::zd(2);
  std::mt19937_64 rng(5);
  std::vector<Element> window;
  for (int64_t x = -8; x <= 8; ++x)
    for (int64_t y = -8; y <= 8; ++y) window.push_back(g.point({x, y}));
  for (int rep = 0; rep < 60; ++rep) {
    const auto k = testing::random_kernel(g, rng, 5);
    const auto t = testing::random_set(g, rng, 25, 4);
    EXPECT_EQ(k_boundary(g, k, t), boundary_by_window(g, k, t, window));
  }
}

TEST(KBoundary, MatchesWindowScanHeisenberg) {
  const Group g = Group::heisenberg();
  std::mt19937_64 rng(6);
  const auto window = heis_window(g, 4, 12);
  for (int rep = 0; rep < 40; ++rep) {
    const auto k = testing::random_kernel(g, rng, 4);
    const auto t = testing::random_set(g, rng, 20, 2);
    EXPECT_EQ(k_boundary(g, k, t), boundary_by_window(g, k, t, window));
  }
}

TEST(KBoundary, SerialAndParallelAgree) {
  const Group g = Group::heisenberg();
  const auto seq = folner_generator(g);
  const auto k = metric_ball(g, 2, Metric::kWord);
  const auto t = seq(4);
  EXPECT_EQ(k_boundary(g, k, t, Exec::kSerial), k_boundary(g, k, t, Exec::kParallel));
  EXPECT_EQ(product_set(g, k, t, Exec::kSerial), product_set(g, k, t, Exec::kParallel));
}

TEST(KBoundary, CountingKernelMatchesDirectScan) {
  std::mt19937_64 rng(12);
  for (int d = 1; d <= 3; ++d) {
    const Group g = Group::zd(d);
    for (int rep = 0; rep < 40; ++rep) {
      const auto k = testing::random_set(g, rng, 12, 3);
      const auto t = testing::random_set(g, rng, 60, 6);
      EXPECT_EQ(k_boundary(g, k, t, Exec::kSerial), k_boundary_scan(g, k, t, Exec::kSerial));
      EXPECT_EQ(k_boundary(g, k, t, Exec::kParallel), k_boundary_scan(g, k, t, Exec::kSerial));
    }
    // Boxes exercise long runs.
    const auto seq = folner_generator(g);
    const auto k = metric_ball(g, 2, Metric::kSup);
    EXPECT_EQ(k_boundary(g, k, seq(9)), k_boundary_scan(g, k, seq(9)));
  }
}

TEST(InvarianceRatio, Examples) {
  const Group g = Group::zd(1);
  EXPECT_DOUBLE_EQ(invariance_ratio(g, interval(g, 0, 2), interval(g, 0, 10)), 0.2);
  EXPECT_DOUBLE_EQ(invariance_ratio(g, FiniteGroupSet{g.identity()}, interval(g, 0, 10)), 0.0);
  EXPECT_THROW(invariance_ratio(g, interval(g, 0, 2), {}), std::invalid_argument);
}

TEST(InvarianceRatio, SquaresDecrease) {
  const Group g = Group::zd(2);
  const FiniteGroupSet k{g.point({0, 0}), g.point({1, 0}), g.point({-1, 0}), g.point({0, 1}),
                         g.point({0, -1})};
  double prev = 1e9;
  for (int n : {8, 16, 32, 64}) {
    const double r = invariance_ratio(g, k, square(g, n));
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(ProductSet, Examples) {
  const Group z = Group::zd(1);
  EXPECT_EQ(product_set(z, interval(z, 0, 2), interval(z, 0, 2)), interval(z, 0, 3));
  const auto t = interval(z, 3, 9);
  EXPECT_EQ(product_set(z, FiniteGroupSet{z.identity()}, t), t);
  const Group h = Group::heisenberg();
  EXPECT_EQ(product_set(h, FiniteGroupSet{h.heis(1, 0, 0)}, FiniteGroupSet{h.heis(0, 1, 0)}),
            FiniteGroupSet{h.heis(1, 1, 1)});
}

TEST(ProductSet, SizeBoundAndDenseMatchesHash) {
  std::mt19937_64 rng(9);
  const Group g = Group::zd(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto k = testing::random_set(g, rng, 12, 5);
    const auto t = testing::random_set(g, rng, 12, 5);
    const auto kt = product_set(g, k, t);
    EXPECT_LE(kt.size(), k.size() * t.size());
    std::set<Element> ref;
    for (const auto& a : k)
      for (const auto& b : t) ref.insert(g.mul(a, b));
    EXPECT_EQ(kt, FiniteGroupSet(std::vector<Element>(ref.begin(), ref.end())));
  }
}

TEST(Folner, ZdOneDimIsInterval) {
  const Group g = Group::zd(1);
  const auto seq = folner_generator(g);
  for (int n = 1; n < 6; ++n) EXPECT_EQ(seq(n), interval(g, 0, n));
  EXPECT_THROW(seq(0), std::invalid_argument);
}

TEST(Folner, NestedWithIdentity) {
  for (const Group& g : {Group::zd(2), Group::heisenberg(), Group::lamplighter()}) {
    const auto seq = folner_generator(g);
    EXPECT_TRUE(seq(1).contains(g.identity()));
    for (int n = 1; n < 3; ++n) EXPECT_TRUE(is_subset(seq(n), seq(n + 1))) << g.name();
  }
}

TEST(Folner, HeisenbergBoxesRatioDecreases) {
  const Group g = Group::heisenberg();
  const auto seq = folner_generator(g);
  const auto ball = metric_ball(g, 1, Metric::kWord);
  EXPECT_EQ(ball.size(), 5u);
  double prev = 1e9;
  for (int n : {4, 8, 16}) {
    const double r = invariance_ratio(g, ball, seq(n));
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(Folner, LamplighterBoxesRatioDecreases) {
  const Group g = Group::lamplighter();
  const auto seq = folner_generator(g);
  const auto ball = metric_ball(g, 1, Metric::kWord);
  double prev = 1e9;
  for (int n : {1, 2, 3, 4}) {
    const double r = invariance_ratio(g, ball, seq(n));
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(Folner, UnsupportedTag) {
  EXPECT_THROW(folner_generator(Group::zd(1), "balls"), std::invalid_argument);
}

TEST(GrowthConstants, IntervalsClosedForm) {
  const auto gc = growth_constants(folner_generator(Group::zd(1)), 10);
  EXPECT_DOUBLE_EQ(gc.tempelman, 19.0 / 10.0);
  EXPECT_LE(gc.shulman, gc.tempelman);
  EXPECT_LE(gc.tempelman, 2.0);
}

TEST(GrowthConstants, SquaresBelowFour) {
  const auto gc = growth_constants(folner_generator(Group::zd(2)), 10);
  EXPECT_DOUBLE_EQ(gc.tempelman, 19.0 * 19.0 / 100.0);
  EXPECT_LT(gc.tempelman, 4.0);
}

TEST(GrowthConstants, SingletonSequence) {
  const auto gc = growth_constants(folner_generator(Group::heisenberg(), FolnerKind::kTrivial), 5);
  EXPECT_DOUBLE_EQ(gc.tempelman, 1.0);
  EXPECT_DOUBLE_EQ(gc.shulman, 1.0);
  EXPECT_THROW(growth_constants(folner_generator(Group::zd(1)), 1), std::invalid_argument);
}

TEST(MetricBoundary, IntervalExample) {
  const Group g = Group::zd(1);
  const auto mb = metric_boundary(g, interval(g, 0, 10), 1, Metric::kSup);
  EXPECT_EQ(mb.interior, interval(g, 1, 9));
  EXPECT_EQ(mb.closure, interval(g, -1, 11));
  EXPECT_EQ(mb.boundary.size(), 4u);
}

TEST(MetricBoundary, RadiusZero) {
  const Group g = Group::heisenberg();
  const auto q = folner_generator(g)(2);
  const auto mb = metric_boundary(g, q, 0, Metric::kWord);
  EXPECT_EQ(mb.interior, q);
  EXPECT_EQ(mb.closure, q);
  EXPECT_TRUE(mb.boundary.empty());
  EXPECT_THROW(metric_boundary(g, q, -1, Metric::kWord), std::invalid_argument);
  EXPECT_THROW(metric_ball(g, 1, Metric::kSup), std::invalid_argument);
}

TEST(MetricBoundary, SquaresShrink) {
  const Group g = Group::zd(2);
  double prev = 1e9;
  for (int n : {8, 16, 32}) {
    const auto q = square(g, n);
    const auto mb = metric_boundary(g, q, 2, Metric::kSup);
    EXPECT_TRUE(is_subset(mb.interior, q));
    EXPECT_TRUE(is_subset(q, mb.closure));
    const double r = static_cast<double>(mb.boundary.size()) / q.size();
    EXPECT_LT(r, prev);
    prev = r;
  }
}

// The r-boundary is the K-boundary for K the closed r-ball.
TEST(MetricBoundary, EqualsBallBoundary) {
  std::mt19937_64 rng(21);
  for (const Group& g : {Group::zd(2), Group::heisenberg(), Group::lamplighter()}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto q = testing::random_set(g, rng, 25, 3);
      const auto m = default_metric(g);
      EXPECT_EQ(metric_boundary(g, q, 1, m).boundary, k_boundary(g, metric_ball(g, 1, m), q));
    }
  }
}

class BoundaryCalculus : public ::testing::TestWithParam<int> {};

TEST_P(BoundaryCalculus, RandomInstances) {
  const Group g = GetParam() == 0 ? Group::zd(2)
                  : GetParam() == 1 ? Group::heisenberg()
                                    : Group::lamplighter();
  std::mt19937_64 rng(100 + GetParam());
  for (int rep = 0; rep < 50; ++rep) {
    const auto k = testing::random_kernel(g, rng, 4);
    const auto t = testing::random_set(g, rng, 20, 3);
    const auto s = testing::random_set(g, rng, 20, 3);
    const Element x = testing::random_element(g, rng, 3);
    const auto bt = k_boundary(g, k, t);
    const auto bs = k_boundary(g, k, s);
    const auto both = set_union(bt, bs);
    EXPECT_EQ(bt, k_boundary_of_complement(g, k, t));
    EXPECT_TRUE(is_subset(k_boundary(g, k, set_union(s, t)), both));
    const auto diff = set_difference(s, t);
    if (!diff.empty()) EXPECT_TRUE(is_subset(k_boundary(g, k, diff), both));
    EXPECT_EQ(k_boundary(g, k, right_translate(g, t, x)), right_translate(g, bt, x));
    const auto small_s = testing::random_set(g, rng, 4, 2);
    EXPECT_TRUE(is_subset(k_boundary(g, k, product_set(g, t, small_s)),
                          product_set(g, bt, small_s)));
  }
}

INSTANTIATE_TEST_SUITE_P(Families, BoundaryCalculus, ::testing::Values(0, 1, 2));

}  // namespace
}  // namespace amen
