// Hand-rolled generators for property tests and the acceptance run.

#ifndef AMEN_TESTS_RANDOM_SETS_HPP_
#define AMEN_TESTS_RANDOM_SETS_HPP_

#include <random>
#include <vector>

#include "amen/group.hpp"

namespace amen::testing {

// Element with every coordinate (or lamp site / position) within radius r.
inline Element random_element(const Group& g, std::mt19937_64& rng, int r) {
  std::uniform_int_distribution<int64_t> u(-r, r);
  switch (g.family()) {
    case Family::kZd: {
      Element e;
      for (int i = 0; i < g.dim(); ++i) e.c[i] = u(rng);
      return e;
    }
    case Family::kHeisenberg:
      return g.heis(u(rng), u(rng), u(rng));
    case Family::kLamplighter: {
      std::vector<int64_t> lit;
      for (int s = -r; s <= r; ++s)
        if (rng() & 1) lit.push_back(s);
      return g.lamp(lit, u(rng));
    }
  }
  return {};
}

inline FiniteGroupSet random_set(const Group& g, std::mt19937_64& rng, int max_size, int r) {
  std::uniform_int_distribution<int> sz(1, max_size);
  const int n = sz(rng);
  std::vector<Element> v;
  for (int i = 0; i < n; ++i) v.push_back(random_element(g, rng, r));
  return FiniteGroupSet(std::move(v));
}

// K always contains the identity, as boundary sets usually do.
inline FiniteGroupSet random_kernel(const Group& g, std::mt19937_64& rng, int max_size) {
  FiniteGroupSet k = random_set(g, rng, max_size, 1);
  return set_union(k, FiniteGroupSet{g.identity()});
}

}  // namespace amen::testing

#endif  // AMEN_TESTS_RANDOM_SETS_HPP_
