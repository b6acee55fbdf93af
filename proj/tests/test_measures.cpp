#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "condquant/measures.hpp"
#include "test_util.hpp"

using namespace condquant;

TEST_CASE("construction contracts") {
  CHECK_THROWS_AS(empirical({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(empirical({1.0, 2.0, 3.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure({1.0, 2.0}, {0.5, 0.6}, 1),
                  std::invalid_argument);

  auto one = empirical({1.0}, 1);
  CHECK(one.size() == 1);
  CHECK(one.weight(0) == 1.0);

  auto two = empirical({0.0, 2.0}, 1);
  CHECK(two.weight(0) == 0.5);
  CHECK(two.weight(1) == 0.5);

  Rng rng(1);
  auto seven = empirical(testutil::random_points(rng, 7, 2), 2);
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    CHECK(seven.weight(i) == 1.0 / 7.0);
    sum += seven.weight(i);
  }
  CHECK(std::abs(sum - 1.0) < 1e-15);
}

TEST_CASE("distance identity and single Diracs") {
  KernelParams p(0.5, 1.2);
  auto m = empirical({0.3, -1.0, 2.0, 0.1}, 2);
  CHECK(std::abs(distance_squared(p, m, m)) < 1e-12);

  // d(delta_y, delta_y2)^2 = h(y, y2)
  auto d1 = empirical({0.7, 0.2}, 2);
  auto d2 = empirical({-1.1, 0.9}, 2);
  CHECK(distance_squared(p, d1, d2) ==
        doctest::Approx(huber_energy(p, d1.point(0), d2.point(0)))
            .epsilon(1e-14));
}

TEST_CASE("hand-evaluated two-point case") {
  // delta_0 against uniform on {-1, +1}, energy kernel: 1 - 0 - 0.5
  KernelParams p(0.0, 1.0);
  auto m1 = empirical({0.0}, 1);
  auto m2 = empirical({-1.0, 1.0}, 1);
  CHECK(distance_squared(p, m1, m2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(testutil::brute_force_distance_squared(0.0, 1.0, {0.0}, {1.0},
                                               {-1.0, 1.0}, {0.5, 0.5}, 1) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("brute-force equivalence up to L = M = 64") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int l = 1 + static_cast<int>(rng.next_u64() % 64);
    int m = 1 + static_cast<int>(rng.next_u64() % 64);
    int dim = 1 + static_cast<int>(rng.next_u64() % 3);
    double a = rng.next_double();
    double r = 0.3 + 1.5 * rng.next_double();
    KernelParams p(a, r);
    auto pts1 = testutil::random_points(rng, l, dim);
    auto pts2 = testutil::random_points(rng, m, dim);
    auto m1 = empirical(pts1, dim);
    auto m2 = empirical(pts2, dim);
    double expected = testutil::brute_force_distance_squared(
        a, r, pts1, m1.weights(), pts2, m2.weights(), dim);
    double scale = std::max(std::abs(expected), 1.0);
    CHECK(std::abs(distance_squared(p, m1, m2) - expected) / scale < 1e-12);
    CHECK(std::abs(distance_squared_parallel(p, m1, m2) - expected) / scale <
          1e-10);
  }
}

TEST_CASE("symmetry, positivity and permutation invariance") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    int dim = 1 + static_cast<int>(rng.next_u64() % 2);
    KernelParams p(rng.next_double(), 0.2 + 1.6 * rng.next_double());
    auto pts1 = testutil::random_points(rng, 5, dim);
    auto pts2 = testutil::random_points(rng, 8, dim);
    auto m1 = empirical(pts1, dim);
    auto m2 = empirical(pts2, dim);
    double d12 = distance_squared(p, m1, m2);
    CHECK(std::abs(d12 - distance_squared(p, m2, m1)) < 1e-12);
    CHECK(d12 > 0.0);  // distinct random supports
    CHECK(d12 >= -1e-12);

    // shuffle points of m1
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 4; i > 0; --i)
      std::swap(perm[i],
                perm[static_cast<std::size_t>(rng.next_u64() % (i + 1))]);
    std::vector<double> shuffled(pts1.size());
    for (int i = 0; i < 5; ++i)
      for (int k = 0; k < dim; ++k)
        shuffled[static_cast<std::size_t>(i) * dim + k] =
            pts1[static_cast<std::size_t>(perm[i]) * dim + k];
    CHECK(std::abs(distance_squared(p, empirical(shuffled, dim), m2) - d12) <
          1e-12);
  }
}

TEST_CASE("triangle inequality of the induced distance") {
  Rng rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    KernelParams p(0.1 + rng.next_double(), 0.3 + 1.4 * rng.next_double());
    auto ma = empirical(testutil::random_points(rng, 3, 1), 1);
    auto mb = empirical(testutil::random_points(rng, 4, 1), 1);
    auto mc = empirical(testutil::random_points(rng, 5, 1), 1);
    double ab = std::sqrt(std::max(distance_squared(p, ma, mb), 0.0));
    double bc = std::sqrt(std::max(distance_squared(p, mb, mc), 0.0));
    double ac = std::sqrt(std::max(distance_squared(p, ma, mc), 0.0));
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("gradient of the distance") {
  SUBCASE("mirror-antisymmetric configuration") {
    KernelParams p(0.5, 1.0);
    auto m = empirical({-1.0, 1.0}, 1);
    std::vector<double> g;
    distance_squared_grad(p, m, m, g);
    CHECK(g[0] == doctest::Approx(-g[1]).epsilon(1e-14));
  }

  SUBCASE("matches finite differences") {
    Rng rng(77);
    KernelParams p(1e-3, 1.0);
    auto var_pts = testutil::random_points(rng, 3, 1);
    auto fixed_pts = testutil::random_points(rng, 4, 1);
    auto m_fixed = empirical(fixed_pts, 1);
    std::vector<double> g;
    distance_squared_grad(p, empirical(var_pts, 1), m_fixed, g);
    auto fd = testutil::finite_difference(
        [&](const std::vector<double>& v) {
          return distance_squared(p, empirical(v, 1), m_fixed);
        },
        var_pts);
    CHECK(testutil::max_rel_diff(g, fd, 1e-4) < 1e-5);
  }

  SUBCASE("vanishes at the one-point optimum") {
    // single movable atom against uniform on {-1, +1}; r > 1 makes the
    // one-point loss strictly convex, so the midpoint is the unique
    // minimizer and the gradient there is ~0
    KernelParams p(1e-6, 1.5);
    auto target = empirical({-1.0, 1.0}, 1);
    auto loss = [&](double y) {
      return distance_squared(p, empirical({y}, 1), target);
    };
    double lo = -1.0, hi = 1.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    while (hi - lo > 1e-10) {
      double c = hi - phi * (hi - lo);
      double d = lo + phi * (hi - lo);
      if (loss(c) < loss(d)) hi = d; else lo = c;
    }
    double argmin = 0.5 * (lo + hi);
    CHECK(std::abs(argmin) < 1e-6);
    std::vector<double> g;
    distance_squared_grad(p, empirical({argmin}, 1), target, g);
    CHECK(std::abs(g[0]) < 1e-5);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  KernelParams p(1.0, 1.0);
  auto m1 = empirical({1.0}, 1);
  auto m2 = empirical({1.0, 2.0}, 2);
  CHECK_THROWS_AS(distance_squared(p, m1, m2), std::invalid_argument);
  std::vector<double> g;
  CHECK_THROWS_AS(distance_squared_grad(p, m1, m2, g), std::invalid_argument);
}
