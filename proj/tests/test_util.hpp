#ifndef CONDQUANT_TEST_UTIL_HPP
#define CONDQUANT_TEST_UTIL_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "condquant/measures.hpp"
#include "condquant/rng.hpp"

namespace testutil {

// Central finite difference of a scalar function of a flat vector.
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double step = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double hi = f(x);
    x[i] = saved - step;
    const double lo = f(x);
    x[i] = saved;
    g[i] = (hi - lo) / (2.0 * step);
  }
  return g;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_rel_diff(const std::vector<double>& a,
                           const std::vector<double>& b, double floor = 1e-8) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    m = std::max(m, std::abs(a[i] - b[i]) / scale);
  }
  return m;
}

// Independent evaluation of the three-double-sum distance expansion.
// Deliberately written with its own kernel evaluation, column-major loops
// and long double accumulation, so it shares no code path with the
// production implementation it checks.
inline double brute_force_distance_squared(double a, double r,
                                           const std::vector<double>& pts1,
                                           const std::vector<double>& w1,
                                           const std::vector<double>& pts2,
                                           const std::vector<double>& w2,
                                           int dim) {
  auto h = [&](const double* u, const double* v) {
    long double d2 = 0.0L;
    for (int k = 0; k < dim; ++k) {
      long double d = static_cast<long double>(u[k]) - v[k];
      d2 += d * d;
    }
    return std::pow(static_cast<long double>(a) * a + d2,
                    static_cast<long double>(r) / 2.0L) -
           std::pow(static_cast<long double>(a), static_cast<long double>(r));
  };
  const std::size_t n1 = w1.size(), n2 = w2.size();
  long double cross = 0.0L, self1 = 0.0L, self2 = 0.0L;
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t i = 0; i < n1; ++i)
      cross += static_cast<long double>(w1[i]) * w2[j] *
               h(&pts1[i * dim], &pts2[j * dim]);
  for (std::size_t j = 0; j < n1; ++j)
    for (std::size_t i = 0; i < n1; ++i)
      self1 += static_cast<long double>(w1[i]) * w1[j] *
               h(&pts1[i * dim], &pts1[j * dim]);
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t i = 0; i < n2; ++i)
      self2 += static_cast<long double>(w2[i]) * w2[j] *
               h(&pts2[i * dim], &pts2[j * dim]);
  return static_cast<double>(cross - 0.5L * self1 - 0.5L * self2);
}

inline std::vector<double> random_points(condquant::Rng& rng, int n, int dim,
                                         double scale = 1.0) {
  std::vector<double> p(static_cast<std::size_t>(n) * dim);
  for (auto& v : p) v = scale * rng.next_normal();
  return p;
}

}  // namespace testutil

#endif  // CONDQUANT_TEST_UTIL_HPP
