#ifndef CONDQUANT_ORACLE_HPP
#define CONDQUANT_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "condquant/kernel.hpp"
#include "condquant/rng.hpp"

namespace condquant {

// Inverse standard normal CDF. Acklam's rational approximation refined
// by one Newton step on the erf-based CDF; absolute error <= 1e-9.
double normal_quantile(double alpha);

// Inverse CDF of a 1D law, callable on (0, 1).
class QuantileFunction {
 public:
  explicit QuantileFunction(std::function<double(double)> f)
      : f_(std::move(f)) {}

  static QuantileFunction normal(double mean, double sigma);
  static QuantileFunction uniform(double lo, double hi);
  // Empirical inverse CDF of a sample (sorted internally).
  static QuantileFunction from_sample(std::vector<double> sample);

  double operator()(double alpha) const { return f_(alpha); }

 private:
  std::function<double(double)> f_;
};

// The unique optimal Q-point quantizer of a 1D law under the energy
// kernel (a = 0, r = 1): quantiles (q + 1/2) / Q, q = 0..Q-1, ascending.
std::vector<double> quantile_quantizer(const QuantileFunction& qf, int q);

// Callable returning one batch of fresh i.i.d. draws of the target law
// (flat, `dim` doubles per point).
using SampleSource = std::function<void(Rng&, std::vector<double>&)>;

struct StaticQuantizerResult {
  std::vector<double> points;  // q * dim, flat
  std::vector<double> loss_trace;
};

// Direct Adam descent of distance_squared on q free points against fresh
// target samples each step; returns the tail-averaged iterate. Fully
// deterministic given seed.
StaticQuantizerResult static_quantizer(const KernelParams& p,
                                       const SampleSource& source, int dim,
                                       int q, int steps, std::uint64_t seed,
                                       double learning_rate = 5e-3);

// Piecewise-linear interpolation of precomputed quantizers over a 1D
// grid of conditions; clamps outside the grid.
class InterpolatedQuantizer {
 public:
  InterpolatedQuantizer(std::vector<double> grid_x,
                        std::vector<std::vector<double>> node_values);

  std::vector<double> operator()(double x) const;

 private:
  std::vector<double> grid_;
  std::vector<std::vector<double>> values_;
};

}  // namespace condquant

#endif  // CONDQUANT_ORACLE_HPP
