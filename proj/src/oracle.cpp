#include "condquant/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "condquant/measures.hpp"
#include "condquant/optim.hpp"

namespace condquant {

// Acklam (2003) rational approximation to the inverse normal CDF.
static double acklam_inverse_normal(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double q, r;
  if (p < p_low) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
           c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double normal_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("quantile: alpha must lie in (0, 1)");
  double x = acklam_inverse_normal(alpha);
  // one Newton step on Phi(x) - alpha
  const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
  const double pdf =
      std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
  x -= (cdf - alpha) / pdf;
  return x;
}

QuantileFunction QuantileFunction::normal(double mean, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma: must be > 0");
  return QuantileFunction(
      [mean, sigma](double a) { return mean + sigma * normal_quantile(a); });
}

QuantileFunction QuantileFunction::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("uniform: need lo < hi");
  return QuantileFunction([lo, hi](double a) { return lo + a * (hi - lo); });
}

QuantileFunction QuantileFunction::from_sample(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(sample.begin(), sample.end());
  return QuantileFunction([s = std::move(sample)](double a) {
    double pos = a * static_cast<double>(s.size()) - 0.5;
    if (pos <= 0.0) return s.front();
    if (pos >= static_cast<double>(s.size() - 1)) return s.back();
    std::size_t i = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(i);
    return s[i] + frac * (s[i + 1] - s[i]);
  });
}

std::vector<double> quantile_quantizer(const QuantileFunction& qf, int q) {
  if (q < 1) throw std::invalid_argument("quantizer: Q must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i)
    out[static_cast<std::size_t>(i)] =
        qf((static_cast<double>(i) + 0.5) / static_cast<double>(q));
  std::sort(out.begin(), out.end());
  return out;
}

StaticQuantizerResult static_quantizer(const KernelParams& p,
                                       const SampleSource& source, int dim,
                                       int q, int steps, std::uint64_t seed,
                                       double learning_rate) {
  if (dim < 1 || q < 1 || steps < 1)
    throw std::invalid_argument("static_quantizer: bad dimensions");
  const std::size_t n = static_cast<std::size_t>(q) * dim;

  // start from q fresh draws of the target law
  std::vector<double> points;
  {
    Rng rng = Rng::substream(seed, 0, 0, StreamTag::init);
    std::vector<double> batch;
    while (points.size() < n) {
      batch.clear();
      source(rng, batch);
      if (batch.empty() || batch.size() % static_cast<std::size_t>(dim) != 0)
        throw std::invalid_argument("static_quantizer: bad sample batch");
      for (double v : batch) {
        points.push_back(v);
        if (points.size() == n) break;
      }
    }
  }

  AdamConfig cfg;
  cfg.learning_rate = learning_rate;
  AdamState adam(n, cfg);
  StaticQuantizerResult res;
  std::vector<double> grad;
  std::vector<double> sample;
  std::vector<double> tail_sum(n, 0.0);
  const int tail_start = steps - std::max(1, steps / 4);
  int tail_count = 0;

  for (int step = 0; step < steps; ++step) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(step) + 1, 0,
                             StreamTag::descent);
    sample.clear();
    source(rng, sample);
    DiscreteMeasure target = empirical(sample, dim);
    DiscreteMeasure model = empirical(points, dim);
    res.loss_trace.push_back(distance_squared(p, model, target));
    distance_squared_grad(p, model, target, grad);
    adam.step(points, grad);
    if (step >= tail_start) {
      for (std::size_t i = 0; i < n; ++i) tail_sum[i] += points[i];
      ++tail_count;
    }
  }

  // tail-averaged iterate (Ruppert-Polyak) damps the stochastic jitter
  res.points.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    res.points[i] = tail_sum[i] / static_cast<double>(tail_count);
  return res;
}

InterpolatedQuantizer::InterpolatedQuantizer(
    std::vector<double> grid_x, std::vector<std::vector<double>> node_values)
    : grid_(std::move(grid_x)), values_(std::move(node_values)) {
  if (grid_.empty() || grid_.size() != values_.size())
    throw std::invalid_argument("interpolation: grid/value count mismatch");
  for (std::size_t i = 1; i < grid_.size(); ++i)
    if (!(grid_[i - 1] < grid_[i]))
      throw std::invalid_argument("interpolation: grid must be strictly increasing");
  for (const auto& v : values_)
    if (v.size() != values_.front().size())
      throw std::invalid_argument("interpolation: ragged node values");
}

std::vector<double> InterpolatedQuantizer::operator()(double x) const {
  if (x <= grid_.front()) return values_.front();
  if (x >= grid_.back()) return values_.back();
  std::size_t hi =
      static_cast<std::size_t>(std::upper_bound(grid_.begin(), grid_.end(), x) -
                               grid_.begin());
  std::size_t lo = hi - 1;
  double v = (grid_[hi] - x) / (grid_[hi] - grid_[lo]);
  std::vector<double> out(values_[lo].size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = v * values_[lo][k] + (1.0 - v) * values_[hi][k];
  return out;
}

}  // namespace condquant
