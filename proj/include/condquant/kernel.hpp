#ifndef CONDQUANT_KERNEL_HPP
#define CONDQUANT_KERNEL_HPP

#include <cmath>
#include <span>
#include <stdexcept>

namespace condquant {

// Parameters (a, r) of the Huber-energy kernel
//   h(y, y2) = (a^2 + |y - y2|^2)^(r/2) - a^r,   a >= 0, 0 < r < 2.
// Validated once at construction and immutable afterwards.
class KernelParams {
 public:
  KernelParams(double a, double r) : a_(a), r_(r) {
    if (!(a >= 0.0) || !std::isfinite(a))
      throw std::invalid_argument("kernel_a: must be a finite value >= 0");
    if (!(r > 0.0) || !(r < 2.0))
      throw std::invalid_argument("kernel_r: must lie in (0, 2)");
    a_sq_ = a * a;
    a_pow_r_ = std::pow(a, r);
  }

  double a() const { return a_; }
  double r() const { return r_; }
  double a_sq() const { return a_sq_; }
  double a_pow_r() const { return a_pow_r_; }

 private:
  double a_;
  double r_;
  double a_sq_;
  double a_pow_r_;
};

inline void check_same_dim(std::span<const double> y,
                           std::span<const double> y2) {
  if (y.size() != y2.size())
    throw std::invalid_argument("kernel: point dimensions differ");
}

inline double squared_distance(std::span<const double> y,
                               std::span<const double> y2) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    double d = y[k] - y2[k];
    d2 += d * d;
  }
  return d2;
}

// h_{a,r}(y, y2); symmetric, zero at y == y2.
inline double huber_energy(const KernelParams& p, std::span<const double> y,
                           std::span<const double> y2) {
  check_same_dim(y, y2);
  double s = p.a_sq() + squared_distance(y, y2);
  if (p.r() == 1.0) return std::sqrt(s) - p.a();
  return std::pow(s, 0.5 * p.r()) - p.a_pow_r();
}

// Gradient of huber_energy with respect to the first argument:
//   r * (a^2 + |y - y2|^2)^(r/2 - 1) * (y - y2).
// At a = 0 with coincident points the kernel has a kink; the zero vector
// is returned there (subgradient choice).
inline void huber_energy_grad(const KernelParams& p, std::span<const double> y,
                              std::span<const double> y2,
                              std::span<double> grad_out) {
  check_same_dim(y, y2);
  if (grad_out.size() != y.size())
    throw std::invalid_argument("kernel: gradient output size differs");
  double s = p.a_sq() + squared_distance(y, y2);
  if (s == 0.0) {
    for (std::size_t k = 0; k < y.size(); ++k) grad_out[k] = 0.0;
    return;
  }
  double factor;
  if (p.r() == 1.0)
    factor = 1.0 / std::sqrt(s);
  else
    factor = p.r() * std::pow(s, 0.5 * p.r() - 1.0);
  for (std::size_t k = 0; k < y.size(); ++k)
    grad_out[k] = factor * (y[k] - y2[k]);
}

}  // namespace condquant

#endif  // CONDQUANT_KERNEL_HPP
