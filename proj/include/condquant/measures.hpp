#ifndef CONDQUANT_MEASURES_HPP
#define CONDQUANT_MEASURES_HPP

#include <span>
#include <vector>

#include "condquant/kernel.hpp"

namespace condquant {

// Finitely supported measure: L points of R^dim (flat, row-major) with
// weights summing to 1. Immutable after construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<double> points, std::vector<double> weights,
                  int dim);

  int size() const { return static_cast<int>(weights_.size()); }
  int dim() const { return dim_; }

  std::span<const double> point(int i) const {
    return {points_.data() + static_cast<std::size_t>(i) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  double weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  int dim_;
};

// Uniform-weight empirical measure on the given points; every weight is
// exactly 1/L (computed once).
DiscreteMeasure empirical(std::vector<double> points, int dim);

// Squared Huber-energy distance between two weighted Dirac sums:
//   sum_{i,j} b_i b2_j h(y_i, y2_j)
//   - 1/2 sum_{i,j} b_i b_j h(y_i, y_j)
//   - 1/2 sum_{i,j} b2_i b2_j h(y2_i, y2_j).
// Serial reference path; double sums accumulate row-major over (i, j) so
// logged values are bitwise reproducible.
double distance_squared(const KernelParams& p, const DiscreteMeasure& m1,
                        const DiscreteMeasure& m2);

// OpenMP variant of distance_squared. Exploits kernel symmetry and
// parallel reduction, so it matches the reference only to relative
// tolerance (1e-10 contract), not bitwise.
double distance_squared_parallel(const KernelParams& p,
                                 const DiscreteMeasure& m1,
                                 const DiscreteMeasure& m2);

// Gradient of distance_squared with respect to the points of m_var,
// holding all weights fixed. Output is L*dim, row-major, resized by the
// callee.
void distance_squared_grad(const KernelParams& p, const DiscreteMeasure& m_var,
                           const DiscreteMeasure& m_fixed,
                           std::vector<double>& grad_out);

// Self-interaction term 1/2 sum_{i,j} b_i b_j h(y_i, y_j) of one measure.
double self_energy(const KernelParams& p, const DiscreteMeasure& m);

}  // namespace condquant

#endif  // CONDQUANT_MEASURES_HPP
