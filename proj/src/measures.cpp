#include "condquant/measures.hpp"

#include <cmath>
#include <stdexcept>

namespace condquant {

DiscreteMeasure::DiscreteMeasure(std::vector<double> points,
                                 std::vector<double> weights, int dim)
    : points_(std::move(points)), weights_(std::move(weights)), dim_(dim) {
  if (dim_ < 1) throw std::invalid_argument("measure: dim must be >= 1");
  if (weights_.empty())
    throw std::invalid_argument("measure: at least one point required");
  if (points_.size() != weights_.size() * static_cast<std::size_t>(dim_))
    throw std::invalid_argument("measure: points/weights size mismatch");
  double sum = 0.0;
  for (double w : weights_) sum += w;
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("measure: weights must sum to 1");
}

DiscreteMeasure empirical(std::vector<double> points, int dim) {
  if (dim < 1) throw std::invalid_argument("measure: dim must be >= 1");
  if (points.empty() || points.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("measure: point list empty or ragged");
  std::size_t n = points.size() / static_cast<std::size_t>(dim);
  double w = 1.0 / static_cast<double>(n);
  return DiscreteMeasure(std::move(points), std::vector<double>(n, w), dim);
}

static void check_dims(const DiscreteMeasure& m1, const DiscreteMeasure& m2) {
  if (m1.dim() != m2.dim())
    throw std::invalid_argument("measure: point dimensions differ");
}

double self_energy(const KernelParams& p, const DiscreteMeasure& m) {
  const int n = m.size();
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      acc += m.weight(i) * m.weight(j) * huber_energy(p, m.point(i), m.point(j));
  return 0.5 * acc;
}

double distance_squared(const KernelParams& p, const DiscreteMeasure& m1,
                        const DiscreteMeasure& m2) {
  check_dims(m1, m2);
  double cross = 0.0;
  for (int i = 0; i < m1.size(); ++i)
    for (int j = 0; j < m2.size(); ++j)
      cross +=
          m1.weight(i) * m2.weight(j) * huber_energy(p, m1.point(i), m2.point(j));
  return cross - self_energy(p, m1) - self_energy(p, m2);
}

double distance_squared_parallel(const KernelParams& p,
                                 const DiscreteMeasure& m1,
                                 const DiscreteMeasure& m2) {
  check_dims(m1, m2);
  const int n1 = m1.size();
  const int n2 = m2.size();
  double cross = 0.0, self1 = 0.0, self2 = 0.0;
#pragma omp parallel for reduction(+ : cross, self1, self2) schedule(static)
  for (int i = 0; i < n1 + n2; ++i) {
    if (i < n1) {
      double c = 0.0;
      for (int j = 0; j < n2; ++j)
        c += m2.weight(j) * huber_energy(p, m1.point(i), m2.point(j));
      cross += m1.weight(i) * c;
      double s = 0.0;  // h(y_i, y_i) = 0, strict upper triangle doubled
      for (int j = i + 1; j < n1; ++j)
        s += m1.weight(j) * huber_energy(p, m1.point(i), m1.point(j));
      self1 += m1.weight(i) * s;
    } else {
      const int k = i - n1;
      double s = 0.0;
      for (int j = k + 1; j < n2; ++j)
        s += m2.weight(j) * huber_energy(p, m2.point(k), m2.point(j));
      self2 += m2.weight(k) * s;
    }
  }
  return cross - self1 - self2;
}

void distance_squared_grad(const KernelParams& p, const DiscreteMeasure& m_var,
                           const DiscreteMeasure& m_fixed,
                           std::vector<double>& grad_out) {
  check_dims(m_var, m_fixed);
  const int n = m_var.size();
  const int dim = m_var.dim();
  grad_out.assign(static_cast<std::size_t>(n) * dim, 0.0);
  std::vector<double> g(dim);
  for (int i = 0; i < n; ++i) {
    double* out = grad_out.data() + static_cast<std::size_t>(i) * dim;
    // cross term: + b_i sum_j b2_j grad_h(y_i, y2_j)
    for (int j = 0; j < m_fixed.size(); ++j) {
      huber_energy_grad(p, m_var.point(i), m_fixed.point(j), g);
      double w = m_var.weight(i) * m_fixed.weight(j);
      for (int k = 0; k < dim; ++k) out[k] += w * g[k];
    }
    // self term: - b_i sum_j b_j grad_h(y_i, y_j) (both occurrences of y_i
    // combined through kernel symmetry)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      huber_energy_grad(p, m_var.point(i), m_var.point(j), g);
      double w = m_var.weight(i) * m_var.weight(j);
      for (int k = 0; k < dim; ++k) out[k] -= w * g[k];
    }
  }
}

}  // namespace condquant
