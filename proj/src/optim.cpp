#include "condquant/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace condquant {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate: must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0))
    throw std::invalid_argument("beta1: must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("beta2: must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon: must be > 0");
}

AdamState::AdamState(std::size_t n_params, AdamConfig cfg)
    : cfg_(cfg), m_(n_params, 0.0), v_(n_params, 0.0) {
  cfg_.validate();
}

void AdamState::restore(std::int64_t t, std::vector<double> m,
                        std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw std::invalid_argument("adam: restored state length mismatch");
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

void AdamState::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("adam: vector length mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient");

  double scale = 1.0;
  if (cfg_.clip_norm > 0.0) {
    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    double norm = std::sqrt(norm2);
    if (norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
  }

  t_ += 1;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const double g = grad[i] * scale;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
  }
}

}  // namespace condquant
