#ifndef CONDQUANT_OPTIM_HPP
#define CONDQUANT_OPTIM_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace condquant {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // <= 0 disables global-norm clipping

  void validate() const;
};

// Adam over a flat parameter vector, with bias-corrected moments:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
//   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
class AdamState {
 public:
  AdamState(std::size_t n_params, AdamConfig cfg = {});

  // Throws std::runtime_error("non-finite gradient") without touching any
  // state when grad contains NaN/Inf.
  void step(std::span<double> params, std::span<const double> grad);

  std::int64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<double>& m() const { return m_; }
  const std::vector<double>& v() const { return v_; }

  // For checkpoint restore.
  void restore(std::int64_t t, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace condquant

#endif  // CONDQUANT_OPTIM_HPP
