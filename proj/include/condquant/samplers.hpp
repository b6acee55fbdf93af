#ifndef CONDQUANT_SAMPLERS_HPP
#define CONDQUANT_SAMPLERS_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "condquant/rng.hpp"

namespace condquant {

// Source of the joint law: marginal draws of X and conditional draws of
// Y given X = x. Implementations are immutable; all randomness flows
// through the caller-supplied rng substream.
class ConditionalSampler {
 public:
  virtual ~ConditionalSampler() = default;

  virtual int x_dim() const = 0;
  virtual int y_dim() const = 0;

  // Appends `count` i.i.d. draws of X (flat, row-major) to out.
  virtual void sample_x(Rng& rng, int count, std::vector<double>& out) const = 0;

  // Appends `count` i.i.d. draws of Y | X = x to out.
  virtual void sample_y_given_x(Rng& rng, std::span<const double> x, int count,
                                std::vector<double>& out) const = 0;
};

// X ~ N(0, I_n), Y | X = x ~ N(x, I_n)  (law of X + Z).
std::unique_ptr<ConditionalSampler> additive_gaussian(int n);

// X ~ N(0, I_n), Y | X = x ~ law of (x_1 Z_1, ..., x_n Z_n).
std::unique_ptr<ConditionalSampler> multiplicative_gaussian(int n);

// Y | X = x resampled uniformly among the y's of the knn_k nearest
// stored x neighbors (Euclidean, ties broken by lowest index); X drawn
// uniformly from the stored x's.
std::unique_ptr<ConditionalSampler> empirical_joint(std::vector<double> xs,
                                                    std::vector<double> ys,
                                                    int n_x, int n_y,
                                                    int knn_k);

struct Dataset {
  int n_x = 0;
  int n_y = 0;
  std::vector<double> xs;
  std::vector<double> ys;
};

// Delimited text, header row `x_1,...,x_nx,y_1,...,y_ny` required.
Dataset load_dataset_csv(const std::string& path);

}  // namespace condquant

#endif  // CONDQUANT_SAMPLERS_HPP
