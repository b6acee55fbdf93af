#ifndef CONDQUANT_TRAINER_HPP
#define CONDQUANT_TRAINER_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "condquant/kernel.hpp"
#include "condquant/measures.hpp"
#include "condquant/net.hpp"
#include "condquant/optim.hpp"
#include "condquant/samplers.hpp"

namespace condquant {

struct TrainConfig {
  int batch_size = 128;       // B
  int sample_size = 64;       // J, conditional draws per batch element
  KernelParams kernel{1e-6, 1.0};
  int max_iterations = 1000;
  std::uint64_t seed = 0;
  AdamConfig adam;
  int checkpoint_every = 250;
  int log_every = 10;
  bool parallel = true;  // OpenMP over batch elements; reduction order is
                         // fixed either way, results are bitwise equal

  void validate() const;
};

struct LogEntry {
  std::int64_t iteration;
  double loss;
  double wall_ms;
};

struct TrainReport {
  std::vector<LogEntry> trace;
  std::string final_checkpoint;
  TrainConfig config;
};

// Raised when a batch produces a non-finite loss or gradient.
struct TrainError : std::runtime_error {
  TrainError(std::int64_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " +
                           what),
        iteration(iteration) {}
  std::int64_t iteration;
};

struct BatchResult {
  double loss = 0.0;
  std::vector<double> grad;
};

// One pass of the inner loop: draw x_1..x_B and J conditional samples per
// element, forward, and return the mean squared distance between the
// J-point sample measure and the Q-point network measure, with the mean
// parameter gradient. The loss carries all three terms of the discrete
// distance expansion; the sample self-term has zero parameter gradient.
// Per-element randomness is keyed by (seed, iteration, element), so the
// result is independent of thread count.
BatchResult batch_loss(const QuantizerNet& net, const ConditionalSampler& sampler,
                       const KernelParams& p, int batch_size, int sample_size,
                       std::uint64_t seed, std::int64_t iteration,
                       bool parallel = true);

std::pair<QuantizerNet, TrainReport> train(const TrainConfig& config,
                                           const NetArchitecture& arch,
                                           const ConditionalSampler& sampler,
                                           const std::string& checkpoint_path = "");

struct EvalResult {
  std::vector<std::vector<double>> points;  // per x: q * n_y flat
  std::vector<double> losses;               // per x: MC loss vs fresh draws
};

EvalResult evaluate(const QuantizerNet& net, const ConditionalSampler& sampler,
                    const KernelParams& p, const std::vector<double>& x_flat,
                    int j_eval, std::uint64_t seed);

// CSV with header `iteration,loss,wall_ms`. Timing is written only when
// include_timing is set; the default writes 0 in that column so reruns
// with equal seeds are byte-identical.
void write_train_log(const std::string& path,
                     const std::vector<LogEntry>& trace,
                     bool include_timing = false);

}  // namespace condquant

#endif  // CONDQUANT_TRAINER_HPP
