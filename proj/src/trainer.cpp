#include "condquant/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace condquant {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size: must be >= 1");
  if (sample_size < 1) throw std::invalid_argument("sample_size: must be >= 1");
  if (max_iterations < 1)
    throw std::invalid_argument("max_iterations: must be >= 1");
  if (checkpoint_every < 1)
    throw std::invalid_argument("checkpoint_every: must be >= 1");
  if (log_every < 1) throw std::invalid_argument("log_every: must be >= 1");
  adam.validate();
}

namespace {

struct ElementScratch {
  std::vector<double> x;
  std::vector<double> ys;
  std::vector<double> out;
  std::vector<double> upstream;
};

void element_pass(const QuantizerNet& net, const ConditionalSampler& sampler,
                  const KernelParams& p, int sample_size, std::uint64_t seed,
                  std::int64_t iteration, int b, ElementScratch& s,
                  double& loss_out, std::span<double> grad_out) {
  const int n_y = net.arch().n_y;
  Rng rng_x = Rng::substream(seed, static_cast<std::uint64_t>(iteration),
                             static_cast<std::uint64_t>(b),
                             StreamTag::marginal_x);
  s.x.clear();
  sampler.sample_x(rng_x, 1, s.x);
  Rng rng_y = Rng::substream(seed, static_cast<std::uint64_t>(iteration),
                             static_cast<std::uint64_t>(b),
                             StreamTag::conditional_y);
  s.ys.clear();
  sampler.sample_y_given_x(rng_y, s.x, sample_size, s.ys);

  net.forward(s.x, s.out);
  DiscreteMeasure model = empirical(s.out, n_y);
  DiscreteMeasure sample = empirical(s.ys, n_y);
  loss_out = distance_squared(p, model, sample);
  distance_squared_grad(p, model, sample, s.upstream);
  net.backward(s.x, s.upstream, grad_out);
}

}  // namespace

BatchResult batch_loss(const QuantizerNet& net, const ConditionalSampler& sampler,
                       const KernelParams& p, int batch_size, int sample_size,
                       std::uint64_t seed, std::int64_t iteration,
                       bool parallel) {
  if (net.arch().input_dim != sampler.x_dim() ||
      net.arch().n_y != sampler.y_dim())
    throw std::invalid_argument("trainer: net/sampler dimension mismatch");
  const std::size_t n_params = net.params().size();
  std::vector<double> losses(static_cast<std::size_t>(batch_size), 0.0);
  std::vector<double> grads(static_cast<std::size_t>(batch_size) * n_params,
                            0.0);

  if (parallel) {
#pragma omp parallel
    {
      ElementScratch s;
#pragma omp for schedule(static)
      for (int b = 0; b < batch_size; ++b)
        element_pass(net, sampler, p, sample_size, seed, iteration, b, s,
                     losses[static_cast<std::size_t>(b)],
                     {grads.data() + static_cast<std::size_t>(b) * n_params,
                      n_params});
    }
  } else {
    ElementScratch s;
    for (int b = 0; b < batch_size; ++b)
      element_pass(net, sampler, p, sample_size, seed, iteration, b, s,
                   losses[static_cast<std::size_t>(b)],
                   {grads.data() + static_cast<std::size_t>(b) * n_params,
                    n_params});
  }

  // fixed-order reduction over batch elements
  BatchResult res;
  res.grad.assign(n_params, 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch_size);
  for (int b = 0; b < batch_size; ++b) {
    res.loss += losses[static_cast<std::size_t>(b)];
    const double* g = grads.data() + static_cast<std::size_t>(b) * n_params;
    for (std::size_t i = 0; i < n_params; ++i) res.grad[i] += g[i];
  }
  res.loss *= inv_b;
  for (std::size_t i = 0; i < n_params; ++i) res.grad[i] *= inv_b;
  return res;
}

std::pair<QuantizerNet, TrainReport> train(const TrainConfig& config,
                                           const NetArchitecture& arch,
                                           const ConditionalSampler& sampler,
                                           const std::string& checkpoint_path) {
  config.validate();
  arch.validate();
  QuantizerNet net = QuantizerNet::init(arch, config.seed);
  AdamState adam(net.params().size(), config.adam);
  TrainReport report;
  report.config = config;

  auto write_ckpt = [&](std::int64_t iteration) {
    if (checkpoint_path.empty()) return;
    Checkpoint ck;
    ck.arch = arch;
    ck.params = net.params();
    ck.seed = config.seed;
    ck.iterations_trained = iteration;
    ck.adam = AdamSnapshot{adam.step_count(), adam.m(), adam.v()};
    try {
      save_checkpoint(checkpoint_path, ck);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("checkpoint write failed: ") +
                               e.what());
    }
    report.final_checkpoint = checkpoint_path;
  };

  using clock = std::chrono::steady_clock;
  for (std::int64_t it = 1; it <= config.max_iterations; ++it) {
    const auto t0 = clock::now();
    BatchResult batch =
        batch_loss(net, sampler, config.kernel, config.batch_size,
                   config.sample_size, config.seed, it, config.parallel);
    if (!std::isfinite(batch.loss)) throw TrainError(it, "non-finite loss");
    try {
      adam.step(net.mutable_params(), batch.grad);
    } catch (const std::runtime_error& e) {
      throw TrainError(it, e.what());
    }
    const double wall_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    if (it % config.log_every == 0 || it == config.max_iterations)
      report.trace.push_back({it, batch.loss, wall_ms});
    if (it % config.checkpoint_every == 0 && it != config.max_iterations)
      write_ckpt(it);
  }
  write_ckpt(config.max_iterations);
  return {std::move(net), std::move(report)};
}

EvalResult evaluate(const QuantizerNet& net, const ConditionalSampler& sampler,
                    const KernelParams& p, const std::vector<double>& x_flat,
                    int j_eval, std::uint64_t seed) {
  const int n_x = net.arch().input_dim;
  const int n_y = net.arch().n_y;
  if (j_eval < 1) throw std::invalid_argument("j_eval: must be >= 1");
  if (x_flat.empty() || x_flat.size() % static_cast<std::size_t>(n_x) != 0)
    throw std::invalid_argument("evaluate: condition list empty or ragged");
  const std::size_t n = x_flat.size() / static_cast<std::size_t>(n_x);

  EvalResult res;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> x{x_flat.data() + i * n_x,
                              static_cast<std::size_t>(n_x)};
    std::vector<double> out;
    net.forward(x, out);
    Rng rng = Rng::substream(seed, i, 0, StreamTag::eval);
    ys.clear();
    sampler.sample_y_given_x(rng, x, j_eval, ys);
    res.losses.push_back(
        distance_squared(p, empirical(out, n_y), empirical(ys, n_y)));
    res.points.push_back(std::move(out));
  }
  return res;
}

void write_train_log(const std::string& path, const std::vector<LogEntry>& trace,
                     bool include_timing) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "iteration,loss,wall_ms\n";
  char buf[64];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.loss);
    f << e.iteration << ',' << buf << ',';
    if (include_timing) {
      std::snprintf(buf, sizeof(buf), "%.3f", e.wall_ms);
      f << buf;
    } else {
      f << '0';
    }
    f << '\n';
  }
  if (!f.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace condquant
