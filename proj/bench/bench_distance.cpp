// Compares the serial reference paths against the OpenMP ones.
#include <chrono>
#include <cstdio>
#include <vector>

#include "condquant/measures.hpp"
#include "condquant/rng.hpp"
#include "condquant/samplers.hpp"
#include "condquant/trainer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace condquant;
using clk = std::chrono::steady_clock;

static double ms_since(clk::time_point t0) {
  return std::chrono::duration<double, std::milli>(clk::now() - t0).count();
}

static std::vector<double> random_points(Rng& rng, int n, int dim) {
  std::vector<double> p(static_cast<std::size_t>(n) * dim);
  for (auto& v : p) v = rng.next_normal();
  return p;
}

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled\n");
#endif
  KernelParams p(1e-6, 1.0);
  Rng rng(12345);

  std::printf("\ndistance_squared, 100 repetitions\n");
  std::printf("%8s %14s %14s %12s\n", "L=M", "serial_ms", "parallel_ms",
              "rel_diff");
  for (int n : {64, 256, 1024}) {
    DiscreteMeasure m1 = empirical(random_points(rng, n, 2), 2);
    DiscreteMeasure m2 = empirical(random_points(rng, n, 2), 2);
    double a = 0.0, b = 0.0;
    auto t0 = clk::now();
    for (int rep = 0; rep < 100; ++rep) a = distance_squared(p, m1, m2);
    double serial = ms_since(t0);
    t0 = clk::now();
    for (int rep = 0; rep < 100; ++rep) b = distance_squared_parallel(p, m1, m2);
    double parallel = ms_since(t0);
    std::printf("%8d %14.2f %14.2f %12.2e\n", n, serial, parallel,
                std::abs(a - b) / std::max(std::abs(a), 1e-300));
  }

  std::printf("\nbatch_loss, B=128 J=64 Q=10 2D, 20 iterations\n");
  auto sampler = additive_gaussian(2);
  NetArchitecture arch;
  arch.input_dim = 2;
  arch.n_y = 2;
  arch.q = 10;
  QuantizerNet net = QuantizerNet::init(arch, 7);
  auto t0 = clk::now();
  BatchResult serial_res;
  for (int it = 1; it <= 20; ++it)
    serial_res = batch_loss(net, *sampler, p, 128, 64, 7, it, false);
  double serial = ms_since(t0);
  t0 = clk::now();
  BatchResult parallel_res;
  for (int it = 1; it <= 20; ++it)
    parallel_res = batch_loss(net, *sampler, p, 128, 64, 7, it, true);
  double parallel = ms_since(t0);
  bool bitwise = serial_res.loss == parallel_res.loss &&
                 serial_res.grad == parallel_res.grad;
  std::printf("serial %.2f ms, parallel %.2f ms, bitwise equal: %s\n", serial,
              parallel, bitwise ? "yes" : "no");
  return 0;
}
