// Serial reference vs OpenMP pairwise kernels on the hot paths: energy
// sums and batched potential evaluation.

#include <benchmark/benchmark.h>

#include <vector>

#include "sphere/common.hpp"
#include "sphere/config.hpp"
#include "sphere/energy.hpp"

using namespace sphere;

namespace {

SphericalConfig make_config(int d, int n) {
  Rng rng(1234);
  std::vector<double> pts(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    rng.sphere_point({pts.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)});
  return SphericalConfig::equal_weights(d, std::move(pts));
}

void bm_energy_serial(benchmark::State& state) {
  const auto cfg = make_config(3, static_cast<int>(state.range(0)));
  const Kernel kernel = Kernel::parse("pframe:3");
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pair_energy(cfg.points.data(), cfg.weights.data(), cfg.size(), 3, kernel, false));
  }
}

void bm_energy_parallel(benchmark::State& state) {
  const auto cfg = make_config(3, static_cast<int>(state.range(0)));
  const Kernel kernel = Kernel::parse("pframe:3");
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pair_energy(cfg.points.data(), cfg.weights.data(), cfg.size(), 3, kernel, true));
  }
}

void bm_potential_batch_serial(benchmark::State& state) {
  const auto cfg = make_config(3, 64);
  const auto probes = make_config(3, static_cast<int>(state.range(0)));
  const Kernel kernel = Kernel::parse("pframe:3");
  std::vector<double> out(probes.size());
  for (auto _ : state) {
    potential_batch(cfg, kernel, probes.points.data(), probes.size(), out.data(), false);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_potential_batch_parallel(benchmark::State& state) {
  const auto cfg = make_config(3, 64);
  const auto probes = make_config(3, static_cast<int>(state.range(0)));
  const Kernel kernel = Kernel::parse("pframe:3");
  std::vector<double> out(probes.size());
  for (auto _ : state) {
    potential_batch(cfg, kernel, probes.points.data(), probes.size(), out.data(), true);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(bm_energy_serial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(bm_energy_parallel)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(bm_potential_batch_serial)->Arg(1024)->Arg(8192);
BENCHMARK(bm_potential_batch_parallel)->Arg(1024)->Arg(8192);

BENCHMARK_MAIN();
