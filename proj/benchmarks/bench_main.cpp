#include <benchmark/benchmark.h>

#include "landscape/dataset.hpp"
#include "landscape/dynamics.hpp"
#include "landscape/network.hpp"
#include "landscape/probe.hpp"
#include "landscape/surface.hpp"
#include "landscape/train.hpp"

namespace {

using namespace lp;

NetworkSpec relu_net(std::size_t width) {
  const std::string w = std::to_string(width);
  return NetworkSpec::parse("loss=softmax-cross-entropy layers=affine(10," + w + "),relu,affine(" + w + "," + w +
                            "),relu,affine(" + w + ",2)");
}

void BM_Forward(benchmark::State& state) {
  const NetworkSpec spec = relu_net(static_cast<std::size_t>(state.range(0)));
  const ParamVector p = init_params(spec, 0.1, 1);
  const Dataset data = gen_two_gaussians(1000, 10, 6.0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(loss_total(spec, p, data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(64)->Arg(256);

void BM_Gradient(benchmark::State& state) {
  const NetworkSpec spec = relu_net(static_cast<std::size_t>(state.range(0)));
  const ParamVector p = init_params(spec, 0.1, 1);
  const Dataset data = gen_two_gaussians(1000, 10, 6.0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(grad(spec, p, data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_Gradient)->Arg(16)->Arg(64)->Arg(256);

void BM_Hvp(benchmark::State& state) {
  const NetworkSpec spec = relu_net(64);
  const ParamVector p = init_params(spec, 0.1, 1);
  const ParamVector d = init_params(spec, 1.0, 2);
  const Dataset data = gen_two_gaussians(256, 10, 6.0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(hvp(spec, p, d, data));
}
BENCHMARK(BM_Hvp);

void BM_InterpCurve(benchmark::State& state) {
  const NetworkSpec spec = relu_net(64);
  const ParamVector a = init_params(spec, 0.1, 1);
  const ParamVector b = init_params(spec, 0.1, 2);
  const Dataset data = gen_two_gaussians(1000, 10, 6.0, 0);
  const auto grid = named_grid("coarse-50");
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(interp_curve(spec, data, nullptr, a, b, grid, threads));
}
BENCHMARK(BM_InterpCurve)->Arg(1)->Arg(4)->UseRealTime();

void BM_SgdEpoch(benchmark::State& state) {
  const NetworkSpec spec = relu_net(64);
  const Dataset data = gen_two_gaussians(1000, 10, 6.0, 0);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.momentum = 0.9;
  cfg.max_epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sgd_train(spec, init_params(spec, 0.1, 1), data, nullptr, cfg));
}
BENCHMARK(BM_SgdEpoch);

void BM_RandomWalk(benchmark::State& state) {
  const WalkConfig cfg{static_cast<std::size_t>(state.range(0)), 1000, 900, 0};
  for (auto _ : state) benchmark::DoNotOptimize(random_walk_trace(cfg));
}
BENCHMARK(BM_RandomWalk)->Arg(10)->Arg(1000)->Arg(10000);

void BM_QuadraticDescent(benchmark::State& state) {
  const Spectrum spectrum{Spectrum::Kind::LogUniform, 1e-2, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(quadratic_descent_trace(10000, spectrum, 0.5, 0.9, 200, 0));
}
BENCHMARK(BM_QuadraticDescent);

void BM_Heatmap(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(heatmap_grid(2.5, 201));
}
BENCHMARK(BM_Heatmap);

}  // namespace

BENCHMARK_MAIN();
