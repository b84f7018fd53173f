#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qshield/cednet.hpp"
#include "qshield/diffsim.hpp"
#include "qshield/qvc.hpp"
#include "qshield/statevec.hpp"

using namespace qshield;

namespace {

std::vector<double> image(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> px(784);
  for (auto& p : px) p = d(gen) < 0.5 ? 0.0 : d(gen);
  px[0] = 1.0;
  return px;
}

void BM_RotLayer(benchmark::State& state) {
  auto s = statevec::amplitude_encode(image(1));
  for (auto _ : state) {
    for (std::size_t q = 0; q < 10; ++q) s.apply_rot(q, 0.1, 0.2, 0.3);
    benchmark::DoNotOptimize(s.amplitudes().data());
  }
}
BENCHMARK(BM_RotLayer);

void BM_QvcForward(benchmark::State& state) {
  const qvc::Qvc model(qvc::init_params(static_cast<std::size_t>(state.range(0)), 3));
  const auto px = image(2);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward_logits(px));
}
BENCHMARK(BM_QvcForward)->Arg(20)->Arg(100);

void BM_QvcAdjointGradient(benchmark::State& state) {
  const qvc::Qvc model(qvc::init_params(static_cast<std::size_t>(state.range(0)), 3));
  const auto px = image(3);
  for (auto _ : state) benchmark::DoNotOptimize(model.gradient(px, 4));
}
BENCHMARK(BM_QvcAdjointGradient)->Arg(20)->Arg(100);

void BM_QvcParameterShiftGradient(benchmark::State& state) {
  const qvc::Qvc model(qvc::init_params(2, 3));
  const auto px = image(4);
  for (auto _ : state) benchmark::DoNotOptimize(model.gradient(px, 4, qvc::GradMode::ParameterShift));
}
BENCHMARK(BM_QvcParameterShiftGradient);

void BM_Conv(benchmark::State& state) {
  const auto algo = static_cast<cednet::ConvAlgo>(state.range(0));
  const cednet::AeGeometry g;
  const numerics::Tensor x({16, 14, 14}, 0.3), w({32, 16, 3, 3}, 0.01), b({32});
  for (auto _ : state) benchmark::DoNotOptimize(cednet::conv2d(x, g.conv2(), w, b, algo));
  state.SetLabel(algo == cednet::ConvAlgo::Direct ? "direct" : "im2col");
}
BENCHMARK(BM_Conv)->Arg(0)->Arg(1);

void BM_AutoencoderStep(benchmark::State& state) {
  const auto algo = static_cast<cednet::ConvAlgo>(state.range(0));
  const auto params = cednet::init_autoencoder(cednet::AeGeometry{}, 1);
  const numerics::Tensor x({1, 28, 28}, image(5));
  const numerics::Tensor up({1, 28, 28}, 0.01);
  for (auto _ : state) {
    cednet::AeCache cache;
    cednet::forward(x, params, &cache, algo);
    benchmark::DoNotOptimize(cednet::ae_backward(params, cache, up, algo));
  }
  state.SetLabel(algo == cednet::ConvAlgo::Direct ? "direct" : "im2col");
}
BENCHMARK(BM_AutoencoderStep)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
