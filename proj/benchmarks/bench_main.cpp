#include <benchmark/benchmark.h>

#include <random>

#include "mfa/mfa.hpp"

namespace {

mfa::ImageGrid noisy_image(int n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(50.0, 10.0);
  mfa::ImageGrid img(n, n);
  for (double& v : img.samples()) v = noise(rng);
  return img;
}

void BM_Convolve(benchmark::State& state) {
  const auto img = noisy_image(static_cast<int>(state.range(0)));
  const auto psf = mfa::gaussian_psf(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(mfa::convolve2d(img, psf.kernel()));
  state.SetItemsProcessed(state.iterations() * img.size());
}
BENCHMARK(BM_Convolve)->Arg(64)->Arg(128)->Arg(256);

void BM_Gradient(benchmark::State& state) {
  const auto g = noisy_image(static_cast<int>(state.range(0)));
  const auto psf = mfa::gaussian_psf(2.0);
  const mfa::NoiseModel noise(100.0);
  for (auto _ : state) benchmark::DoNotOptimize(mfa::gradient(g, g, psf, noise, 30.0, 10.0));
  state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_Gradient)->Arg(64)->Arg(128)->Arg(256);

void BM_AnnealTwentyIterations(benchmark::State& state) {
  const auto g = noisy_image(128);
  const auto psf = mfa::gaussian_psf(2.0);
  const mfa::NoiseModel noise(100.0);
  auto params = mfa::default_mfa_params(g, noise);
  params.backtracking = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(mfa::anneal(g, psf, noise, params));
}
BENCHMARK(BM_AnnealTwentyIterations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Wiener(benchmark::State& state) {
  const auto g = noisy_image(static_cast<int>(state.range(0)));
  const auto psf = mfa::gaussian_psf(2.0);
  const mfa::NoiseModel noise(100.0);
  for (auto _ : state) benchmark::DoNotOptimize(mfa::wiener(g, psf, noise));
}
BENCHMARK(BM_Wiener)->Arg(64)->Arg(128)->Arg(256);

}  // namespace
BENCHMARK_MAIN();
