#include <benchmark/benchmark.h>

#include <random>

#include "relight/envlight.hpp"
#include "relight/lowrank.hpp"
#include "relight/metrics.hpp"
#include "relight/render.hpp"

using namespace relight;

namespace {

ShLighting bench_light() {
  ShLighting l = ShLighting::dc(1.0);
  l.coeffs[1] = 0.2;
  l.coeffs[2] = 0.5;
  l.coeffs[4] = 0.05;
  return l;
}

void BM_RenderComposite(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const auto nm = sphere_normal_map(w, w);
  const Material m{RadianceImage(w, w, Rgb::Constant(0.7)), 0.4, 16.0};
  const auto light = bench_light();
  for (auto _ : state) benchmark::DoNotOptimize(render_composite(nm, m, light));
  state.SetItemsProcessed(state.iterations() * w * w);
}
BENCHMARK(BM_RenderComposite)->Arg(64)->Arg(256);

void BM_RenderGradients(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const auto nm = sphere_normal_map(w, w);
  const Material m{RadianceImage(w, w, Rgb::Constant(0.7)), 0.4, 16.0};
  const RadianceImage upstream(w, w, Rgb::Ones());
  const auto light = bench_light();
  for (auto _ : state) benchmark::DoNotOptimize(render_gradients(nm, m, light, upstream));
  state.SetItemsProcessed(state.iterations() * w * w);
}
BENCHMARK(BM_RenderGradients)->Arg(64)->Arg(256);

void BM_RankOne(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), d = static_cast<int>(state.range(1));
  std::mt19937_64 rng(0);
  std::normal_distribution<double> g;
  Eigen::MatrixXd r(n, d);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(lowrank::lowrank_loss<double>(r));
}
BENCHMARK(BM_RankOne)->Args({4, 256})->Args({8, 4096})->Args({8, 3 * 64 * 64});

void BM_ProjectToSh(benchmark::State& state) {
  const auto pano = envlight::synthesize_panorama(bench_light(), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(envlight::project_to_sh(pano));
}
BENCHMARK(BM_ProjectToSh)->Arg(128)->Arg(512);

void BM_Dssim(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const auto nm = sphere_normal_map(w, w);
  const Material m{RadianceImage(w, w, Rgb::Constant(0.7)), 0.0, 1.0};
  const auto a = render_diffuse(nm, m, bench_light());
  const auto b = render_diffuse(nm, m, ShLighting::dc(1.0));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::dssim(a, b));
}
BENCHMARK(BM_Dssim)->Arg(64)->Arg(256);

}  // namespace
BENCHMARK_MAIN();
