#include <benchmark/benchmark.h>

#include <vector>

#include "swarmcvt/gaussian.hpp"
#include "swarmcvt/gcvt.hpp"
#include "swarmcvt/planner.hpp"
#include "swarmcvt/rng.hpp"
#include "swarmcvt/transport.hpp"
#include "swarmcvt/workspace.hpp"

using namespace swarmcvt;

namespace {

Gaussian2 make_gaussian(Rng& rng) {
  const double theta = rng.uniform() * 6.28318530717958647692;
  Eigen::Matrix2d v;
  v << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  d(0, 0) = 0.2 + rng.uniform() * 3.8;
  d(1, 1) = 0.2 + rng.uniform() * 3.8;
  Gaussian2 g;
  g.mean = {rng.uniform() * 10.0, rng.uniform() * 10.0};
  g.cov = v * d * v.transpose();
  return g;
}

Gmm make_gmm(Rng& rng, int n) {
  Gmm p;
  for (int i = 0; i < n; ++i) {
    p.components.push_back(make_gaussian(rng));
    p.weights.push_back(1.0 / n);
  }
  return p;
}

void BM_W2(benchmark::State& state) {
  Rng rng(1);
  const Gaussian2 a = make_gaussian(rng);
  const Gaussian2 b = make_gaussian(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(w2(a, b));
  }
}
BENCHMARK(BM_W2);

void BM_Interpolate(benchmark::State& state) {
  Rng rng(2);
  const Gaussian2 a = make_gaussian(rng);
  const Gaussian2 b = make_gaussian(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(interpolate(a, b, 0.37));
  }
}
BENCHMARK(BM_Interpolate);

void BM_WgDistance(benchmark::State& state) {
  Rng rng(3);
  const Gmm p1 = make_gmm(rng, static_cast<int>(state.range(0)));
  const Gmm p2 = make_gmm(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(wg_distance(p1, p2));
  }
}
BENCHMARK(BM_WgDistance)->Arg(3)->Arg(10)->Arg(30);

void BM_SolveTransport(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(4);
  Eigen::MatrixXd cost(n, n);
  Eigen::VectorXd supply(n), demand(n);
  for (int i = 0; i < n; ++i) {
    supply(i) = 1.0 / n;
    demand(i) = 1.0 / n;
    for (int j = 0; j < n; ++j) cost(i, j) = rng.uniform() * 10.0;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_transport(cost, supply, demand));
  }
}
BENCHMARK(BM_SolveTransport)->Arg(10)->Arg(30)->Arg(100);

void BM_Lloyd(benchmark::State& state) {
  const Workspace w = rasterize(10.0, 8.0, {}, 0.1);
  GcvtParams params;
  params.K = static_cast<int>(state.range(0));
  params.lloyd_iters = 20;
  params.lloyd_tol = 0.0;  // run all iterations for a stable workload
  params.seed = 5;
  const auto means0 = seed_means(w, params.K, params.seed);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lloyd_cvt(w, means0, params));
  }
}
BENCHMARK(BM_Lloyd)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_BuildGcvt(benchmark::State& state) {
  const Workspace w = rasterize(10.0, 8.0, {}, 0.1);
  GcvtParams params;
  params.K = static_cast<int>(state.range(0));
  params.lloyd_iters = 100;
  params.lloyd_tol = 1e-4;
  params.seed = 6;
  const GcvtVariant variant =
      state.range(1) == 1 ? GcvtVariant::I : GcvtVariant::II;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_gcvt(w, params, variant));
  }
}
BENCHMARK(BM_BuildGcvt)
    ->Args({10, 2})
    ->Args({10, 1})
    ->Args({25, 2})
    ->Unit(benchmark::kMillisecond);

void BM_PlanWithTessellation(benchmark::State& state) {
  const Workspace w = rasterize(10.0, 8.0, {}, 0.1);
  GcvtParams gcvt;
  gcvt.K = 16;
  gcvt.lloyd_iters = 100;
  gcvt.lloyd_tol = 1e-4;
  gcvt.seed = 7;
  const Tessellation tess = build_gcvt(w, gcvt, GcvtVariant::II);
  Gmm p0, pf;
  p0.components.push_back({{1.0, 4.0}, Eigen::Matrix2d::Identity() * 0.25});
  p0.weights.push_back(1.0);
  pf.components.push_back({{9.0, 4.0}, Eigen::Matrix2d::Identity() * 0.25});
  pf.weights.push_back(1.0);
  PlannerParams planner;
  planner.d_th = 4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_with_tessellation(tess, p0, pf, w, planner));
  }
}
BENCHMARK(BM_PlanWithTessellation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
