#include <benchmark/benchmark.h>

#include <random>

#include "quadcatch/config.hpp"
#include "quadcatch/experiments.hpp"

namespace {

using namespace quadcatch;

TrajectoryFit reference_fit() {
  TrajectoryFit fit;
  fit.ax = -2.8;
  fit.bx = 1.9;
  fit.ay = 0.15;
  fit.by = -0.02;
  fit.az = -4.905;
  fit.bz = 2.3;
  fit.cz = 0.1;
  return fit;
}

SelectorContext reference_context() {
  SelectorContext ctx;
  ctx.x_c = Vec3(0.27, 0.0, -0.26);
  GaussianComponent c;
  c.weight = 1.0;
  c.mean = ctx.x_c;
  c.covariance = Mat3::Identity() * 0.01;
  ctx.mixture = GaussianMixture(std::vector<GaussianComponent>{c});
  return ctx;
}

void BM_FitTrajectory(benchmark::State& state) {
  RegressionAccumulators acc;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss(0.0, 0.01);
  for (int i = 0; i < 12; ++i) {
    RobotPoint pt;
    const double t = i / 30.0;
    pt.stamp = t;
    pt.p = Vec3(2.0 - 2.8 * t + gauss(rng), 0.1 * t, 0.4 + 2.0 * t - 4.905 * t * t);
    acc.ingest(pt);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_trajectory(acc, 1.0, 9.81));
  }
}
BENCHMARK(BM_FitTrajectory);

void BM_PlaneSelector(benchmark::State& state) {
  const TrajectoryFit fit = reference_fit();
  const SelectorContext ctx = reference_context();
  for (auto _ : state) {
    benchmark::DoNotOptimize(plane_intersection(fit, ctx, 0.1));
  }
}
BENCHMARK(BM_PlaneSelector);

void BM_MinDistSelector(benchmark::State& state) {
  const TrajectoryFit fit = reference_fit();
  const SelectorContext ctx = reference_context();
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_distance_to_center(fit, ctx, 0.1));
  }
}
BENCHMARK(BM_MinDistSelector);

void BM_GmmSelector(benchmark::State& state) {
  const TrajectoryFit fit = reference_fit();
  const SelectorContext ctx = reference_context();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmm_max_likelihood(fit, ctx, 0.1));
  }
}
BENCHMARK(BM_GmmSelector);

void BM_CartesianPdTorque(benchmark::State& state) {
  const LegGeometry geom;
  const CartesianGains gains;
  JointState js;
  js.q = geom.nominal_q;
  js.qd = Vec3(0.1, -0.2, 0.3);
  const FootTarget target{Vec3(0.25, 0.05, -0.2), GripPhase::open};
  for (auto _ : state) {
    benchmark::DoNotOptimize(cartesian_pd_torque(geom, LegSide::left, js, target, gains));
  }
}
BENCHMARK(BM_CartesianPdTorque);

void BM_EmFit(benchmark::State& state) {
  const DemoDataset data =
      generate_demo_dataset(100, Vec3(0.27, 0.0, -0.29), Vec3(0.05, 0.04, 0.05), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_em(data, 1, {.seed = 5}));
  }
}
BENCHMARK(BM_EmFit);

void BM_Episode(benchmark::State& state) {
  const FullConfig cfg = default_config();
  const SimConfig sim = cfg.make_sim_config();
  const auto draws = sample_throws(make_centered_scenario(1, 4), nominal_foot_center(sim.legs));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_episode(draws[0].spec, sim, draws[0].episode_seed));
  }
}
BENCHMARK(BM_Episode);

}  // namespace

BENCHMARK_MAIN();
