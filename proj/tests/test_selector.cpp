#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "quadcatch/selector.hpp"

using namespace quadcatch;
using quadcatch::testing::grid_max_density;
using quadcatch::testing::grid_min_weighted_distance;
using quadcatch::testing::random_fit;
using quadcatch::testing::random_spd;

namespace {

TrajectoryFit reference_fit() {
  TrajectoryFit fit;
  fit.ax = -2.5;
  fit.bx = 2.0;
  fit.ay = 0.1;
  fit.by = 0.0;
  fit.az = -4.905;
  fit.bz = 2.0;
  fit.cz = 1.5;
  return fit;
}

GaussianMixture isotropic_at(const Vec3& mean, double sigma2) {
  GaussianComponent c;
  c.weight = 1.0;
  c.mean = mean;
  c.covariance = Mat3::Identity() * sigma2;
  return GaussianMixture(std::vector<GaussianComponent>{c});
}

}  // namespace

TEST_CASE("plane intersection evaluates the crossing") {
  const TrajectoryFit fit = reference_fit();
  SelectorContext ctx;
  ctx.x_offset = 0.25;

  const CatchPlan plan = plane_intersection(fit, ctx, 0.0);
  CHECK(plan.t_catch == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(plan.x_catch.x() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(plan.x_catch.y() == doctest::Approx(0.1 * 0.7).epsilon(1e-12));
  CHECK(plan.x_catch.z() ==
        doctest::Approx(-4.905 * 0.49 + 2.0 * 0.7 + 1.5).epsilon(1e-12));
  CHECK(plan.method == CatchMethod::plane);

  const CatchPlan later = plane_intersection(fit, ctx, 0.4);
  CHECK(later.t_remain == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("plane method is infeasible for receding trajectories") {
  TrajectoryFit fit = reference_fit();
  fit.ax = 2.5;  // moving away
  SelectorContext ctx;
  ctx.x_offset = 0.25;
  CHECK_THROWS_AS(plane_intersection(fit, ctx, 0.0), PlanInfeasibleError);

  // Crossing in the past.
  const TrajectoryFit toward = reference_fit();
  CHECK_THROWS_AS(plane_intersection(toward, ctx, 1.0), PlanInfeasibleError);

  TrajectoryFit parallel = reference_fit();
  parallel.ax = 0.0;
  CHECK_THROWS_AS(plane_intersection(parallel, ctx, 0.0), PlanInfeasibleError);
}

TEST_CASE("min distance on a straight-line trajectory") {
  TrajectoryFit fit;
  fit.ax = -1.0;
  fit.bx = 1.0;
  fit.ay = 0.0;
  fit.by = 0.0;
  fit.az = 0.0;
  fit.bz = 0.0;
  fit.cz = 0.3;

  SelectorContext ctx;
  ctx.x_c = Vec3(0.25, 0.0, 0.3);

  const CatchPlan plan = min_distance_to_center(fit, ctx, 0.0);
  CHECK(plan.t_catch == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(plan.x_catch.isApprox(Vec3(0.25, 0.0, 0.3), 1e-9));

  const double oracle =
      grid_min_weighted_distance(fit, Mat3::Identity(), ctx.x_c, 0.0, 3.0, 1e-5);
  CHECK(std::abs(plan.t_catch - oracle) < 1e-4);
}

TEST_CASE("a center on the trajectory gives zero distance at the crossing") {
  const TrajectoryFit fit = reference_fit();
  SelectorContext ctx;
  ctx.x_c = predict_position(fit, 0.42).p;

  const CatchPlan plan = min_distance_to_center(fit, ctx, 0.0);
  CHECK(plan.t_catch == doctest::Approx(0.42).epsilon(1e-7));
  CHECK((plan.x_catch - ctx.x_c).norm() < 1e-8);
}

TEST_CASE("min distance matches the grid oracle on random fits") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const TrajectoryFit fit = random_fit(rng);
    SelectorContext ctx;
    ctx.x_c = Vec3(0.3 * u(rng), 0.4 * (u(rng) - 0.5), -0.5 + u(rng));
    ctx.t_horizon = 3.0;
    const double t_now = 0.2 * u(rng);

    const CatchPlan plan = min_distance_to_center(fit, ctx, t_now);
    const double oracle = grid_min_weighted_distance(fit, Mat3::Identity(), ctx.x_c,
                                                     t_now, t_now + 3.0, 1e-5);
    CHECK(std::abs(plan.t_catch - oracle) < 1e-4);
  }
}

TEST_CASE("min distance optimality against a coarse grid") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const TrajectoryFit fit = random_fit(rng);
    SelectorContext ctx;
    ctx.x_c = Vec3(0.25, 0.0, -0.3);
    const CatchPlan plan = min_distance_to_center(fit, ctx, 0.0);
    const double best = (plan.x_catch - ctx.x_c).squaredNorm();
    for (double t = 0.0; t <= 3.0; t += 1e-4) {
      const double v = (predict_position(fit, t).p - ctx.x_c).squaredNorm();
      CHECK(v >= best - 1e-9);
    }
  }
}

TEST_CASE("isotropic single-component mixture reproduces min distance") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const TrajectoryFit fit = random_fit(rng);
    SelectorContext ctx;
    ctx.x_c = Vec3(0.25, 0.0, -0.25);
    ctx.mixture = isotropic_at(ctx.x_c, 0.01);

    const CatchPlan dist_plan = min_distance_to_center(fit, ctx, 0.0);
    const CatchPlan gmm_plan = gmm_max_likelihood(fit, ctx, 0.0);
    CHECK(std::abs(dist_plan.t_catch - gmm_plan.t_catch) < 1e-6);
    CHECK(gmm_plan.method == CatchMethod::gmm);
  }
}

TEST_CASE("anisotropic single component matches the density grid oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const TrajectoryFit fit = random_fit(rng);
    GaussianComponent c;
    c.weight = 1.0;
    c.mean = Vec3(0.3, 0.05, -0.3);
    c.covariance = random_spd(rng, 0.05, 0.3);
    SelectorContext ctx;
    ctx.mixture = GaussianMixture(std::vector<GaussianComponent>{c});

    const CatchPlan plan = gmm_max_likelihood(fit, ctx, 0.0);
    const double oracle = grid_max_density(fit, *ctx.mixture, 0.0, 3.0, 1e-5);
    CHECK(std::abs(plan.t_catch - oracle) < 1e-4);
  }
}

TEST_CASE("a trajectory through the mean is caught at the mean") {
  const TrajectoryFit fit = reference_fit();
  const Vec3 mean = predict_position(fit, 0.55).p;
  SelectorContext ctx;
  ctx.mixture = isotropic_at(mean, 0.04);

  const CatchPlan plan = gmm_max_likelihood(fit, ctx, 0.0);
  CHECK((plan.x_catch - mean).norm() < 1e-7);
}

TEST_CASE("multi-component mixtures use the dense scan") {
  const TrajectoryFit fit = reference_fit();
  GaussianComponent a;
  a.weight = 0.5;
  a.mean = predict_position(fit, 0.3).p;
  a.covariance = Mat3::Identity() * 0.02;
  GaussianComponent b;
  b.weight = 0.5;
  b.mean = predict_position(fit, 0.6).p + Vec3(0.0, 0.0, -0.05);
  b.covariance = Mat3::Identity() * 0.005;

  SelectorContext ctx;
  ctx.mixture = GaussianMixture(std::vector<GaussianComponent>{a, b});

  const CatchPlan plan = gmm_max_likelihood(fit, ctx, 0.0);
  const double oracle = grid_max_density(fit, *ctx.mixture, 0.0, 3.0, 1e-5);
  CHECK(std::abs(plan.t_catch - oracle) < 1e-4);
}

TEST_CASE("every plan lies on the fitted trajectory") {
  std::mt19937_64 rng(43);
  SelectorContext ctx;
  ctx.x_offset = 0.25;
  ctx.x_c = Vec3(0.27, 0.0, -0.26);
  ctx.mixture = isotropic_at(Vec3(0.27, 0.0, -0.2), 0.02);

  for (int trial = 0; trial < 100; ++trial) {
    const TrajectoryFit fit = random_fit(rng);
    for (CatchMethod method :
         {CatchMethod::plane, CatchMethod::min_dist, CatchMethod::gmm}) {
      CatchPlan plan;
      try {
        plan = refresh(method, fit, ctx, 0.0);
      } catch (const PlanInfeasibleError&) {
        continue;
      }
      const Vec3 on_path = predict_position(fit, plan.t_catch).p;
      CHECK((plan.x_catch - on_path).norm() <= 1e-9);
      CHECK(plan.t_remain == doctest::Approx(plan.t_catch).epsilon(1e-12));
    }
  }
}

TEST_CASE("refresh is deterministic and tags the method") {
  const TrajectoryFit fit = reference_fit();
  SelectorContext ctx;
  ctx.x_c = Vec3(0.25, 0.0, 0.2);
  ctx.mixture = isotropic_at(ctx.x_c, 0.01);

  const CatchPlan a = refresh(CatchMethod::min_dist, fit, ctx, 0.1);
  const CatchPlan b = refresh(CatchMethod::min_dist, fit, ctx, 0.1);
  CHECK(a.t_catch == b.t_catch);
  CHECK(a.x_catch == b.x_catch);

  const CatchPlan switched = refresh(CatchMethod::gmm, fit, ctx, 0.1);
  CHECK(switched.method == CatchMethod::gmm);
}

TEST_CASE("a confirming noiseless observation leaves the plan stable") {
  // Fits from 5 and 6 noiseless samples of the same parabola are identical,
  // so the refreshed plan moves only by numerical noise.
  RegressionAccumulators acc;
  const TrajectoryFit truth = reference_fit();
  for (int i = 0; i < 5; ++i) {
    RobotPoint pt = predict_position(truth, i / 30.0);
    pt.stamp = i / 30.0;
    acc.ingest(pt);
  }
  const TrajectoryFit fit5 = fit_trajectory(acc, 1.0, 9.81);
  RobotPoint next = predict_position(truth, 5.0 / 30.0);
  next.stamp = 5.0 / 30.0;
  acc.ingest(next);
  const TrajectoryFit fit6 = fit_trajectory(acc, 1.0, 9.81);

  SelectorContext ctx;
  ctx.x_c = Vec3(0.25, 0.0, 0.3);
  const CatchPlan before = min_distance_to_center(fit5, ctx, 5.0 / 30.0);
  const CatchPlan after = min_distance_to_center(fit6, ctx, 5.0 / 30.0);
  CHECK(std::abs(before.t_catch - after.t_catch) < 1e-6);
  CHECK((before.x_catch - after.x_catch).norm() < 1e-6);
}

TEST_CASE("plane catch positions sit exactly on the plane") {
  std::mt19937_64 rng(47);
  SelectorContext ctx;
  ctx.x_offset = 0.25;
  for (int trial = 0; trial < 100; ++trial) {
    const TrajectoryFit fit = random_fit(rng);
    try {
      const CatchPlan plan = plane_intersection(fit, ctx, 0.0);
      CHECK(plan.x_catch.x() == doctest::Approx(0.25).epsilon(1e-12));
    } catch (const PlanInfeasibleError&) {
    }
  }
}

TEST_CASE("method names round trip") {
  for (CatchMethod m : {CatchMethod::plane, CatchMethod::min_dist, CatchMethod::gmm}) {
    CHECK(catch_method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(catch_method_from_string("nets"), InvalidInputError);
}
