#pragma once

#include <optional>
#include <string>

#include "quadcatch/gmm.hpp"
#include "quadcatch/predictor.hpp"

namespace quadcatch {

enum class CatchMethod { plane, min_dist, gmm };

std::string to_string(CatchMethod method);
CatchMethod catch_method_from_string(const std::string& name);

// A selected catching position on the fitted trajectory. Times are in the
// fit's rebased base; t_remain = t_catch - t_now at creation.
struct CatchPlan {
  Vec3 x_catch = Vec3::Zero();
  double t_catch = 0.0;
  double t_remain = 0.0;
  CatchMethod method = CatchMethod::plane;
};

// Shared inputs of the three selection methods.
struct SelectorContext {
  double x_offset = 0.25;       // catching plane location, m
  Vec3 x_c = Vec3::Zero();      // nominal center between the front feet
  std::optional<GaussianMixture> mixture;  // required by the gmm method
  double t_horizon = 3.0;       // lookahead bound for min_dist/gmm, s
};

// Catch where the trajectory crosses the vertical plane x = x_offset.
// Throws PlanInfeasibleError when the trajectory never crosses or the
// crossing lies in the past.
CatchPlan plane_intersection(const TrajectoryFit& fit, const SelectorContext& ctx,
                             double t_now);

// Catch at the trajectory point nearest to x_c over
// [t_now, t_now + t_horizon]. The squared distance is a quartic in t; its
// stationary points are the roots of a cubic, solved in closed form.
CatchPlan min_distance_to_center(const TrajectoryFit& fit, const SelectorContext& ctx,
                                 double t_now);

// Catch at the trajectory point with maximal mixture density over
// [t_now, t_now + t_horizon]. For a single component this reduces to the
// same closed-form quartic minimisation; otherwise a dense 1 ms scan with
// local refinement.
CatchPlan gmm_max_likelihood(const TrajectoryFit& fit, const SelectorContext& ctx,
                             double t_now);

// Dispatches to the configured method.
CatchPlan refresh(CatchMethod method, const TrajectoryFit& fit,
                  const SelectorContext& ctx, double t_now);

}  // namespace quadcatch
