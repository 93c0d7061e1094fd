#pragma once

#include <vector>

#include "quadcatch/frames.hpp"

namespace quadcatch {

// Running sums for the trajectory normal equations. Times are rebased so the
// first ingested observation sits at t = 0, which keeps the quartic power
// sums well conditioned.
struct PowerSums {
  double s1 = 0.0;    // sum of 1
  double st = 0.0;    // sum of t
  double st2 = 0.0;   // sum of t^2
  double st3 = 0.0;   // sum of t^3
  double st4 = 0.0;   // sum of t^4
  double sx = 0.0;    // sum of x
  double sxt = 0.0;   // sum of x t
  double sy = 0.0;    // sum of y
  double syt = 0.0;   // sum of y t
  double sz = 0.0;    // sum of z
  double szt = 0.0;   // sum of z t
  double szt2 = 0.0;  // sum of z t^2
};

class RegressionAccumulators {
 public:
  // Adds one observation; the first call fixes the time origin.
  void ingest(const RobotPoint& pt);

  int count() const { return n_; }
  const PowerSums& sums() const { return sums_; }

  // Wall-clock stamp of the first ingested observation.
  double time_origin() const { return time_origin_; }
  // Rebased stamp of the newest observation.
  double latest_time() const { return latest_time_; }

  // Ingested points as (t, x, y, z) rows with rebased t. Kept so the sums
  // can be audited against a from-scratch recomputation.
  const std::vector<Eigen::Vector4d>& samples() const { return samples_; }

 private:
  int n_ = 0;
  double time_origin_ = 0.0;
  double latest_time_ = 0.0;
  PowerSums sums_;
  std::vector<Eigen::Vector4d> samples_;
};

// Coefficients of the fitted trajectory: x and y linear, z quadratic, in the
// accumulator's rebased time.
struct TrajectoryFit {
  double ax = 0.0;  // m/s
  double bx = 0.0;  // m
  double ay = 0.0;  // m/s
  double by = 0.0;  // m
  double az = 0.0;  // m/s^2
  double bz = 0.0;  // m/s
  double cz = 0.0;  // m
  double lambda = 1.0;
  double g = 9.81;
  int n_used = 0;
  double time_origin = 0.0;  // wall-clock stamp of rebased t = 0
  double latest_time = 0.0;  // rebased stamp of the newest observation
};

// Solves the two 2x2 normal systems for x/y and the 3x3 system for z whose
// last diagonal entry is st4 + lambda and whose last right-hand side entry
// is szt2 - lambda * g / 2. Requires at least three observations; repeated
// identical stamps make the systems singular.
TrajectoryFit fit_trajectory(const RegressionAccumulators& acc,
                             double lambda = 1.0, double g = 9.81);

// Evaluates the fitted trajectory at rebased time t.
RobotPoint predict_position(const TrajectoryFit& fit, double t);

struct CrossingTime {
  double t = 0.0;
  // True when the crossing precedes the newest ingested observation.
  bool already_passed = false;
};

// Time at which the fitted x coordinate reaches x_target. Throws
// NoCrossingError when the fitted x velocity is (numerically) zero.
CrossingTime time_at_x(const TrajectoryFit& fit, double x_target);

}  // namespace quadcatch
