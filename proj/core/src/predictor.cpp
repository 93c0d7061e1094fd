#include "quadcatch/predictor.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace quadcatch {

void RegressionAccumulators::ingest(const RobotPoint& pt) {
  if (!pt.p.allFinite() || !std::isfinite(pt.stamp)) {
    throw InvalidInputError("observation must be finite");
  }
  if (n_ == 0) {
    time_origin_ = pt.stamp;
  }
  const double t = pt.stamp - time_origin_;
  const double t2 = t * t;

  sums_.s1 += 1.0;
  sums_.st += t;
  sums_.st2 += t2;
  sums_.st3 += t2 * t;
  sums_.st4 += t2 * t2;
  sums_.sx += pt.p.x();
  sums_.sxt += pt.p.x() * t;
  sums_.sy += pt.p.y();
  sums_.syt += pt.p.y() * t;
  sums_.sz += pt.p.z();
  sums_.szt += pt.p.z() * t;
  sums_.szt2 += pt.p.z() * t2;

  latest_time_ = std::max(latest_time_, t);
  samples_.emplace_back(t, pt.p.x(), pt.p.y(), pt.p.z());
  ++n_;
}

TrajectoryFit fit_trajectory(const RegressionAccumulators& acc, double lambda,
                             double g) {
  if (acc.count() < 3) {
    throw InsufficientDataError("trajectory fit needs at least 3 observations");
  }
  if (lambda < 0.0 || !(g > 0.0)) {
    throw InvalidInputError("lambda must be >= 0 and g > 0");
  }
  const PowerSums& s = acc.sums();

  Eigen::Matrix2d m2;
  m2 << s.s1, s.st,
        s.st, s.st2;
  Eigen::LLT<Eigen::Matrix2d> llt2(m2);
  if (llt2.info() != Eigen::Success) {
    throw DegenerateDataError("x/y normal matrix is not positive definite");
  }
  const Eigen::Vector2d solx = llt2.solve(Eigen::Vector2d(s.sx, s.sxt));
  const Eigen::Vector2d soly = llt2.solve(Eigen::Vector2d(s.sy, s.syt));

  Eigen::Matrix3d m3;
  m3 << s.s1,  s.st,  s.st2,
        s.st,  s.st2, s.st3,
        s.st2, s.st3, s.st4 + lambda;
  Eigen::LLT<Eigen::Matrix3d> llt3(m3);
  if (llt3.info() != Eigen::Success) {
    throw DegenerateDataError("z normal matrix is not positive definite");
  }
  const Eigen::Vector3d solz =
      llt3.solve(Eigen::Vector3d(s.sz, s.szt, s.szt2 - lambda * 0.5 * g));

  TrajectoryFit fit;
  fit.bx = solx(0);
  fit.ax = solx(1);
  fit.by = soly(0);
  fit.ay = soly(1);
  fit.cz = solz(0);
  fit.bz = solz(1);
  fit.az = solz(2);
  fit.lambda = lambda;
  fit.g = g;
  fit.n_used = acc.count();
  fit.time_origin = acc.time_origin();
  fit.latest_time = acc.latest_time();

  if (!std::isfinite(fit.ax) || !std::isfinite(fit.bx) || !std::isfinite(fit.ay) ||
      !std::isfinite(fit.by) || !std::isfinite(fit.az) || !std::isfinite(fit.bz) ||
      !std::isfinite(fit.cz)) {
    throw DegenerateDataError("trajectory fit produced non-finite coefficients");
  }
  return fit;
}

RobotPoint predict_position(const TrajectoryFit& fit, double t) {
  RobotPoint out;
  out.p.x() = fit.ax * t + fit.bx;
  out.p.y() = fit.ay * t + fit.by;
  out.p.z() = fit.az * t * t + fit.bz * t + fit.cz;
  out.stamp = t;
  return out;
}

CrossingTime time_at_x(const TrajectoryFit& fit, double x_target) {
  if (std::abs(fit.ax) < 1e-9) {
    throw NoCrossingError("fitted x velocity is zero; trajectory never crosses");
  }
  CrossingTime out;
  out.t = (x_target - fit.bx) / fit.ax;
  out.already_passed = out.t < fit.latest_time;
  return out;
}

}  // namespace quadcatch
