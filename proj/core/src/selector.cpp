#include "quadcatch/selector.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <cmath>

#include "quadcatch/polynomial.hpp"

namespace quadcatch {

namespace {

// e(t) = x_pred(t) - center is quadratic in t with vector coefficients
// e = c0 + c1 t + c2 t^2, so f(t) = e' W e is a quartic.
struct PathQuartic {
  double q0, q1, q2, q3, q4;

  double value(double t) const {
    return (((q4 * t + q3) * t + q2) * t + q1) * t + q0;
  }
};

PathQuartic weighted_path_quartic(const TrajectoryFit& fit, const Mat3& weight,
                                  const Vec3& center) {
  const Vec3 c0(fit.bx - center.x(), fit.by - center.y(), fit.cz - center.z());
  const Vec3 c1(fit.ax, fit.ay, fit.bz);
  const Vec3 c2(0.0, 0.0, fit.az);

  PathQuartic q;
  q.q0 = c0.dot(weight * c0);
  q.q1 = 2.0 * c0.dot(weight * c1);
  q.q2 = 2.0 * c0.dot(weight * c2) + c1.dot(weight * c1);
  q.q3 = 2.0 * c1.dot(weight * c2);
  q.q4 = c2.dot(weight * c2);
  return q;
}

// Argmin of the quartic on [t_lo, t_hi]: endpoints plus the real roots of
// the derivative cubic, earliest minimiser on ties.
double minimize_quartic(const PathQuartic& q, double t_lo, double t_hi) {
  std::array<double, 5> candidates;
  int n = 0;
  candidates[n++] = t_lo;
  candidates[n++] = t_hi;

  std::array<double, 3> roots;
  const int n_roots =
      real_cubic_roots(4.0 * q.q4, 3.0 * q.q3, 2.0 * q.q2, q.q1, roots);
  for (int i = 0; i < n_roots; ++i) {
    if (roots[i] > t_lo && roots[i] < t_hi) {
      candidates[n++] = roots[i];
    }
  }

  std::sort(candidates.begin(), candidates.begin() + n);
  double best_t = candidates[0];
  double best_v = q.value(candidates[0]);
  for (int i = 1; i < n; ++i) {
    const double v = q.value(candidates[i]);
    if (v < best_v) {
      best_v = v;
      best_t = candidates[i];
    }
  }
  return best_t;
}

CatchPlan make_plan(const TrajectoryFit& fit, CatchMethod method, double t_catch,
                    double t_now) {
  CatchPlan plan;
  plan.method = method;
  plan.t_catch = t_catch;
  plan.t_remain = t_catch - t_now;
  plan.x_catch = predict_position(fit, t_catch).p;
  return plan;
}

void check_interval(const SelectorContext& ctx) {
  if (!(ctx.t_horizon > 0.0)) {
    throw InvalidInputError("t_horizon must be positive");
  }
}

}  // namespace

std::string to_string(CatchMethod method) {
  switch (method) {
    case CatchMethod::plane:
      return "plane";
    case CatchMethod::min_dist:
      return "mindist";
    case CatchMethod::gmm:
      return "gmm";
  }
  return "unknown";
}

CatchMethod catch_method_from_string(const std::string& name) {
  if (name == "plane") {
    return CatchMethod::plane;
  }
  if (name == "mindist" || name == "min_dist") {
    return CatchMethod::min_dist;
  }
  if (name == "gmm") {
    return CatchMethod::gmm;
  }
  throw InvalidInputError("unknown catch method: " + name);
}

CatchPlan plane_intersection(const TrajectoryFit& fit, const SelectorContext& ctx,
                             double t_now) {
  CrossingTime crossing;
  try {
    crossing = time_at_x(fit, ctx.x_offset);
  } catch (const NoCrossingError& e) {
    throw PlanInfeasibleError(e.what());
  }
  if (crossing.t < t_now) {
    throw PlanInfeasibleError("catching plane crossing lies in the past");
  }
  return make_plan(fit, CatchMethod::plane, crossing.t, t_now);
}

CatchPlan min_distance_to_center(const TrajectoryFit& fit, const SelectorContext& ctx,
                                 double t_now) {
  check_interval(ctx);
  const PathQuartic q = weighted_path_quartic(fit, Mat3::Identity(), ctx.x_c);
  const double t_catch = minimize_quartic(q, t_now, t_now + ctx.t_horizon);
  return make_plan(fit, CatchMethod::min_dist, t_catch, t_now);
}

CatchPlan gmm_max_likelihood(const TrajectoryFit& fit, const SelectorContext& ctx,
                             double t_now) {
  check_interval(ctx);
  if (!ctx.mixture || ctx.mixture->k() == 0) {
    throw InvalidInputError("gmm method requires a fitted mixture");
  }
  const GaussianMixture& mix = *ctx.mixture;
  const double t_lo = t_now;
  const double t_hi = t_now + ctx.t_horizon;

  double t_catch;
  if (mix.k() == 1) {
    // Maximising one Gaussian along the path is minimising the Mahalanobis
    // quartic.
    const GaussianComponent& c = mix.components().front();
    Eigen::LLT<Mat3> llt(c.covariance);
    const Mat3 precision = llt.solve(Mat3::Identity());
    const PathQuartic q = weighted_path_quartic(fit, precision, c.mean);
    t_catch = minimize_quartic(q, t_lo, t_hi);
  } else {
    // Dense scan at <= 1 ms, then golden-section refinement around the best
    // cell.
    const double step = 1e-3;
    const int n_steps = static_cast<int>(std::ceil((t_hi - t_lo) / step));
    double best_t = t_lo;
    double best_v = mix.log_density(predict_position(fit, t_lo).p);
    for (int i = 1; i <= n_steps; ++i) {
      const double t = std::min(t_lo + i * step, t_hi);
      const double v = mix.log_density(predict_position(fit, t).p);
      if (v > best_v) {
        best_v = v;
        best_t = t;
      }
    }

    double lo = std::max(t_lo, best_t - step);
    double hi = std::min(t_hi, best_t + step);
    const double inv_phi = 0.6180339887498949;
    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double fa = mix.log_density(predict_position(fit, a).p);
    double fb = mix.log_density(predict_position(fit, b).p);
    while (hi - lo > 1e-10) {
      if (fa > fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - inv_phi * (hi - lo);
        fa = mix.log_density(predict_position(fit, a).p);
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + inv_phi * (hi - lo);
        fb = mix.log_density(predict_position(fit, b).p);
      }
    }
    const double mid = 0.5 * (lo + hi);
    t_catch = (mix.log_density(predict_position(fit, mid).p) > best_v) ? mid : best_t;
  }
  return make_plan(fit, CatchMethod::gmm, t_catch, t_now);
}

CatchPlan refresh(CatchMethod method, const TrajectoryFit& fit,
                  const SelectorContext& ctx, double t_now) {
  switch (method) {
    case CatchMethod::plane:
      return plane_intersection(fit, ctx, t_now);
    case CatchMethod::min_dist:
      return min_distance_to_center(fit, ctx, t_now);
    case CatchMethod::gmm:
      return gmm_max_likelihood(fit, ctx, t_now);
  }
  throw InvalidInputError("unknown catch method");
}

}  // namespace quadcatch
