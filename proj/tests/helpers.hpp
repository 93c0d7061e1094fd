#pragma once

// Test-only oracles. They deliberately avoid the library's solve paths:
// batch least squares goes through dense QR on the raw sample matrix, the
// selector oracles are plain grid searches, and Jacobians come from central
// finite differences.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "quadcatch/gmm.hpp"
#include "quadcatch/leg_control.hpp"
#include "quadcatch/predictor.hpp"

namespace quadcatch::testing {

struct BatchCoefficients {
  double ax, bx, ay, by, az, bz, cz;
};

// Full-matrix least squares on raw (t, x, y, z) rows. The z system carries
// the gravity regularizer as an extra row sqrt(lambda) * e_az with target
// sqrt(lambda) * (-g/2).
inline BatchCoefficients batch_fit_oracle(const std::vector<Eigen::Vector4d>& samples,
                                          double lambda, double g) {
  const int n = static_cast<int>(samples.size());
  Eigen::MatrixXd a2(n, 2);
  Eigen::VectorXd rx(n);
  Eigen::VectorXd ry(n);
  Eigen::MatrixXd a3(n + 1, 3);
  Eigen::VectorXd rz(n + 1);
  for (int i = 0; i < n; ++i) {
    const double t = samples[i](0);
    a2(i, 0) = 1.0;
    a2(i, 1) = t;
    rx(i) = samples[i](1);
    ry(i) = samples[i](2);
    a3(i, 0) = 1.0;
    a3(i, 1) = t;
    a3(i, 2) = t * t;
    rz(i) = samples[i](3);
  }
  const double sl = std::sqrt(lambda);
  a3.row(n) << 0.0, 0.0, sl;
  rz(n) = sl * (-0.5 * g);

  const Eigen::Vector2d cx = a2.colPivHouseholderQr().solve(rx);
  const Eigen::Vector2d cy = a2.colPivHouseholderQr().solve(ry);
  const Eigen::Vector3d cz = a3.colPivHouseholderQr().solve(rz);
  return BatchCoefficients{cx(1), cx(0), cy(1), cy(0), cz(2), cz(1), cz(0)};
}

// Earliest grid argmin of the squared weighted distance to `center` along
// the fitted path.
inline double grid_min_weighted_distance(const TrajectoryFit& fit, const Mat3& weight,
                                         const Vec3& center, double t_lo, double t_hi,
                                         double step) {
  double best_t = t_lo;
  double best_v = std::numeric_limits<double>::infinity();
  for (double t = t_lo; t <= t_hi + 0.5 * step; t += step) {
    const double tc = std::min(t, t_hi);
    const Vec3 e = predict_position(fit, tc).p - center;
    const double v = e.dot(weight * e);
    if (v < best_v) {
      best_v = v;
      best_t = tc;
    }
  }
  return best_t;
}

// Earliest grid argmax of the mixture log-density along the fitted path.
inline double grid_max_density(const TrajectoryFit& fit, const GaussianMixture& mix,
                               double t_lo, double t_hi, double step) {
  double best_t = t_lo;
  double best_v = -std::numeric_limits<double>::infinity();
  for (double t = t_lo; t <= t_hi + 0.5 * step; t += step) {
    const double tc = std::min(t, t_hi);
    const double v = mix.log_density(predict_position(fit, tc).p);
    if (v > best_v) {
      best_v = v;
      best_t = tc;
    }
  }
  return best_t;
}

inline Mat3 finite_difference_jacobian(const LegGeometry& geom, LegSide side,
                                       const Vec3& q, double h = 1e-6) {
  Mat3 j;
  for (int i = 0; i < 3; ++i) {
    Vec3 lo = q;
    Vec3 hi = q;
    lo(i) -= h;
    hi(i) += h;
    j.col(i) =
        (forward_kinematics(geom, side, hi) - forward_kinematics(geom, side, lo)) /
        (2.0 * h);
  }
  return j;
}

// A plausible descending trajectory fit, randomized.
inline TrajectoryFit random_fit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TrajectoryFit fit;
  fit.ax = -4.0 + 3.0 * u(rng);      // [-4, -1]
  fit.bx = 1.5 + 1.0 * u(rng);       // [1.5, 2.5]
  fit.ay = -0.5 + 1.0 * u(rng);
  fit.by = -0.3 + 0.6 * u(rng);
  fit.az = -4.905 + (u(rng) - 0.5);  // around -g/2
  fit.bz = 3.0 * u(rng);
  fit.cz = -0.5 + 2.0 * u(rng);
  fit.n_used = 6;
  fit.latest_time = 0.0;
  return fit;
}

inline Mat3 random_spd(std::mt19937_64& rng, double min_sigma, double max_sigma) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      m(r, c) = gauss(rng);
    }
  }
  const Eigen::HouseholderQR<Mat3> qr(m);
  Mat3 basis = qr.householderQ();
  Vec3 sigmas;
  for (int i = 0; i < 3; ++i) {
    const double s = min_sigma + (max_sigma - min_sigma) * u(rng);
    sigmas(i) = s * s;
  }
  return basis * sigmas.asDiagonal() * basis.transpose();
}

}  // namespace quadcatch::testing
