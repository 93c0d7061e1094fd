#include "quadcatch/leg_control.hpp"

#include <cmath>
#include <limits>

namespace quadcatch {

void LegGeometry::validate() const {
  if (!(l_hip > 0.0) || !(l_thigh > 0.0) || !(l_calf > 0.0)) {
    throw InvalidInputError("leg link lengths must be positive");
  }
  if (((q_max - q_min).array() <= 0.0).any()) {
    throw InvalidInputError("joint limits must satisfy min < max");
  }
  if (!shoulder_left.allFinite() || !shoulder_right.allFinite() ||
      !nominal_q.allFinite()) {
    throw InvalidInputError("leg geometry must be finite");
  }
}

Vec3 forward_kinematics(const LegGeometry& geom, LegSide side, const Vec3& q) {
  if (!q.allFinite()) {
    throw InvalidInputError("joint angles must be finite");
  }
  const double side_sign = geom.side_sign(side);
  const double s1 = std::sin(q(0));
  const double c1 = std::cos(q(0));
  const double s2 = std::sin(q(1));
  const double c2 = std::cos(q(1));
  const double s23 = std::sin(q(1) + q(2));
  const double c23 = std::cos(q(1) + q(2));

  // Planar chain in the sagittal plane, then rolled about x by q1.
  const double r = -(geom.l_thigh * c2 + geom.l_calf * c23);

  Vec3 p;
  p.x() = -(geom.l_thigh * s2 + geom.l_calf * s23);
  p.y() = side_sign * geom.l_hip * c1 - r * s1;
  p.z() = side_sign * geom.l_hip * s1 + r * c1;
  return p;
}

Mat3 jacobian(const LegGeometry& geom, LegSide side, const Vec3& q) {
  if (!q.allFinite()) {
    throw InvalidInputError("joint angles must be finite");
  }
  const double side_sign = geom.side_sign(side);
  const double s1 = std::sin(q(0));
  const double c1 = std::cos(q(0));
  const double s2 = std::sin(q(1));
  const double c2 = std::cos(q(1));
  const double s23 = std::sin(q(1) + q(2));
  const double c23 = std::cos(q(1) + q(2));

  const double x = -(geom.l_thigh * s2 + geom.l_calf * s23);
  const double r = -(geom.l_thigh * c2 + geom.l_calf * c23);
  const double y = side_sign * geom.l_hip * c1 - r * s1;
  const double z = side_sign * geom.l_hip * s1 + r * c1;
  const double dx_dq3 = -geom.l_calf * c23;
  const double dr_dq3 = geom.l_calf * s23;

  Mat3 j;
  j(0, 0) = 0.0;
  j(0, 1) = r;
  j(0, 2) = dx_dq3;
  j(1, 0) = -z;
  j(1, 1) = s1 * x;  // -s1 * dr/dq2 with dr/dq2 = -x
  j(1, 2) = -s1 * dr_dq3;
  j(2, 0) = y;
  j(2, 1) = -c1 * x;
  j(2, 2) = c1 * dr_dq3;
  return j;
}

Vec3 cartesian_pd_torque(const LegGeometry& geom, LegSide side,
                         const JointState& state, const FootTarget& target,
                         const CartesianGains& gains) {
  const Mat3 j = jacobian(geom, side, state.q);
  const Vec3 p = forward_kinematics(geom, side, state.q);
  const Vec3 v = j * state.qd;

  const Vec3 force =
      gains.kp.cwiseProduct(target.p_d - p) - gains.kd.cwiseProduct(v);
  return j.transpose() * force - gains.kd_joint.cwiseProduct(state.qd);
}

WorkspaceBox reachable_box(const LegGeometry& geom, LegSide side, double shrink,
                           int samples_per_joint) {
  if (samples_per_joint < 2) {
    throw InvalidInputError("need at least two samples per joint");
  }
  geom.validate();

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  const int n = samples_per_joint;
  for (int i = 0; i < n; ++i) {
    for (int jx = 0; jx < n; ++jx) {
      for (int kx = 0; kx < n; ++kx) {
        Vec3 q;
        q(0) = geom.q_min(0) + (geom.q_max(0) - geom.q_min(0)) * i / (n - 1);
        q(1) = geom.q_min(1) + (geom.q_max(1) - geom.q_min(1)) * jx / (n - 1);
        q(2) = geom.q_min(2) + (geom.q_max(2) - geom.q_min(2)) * kx / (n - 1);
        const Vec3 p = forward_kinematics(geom, side, q);
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    }
  }

  const Vec3 center = 0.5 * (lo + hi);
  const Vec3 half = 0.5 * (hi - lo) * (1.0 - shrink);
  return WorkspaceBox{center - half, center + half};
}

Vec3 nominal_foot_center(const LegGeometry& geom) {
  const Vec3 left =
      geom.shoulder_left + forward_kinematics(geom, LegSide::left, geom.nominal_q);
  const Vec3 right =
      geom.shoulder_right + forward_kinematics(geom, LegSide::right, geom.nominal_q);
  return 0.5 * (left + right);
}

std::pair<FootTarget, FootTarget> foot_targets_from_plan(
    const CatchPlan& plan, GripPhase phase, const LegGeometry& geom,
    const WorkspaceBox& left_box, const WorkspaceBox& right_box, double y_opened,
    double y_closed) {
  const double y_off = (phase == GripPhase::closed) ? y_closed : y_opened;

  Vec3 left_robot = plan.x_catch;
  left_robot.y() += y_off;
  Vec3 right_robot = plan.x_catch;
  right_robot.y() -= y_off;

  FootTarget left{left_box.clip(left_robot - geom.shoulder_left), phase};
  FootTarget right{right_box.clip(right_robot - geom.shoulder_right), phase};
  return {left, right};
}

Vec3 joint_pd_tracking(const Vec3& q_d, const Vec3& qd_d, const Vec3& tau_ff,
                       const JointState& state, const Vec3& kp_joint,
                       const Vec3& kd_joint) {
  return kp_joint.cwiseProduct(q_d - state.q) +
         kd_joint.cwiseProduct(qd_d - state.qd) + tau_ff;
}

std::vector<TimedSample> interpolate_reference(const std::vector<TimedSample>& coarse,
                                               double coarse_dt, double fine_dt) {
  if (coarse.size() < 2) {
    throw InvalidReferenceError("reference needs at least two samples");
  }
  if (!(coarse_dt > 0.0) || !(fine_dt > 0.0) || fine_dt > coarse_dt) {
    throw InvalidReferenceError("invalid reference spacing");
  }
  const double ratio = coarse_dt / fine_dt;
  const int steps = static_cast<int>(std::llround(ratio));
  if (std::abs(ratio - steps) > 1e-9) {
    throw InvalidReferenceError("coarse spacing must be a multiple of the fine one");
  }
  const auto dim = coarse.front().value.size();
  for (std::size_t i = 1; i < coarse.size(); ++i) {
    if (std::abs((coarse[i].t - coarse[i - 1].t) - coarse_dt) > 1e-9) {
      throw InvalidReferenceError("reference samples are not uniformly spaced");
    }
    if (coarse[i].value.size() != dim) {
      throw InvalidReferenceError("reference samples have inconsistent dimension");
    }
  }

  std::vector<TimedSample> fine;
  fine.reserve((coarse.size() - 1) * steps + 1);
  for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
    for (int s = 0; s < steps; ++s) {
      const double alpha = static_cast<double>(s) / steps;
      TimedSample sample;
      sample.t = coarse[i].t + s * fine_dt;
      // Knots (alpha = 0) are reproduced exactly by this form.
      sample.value = coarse[i].value + alpha * (coarse[i + 1].value - coarse[i].value);
      fine.push_back(std::move(sample));
    }
  }
  fine.push_back(coarse.back());
  return fine;
}

}  // namespace quadcatch
