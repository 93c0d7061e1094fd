#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "quadcatch/selector.hpp"

namespace quadcatch {

enum class LegSide { left, right };

// 3-DOF front leg: hip abduction (roll) followed by a planar
// thigh/calf chain (hip and knee pitch). q = (abduction, hip, knee);
// q = 0 is the straight leg pointing down, positive knee folds the calf
// back. Lengths follow a small quadruped; all values are configurable.
struct LegGeometry {
  double l_hip = 0.08;    // abduction link offset, m
  double l_thigh = 0.213; // m
  double l_calf = 0.213;  // m
  Vec3 shoulder_left{0.0, 0.047, -0.10};   // leg base in the robot frame
  Vec3 shoulder_right{0.0, -0.047, -0.10};
  Vec3 q_min{-0.8, -2.4, 0.05};
  Vec3 q_max{0.8, 0.6, 2.6};
  Vec3 nominal_q{0.0, -1.8, 1.5};  // stance the feet hold while waiting

  const Vec3& shoulder(LegSide side) const {
    return side == LegSide::left ? shoulder_left : shoulder_right;
  }
  double side_sign(LegSide side) const {
    return side == LegSide::left ? 1.0 : -1.0;
  }
  void validate() const;
};

struct JointState {
  Vec3 q = Vec3::Zero();
  Vec3 qd = Vec3::Zero();
};

// Diagonal gain matrices of the Cartesian torque law.
struct CartesianGains {
  Vec3 kp{400.0, 400.0, 400.0};     // N/m
  Vec3 kd{8.0, 8.0, 8.0};           // N s/m
  Vec3 kd_joint{1.0, 1.0, 1.0};     // N m s/rad
};

enum class GripPhase { open, closed };

// Desired foot position in the leg (shoulder) frame.
struct FootTarget {
  Vec3 p_d = Vec3::Zero();
  GripPhase phase = GripPhase::open;
};

// Axis-aligned reachable-workspace box in the leg frame.
struct WorkspaceBox {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 clip(const Vec3& p) const { return p.cwiseMax(lo).cwiseMin(hi); }
  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= lo.array() - tol).all() &&
           (p.array() <= hi.array() + tol).all();
  }
};

// Foot position in the leg frame.
Vec3 forward_kinematics(const LegGeometry& geom, LegSide side, const Vec3& q);

// Analytic partial derivatives of forward_kinematics with respect to q.
Mat3 jacobian(const LegGeometry& geom, LegSide side, const Vec3& q);

// tau = J^T [Kp (p_d - p) - Kd v] - Kd_joint qd, with v = J qd and zero
// desired foot velocity.
Vec3 cartesian_pd_torque(const LegGeometry& geom, LegSide side,
                         const JointState& state, const FootTarget& target,
                         const CartesianGains& gains);

// Bounding box of foot positions over a joint-limit grid, shrunk by
// `shrink` about its center.
WorkspaceBox reachable_box(const LegGeometry& geom, LegSide side,
                           double shrink = 0.10, int samples_per_joint = 25);

// Robot-frame midpoint of the two feet at the nominal stance.
Vec3 nominal_foot_center(const LegGeometry& geom);

// Left/right leg-frame targets around the plan: lateral offset y_opened or
// y_closed depending on phase, clipped into each leg's workspace box.
std::pair<FootTarget, FootTarget> foot_targets_from_plan(
    const CatchPlan& plan, GripPhase phase, const LegGeometry& geom,
    const WorkspaceBox& left_box, const WorkspaceBox& right_box,
    double y_opened = 0.15, double y_closed = 0.01);

// Switches to the closed phase when the remaining time drops below the
// threshold, and stays closed for the rest of the episode.
class ClosingTrigger {
 public:
  explicit ClosingTrigger(double t_thresh = 0.15) : t_thresh_(t_thresh) {}

  GripPhase update(double t_remain) {
    if (t_remain < t_thresh_) {
      closed_ = true;
    }
    return phase();
  }
  GripPhase phase() const { return closed_ ? GripPhase::closed : GripPhase::open; }
  bool closed() const { return closed_; }
  double threshold() const { return t_thresh_; }

 private:
  double t_thresh_;
  bool closed_ = false;
};

// tau = Kp (q_d - q) + Kd (qd_d - qd) + tau_ff, diagonal joint-space gains.
Vec3 joint_pd_tracking(const Vec3& q_d, const Vec3& qd_d, const Vec3& tau_ff,
                       const JointState& state, const Vec3& kp_joint,
                       const Vec3& kd_joint);

// A reference sample on a uniform coarse grid.
struct TimedSample {
  double t = 0.0;
  Eigen::VectorXd value;
};

// Piecewise-linear resampling of a 10 ms reference onto a 1 ms grid (both
// spacings configurable). Knots are reproduced exactly; non-uniform input
// raises InvalidReferenceError.
std::vector<TimedSample> interpolate_reference(const std::vector<TimedSample>& coarse,
                                               double coarse_dt = 0.01,
                                               double fine_dt = 0.001);

}  // namespace quadcatch
