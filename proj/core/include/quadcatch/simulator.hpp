#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quadcatch/ballistics.hpp"
#include "quadcatch/leg_control.hpp"
#include "quadcatch/predictor.hpp"
#include "quadcatch/selector.hpp"

namespace quadcatch {

// Everything one episode needs: rates, per-joint dynamics, the perception
// chain parameters and the catching controller configuration.
struct SimConfig {
  // Loop rates. The perception period is rounded to an integer number of
  // control ticks.
  double control_dt = 1e-3;      // s
  double perception_fps = 30.0;  // Hz

  // Decoupled second-order joint dynamics.
  Vec3 joint_inertia{0.012, 0.012, 0.012};  // kg m^2
  double joint_damping = 0.02;           // N m s/rad

  // Success geometry.
  double capture_radius = 0.04;    // m, see docs/config notes
  double object_halfwidth = 0.05;  // m

  // Episode horizon.
  double max_episode_time = 4.0;  // s
  double settle_time = 0.10;      // s of extra integration after evaluation

  // Perception chain.
  CameraIntrinsics camera;
  NoiseModel noise;
  int pre_release_frames = 5;
  double delta_min = 0.05;      // throw-start threshold, m
  int latency_ticks = 1;        // detection availability delay, control ticks
  int min_obs_for_trigger = 5;  // plans arm the trigger only after this many

  // Prediction.
  double lambda = 1.0;
  double g = 9.81;

  // Selection.
  CatchMethod method = CatchMethod::gmm;
  double x_offset = 0.25;  // m
  double t_horizon = 3.0;  // s
  std::optional<GaussianMixture> mixture;

  // Legs and catching control.
  LegGeometry legs;
  CartesianGains gains;
  double y_opened = 0.15;  // m
  double y_closed = 0.01;  // m
  double t_thresh = 0.15;  // s

  bool record_trace = false;
};

struct TraceSample {
  double t = 0.0;
  JointState left;
  JointState right;
  Vec3 tau_left = Vec3::Zero();
  Vec3 tau_right = Vec3::Zero();
  Vec3 object = Vec3::Zero();
  bool triggered = false;
  std::optional<CatchPlan> plan;
};

struct EpisodeResult {
  bool caught = false;
  double catch_error = 0.0;  // m, object to feet midpoint at close completion
  double mean_power = 0.0;   // W, mean over control ticks of sum |tau qd|
  std::vector<CatchPlan> plan_history;
  std::vector<TraceSample> trace;  // populated when record_trace is set

  bool triggered = false;
  std::optional<CatchPlan> trigger_plan;  // plan active when the legs closed
  std::optional<double> eval_time;        // wall clock of the success check
  bool diverged = false;
  int observations_used = 0;
};

// One closed-loop episode: analytic projectile flight, synthetic detections
// at camera rate, per-frame fit/plan refresh, and a 1 kHz Cartesian PD loop
// on both front legs. Deterministic given the seed.
class EpisodeSim {
 public:
  EpisodeSim(const ThrowSpec& spec, const SimConfig& config, std::uint64_t seed);

  // Advances one control tick. Throws DivergedEpisodeError if joint
  // velocities blow up.
  void step();

  bool done() const { return done_; }
  double time() const { return t_; }
  const JointState& left() const { return left_; }
  const JointState& right() const { return right_; }
  Vec3 object_position() const;
  Vec3 feet_midpoint() const;

  EpisodeResult finish();

 private:
  void deliver_observations();
  void evaluate_catch();

  ThrowSpec spec_;
  SimConfig config_;
  WorkspaceBox left_box_;
  WorkspaceBox right_box_;
  SelectorContext ctx_;

  std::vector<PixelDetection> pending_;  // filtered detections, oldest first
  std::size_t next_obs_ = 0;

  RegressionAccumulators acc_;
  std::optional<TrajectoryFit> fit_;
  std::optional<CatchPlan> plan_;
  ClosingTrigger trigger_;

  JointState left_;
  JointState right_;
  Vec3 tau_left_ = Vec3::Zero();
  Vec3 tau_right_ = Vec3::Zero();

  double t_ = 0.0;
  double t_end_ = 0.0;
  long tick_ = 0;
  bool done_ = false;
  bool evaluated_ = false;
  double power_sum_ = 0.0;
  long power_ticks_ = 0;
  double min_distance_seen_ = std::numeric_limits<double>::infinity();

  EpisodeResult result_;
};

EpisodeResult run_episode(const ThrowSpec& spec, const SimConfig& config,
                          std::uint64_t seed);

// Mean over trace samples of the summed |tau_j qd_j| across both legs.
double mean_total_power(const std::vector<TraceSample>& trace);

// splitmix64-style derivation of per-episode seeds from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace quadcatch
