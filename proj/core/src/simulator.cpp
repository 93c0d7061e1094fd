#include "quadcatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace quadcatch {

namespace {

// splitmix64; used to derive stream seeds from episode seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

void validate(const SimConfig& config) {
  if (!(config.control_dt > 0.0)) {
    throw InvalidInputError("control_dt must be positive");
  }
  if (!(config.perception_fps > 0.0)) {
    throw InvalidInputError("perception_fps must be positive");
  }
  if ((config.joint_inertia.array() <= 0.0).any() || config.joint_damping < 0.0) {
    throw InvalidInputError("joint dynamics parameters out of range");
  }
  if (!(config.capture_radius > 0.0) || config.object_halfwidth < 0.0) {
    throw InvalidInputError("capture geometry out of range");
  }
  if (!(config.max_episode_time > 0.0)) {
    throw InvalidInputError("max_episode_time must be positive");
  }
  config.legs.validate();
  config.camera.validate();
  if (config.method == CatchMethod::gmm &&
      (!config.mixture || config.mixture->k() == 0)) {
    throw InvalidInputError("gmm method requires a mixture in the config");
  }
}

}  // namespace

EpisodeSim::EpisodeSim(const ThrowSpec& spec, const SimConfig& config,
                       std::uint64_t seed)
    : spec_(spec),
      config_(config),
      trigger_(config.t_thresh),
      result_() {
  validate(config_);

  left_box_ = reachable_box(config_.legs, LegSide::left);
  right_box_ = reachable_box(config_.legs, LegSide::right);
  ctx_.x_offset = config_.x_offset;
  ctx_.t_horizon = config_.t_horizon;
  ctx_.x_c = nominal_foot_center(config_.legs);
  ctx_.mixture = config_.mixture;

  // Pre-generate the detection stream; the throw-start filter removes the
  // held frames. Delivery below quantizes perception onto the control grid.
  NoiseModel noise = config_.noise;
  noise.seed = mix_seed(config_.noise.seed, seed);
  const ObservationStream raw =
      generate_observations(spec_, config_.camera, noise, config_.perception_fps,
                            config_.pre_release_frames, config_.max_episode_time);
  pending_ = throw_start_filter(raw, config_.camera, config_.delta_min).frames;

  left_.q = config_.legs.nominal_q;
  right_.q = config_.legs.nominal_q;

  t_ = spec_.t0 - config_.pre_release_frames / config_.perception_fps;
  t_end_ = t_ + config_.max_episode_time;
}

Vec3 EpisodeSim::object_position() const {
  if (t_ <= spec_.t0) {
    return spec_.p0;
  }
  return truth_position(spec_, t_).p;
}

Vec3 EpisodeSim::feet_midpoint() const {
  const Vec3 left =
      config_.legs.shoulder_left + forward_kinematics(config_.legs, LegSide::left, left_.q);
  const Vec3 right = config_.legs.shoulder_right +
                     forward_kinematics(config_.legs, LegSide::right, right_.q);
  return 0.5 * (left + right);
}

void EpisodeSim::deliver_observations() {
  const double latency = config_.latency_ticks * config_.control_dt;
  while (next_obs_ < pending_.size() &&
         pending_[next_obs_].stamp + latency <= t_) {
    const PixelDetection& det = pending_[next_obs_++];
    acc_.ingest(pixel_to_robot(det, config_.camera));
    if (acc_.count() < 3) {
      continue;
    }
    try {
      fit_ = fit_trajectory(acc_, config_.lambda, config_.g);
    } catch (const DegenerateDataError&) {
      continue;  // keep the previous fit until the data recovers
    }
    try {
      const double t_now = t_ - fit_->time_origin;
      plan_ = refresh(config_.method, *fit_, ctx_, t_now);
      result_.plan_history.push_back(*plan_);
    } catch (const PlanInfeasibleError&) {
      // Keep steering toward the previous plan, if any.
    }
  }
}

void EpisodeSim::evaluate_catch() {
  const Vec3 obj = object_position();
  const Vec3 left = config_.legs.shoulder_left +
                    forward_kinematics(config_.legs, LegSide::left, left_.q);
  const Vec3 right = config_.legs.shoulder_right +
                     forward_kinematics(config_.legs, LegSide::right, right_.q);
  const Vec3 mid = 0.5 * (left + right);

  const double error = (obj - mid).norm();
  const double lateral_tol = 2.0 * config_.y_closed + config_.object_halfwidth;
  const bool lateral_ok = std::abs(left.y() - obj.y()) <= lateral_tol &&
                          std::abs(right.y() - obj.y()) <= lateral_tol;

  result_.caught = error <= config_.capture_radius && lateral_ok;
  result_.catch_error = error;
  result_.eval_time = t_;
  evaluated_ = true;
}

void EpisodeSim::step() {
  if (done_) {
    return;
  }

  // Once the catch has been evaluated the legs hold their pose; further
  // detections of the departing object must not drag the feet along.
  if (!evaluated_) {
    deliver_observations();
  }

  // Closing decision from the freshest plan.
  if (plan_ && fit_ && acc_.count() >= config_.min_obs_for_trigger) {
    const double arrival = fit_->time_origin + plan_->t_catch;
    const bool was_closed = trigger_.closed();
    trigger_.update(arrival - t_);
    if (!was_closed && trigger_.closed()) {
      result_.triggered = true;
      result_.trigger_plan = plan_;
    }
  }

  // Foot targets from the active plan (nominal stance before the first one).
  FootTarget left_target{forward_kinematics(config_.legs, LegSide::left,
                                            config_.legs.nominal_q),
                         GripPhase::open};
  FootTarget right_target{forward_kinematics(config_.legs, LegSide::right,
                                             config_.legs.nominal_q),
                          GripPhase::open};
  if (plan_) {
    std::tie(left_target, right_target) =
        foot_targets_from_plan(*plan_, trigger_.phase(), config_.legs, left_box_,
                               right_box_, config_.y_opened, config_.y_closed);
  }

  tau_left_ = cartesian_pd_torque(config_.legs, LegSide::left, left_, left_target,
                                  config_.gains);
  tau_right_ = cartesian_pd_torque(config_.legs, LegSide::right, right_,
                                   right_target, config_.gains);

  // Semi-implicit Euler on the decoupled joint dynamics; joints stop dead at
  // their limits.
  const double dt = config_.control_dt;
  bool diverged = false;
  auto integrate = [&](JointState& state, const Vec3& tau) {
    for (int i = 0; i < 3; ++i) {
      const double qdd =
          (tau(i) - config_.joint_damping * state.qd(i)) / config_.joint_inertia(i);
      state.qd(i) += dt * qdd;
      state.q(i) += dt * state.qd(i);
      if (std::abs(state.qd(i)) > 1e3) {
        diverged = true;
      }
      if (state.q(i) < config_.legs.q_min(i)) {
        state.q(i) = config_.legs.q_min(i);
        state.qd(i) = 0.0;
      } else if (state.q(i) > config_.legs.q_max(i)) {
        state.q(i) = config_.legs.q_max(i);
        state.qd(i) = 0.0;
      }
    }
  };
  integrate(left_, tau_left_);
  integrate(right_, tau_right_);

  if (diverged) {
    done_ = true;
    result_.diverged = true;
    throw DivergedEpisodeError("joint velocities exceeded 1e3 rad/s");
  }

  power_sum_ += tau_left_.cwiseProduct(left_.qd).cwiseAbs().sum() +
                tau_right_.cwiseProduct(right_.qd).cwiseAbs().sum();
  ++power_ticks_;

  t_ += dt;
  ++tick_;

  min_distance_seen_ =
      std::min(min_distance_seen_, (object_position() - feet_midpoint()).norm());

  if (config_.record_trace) {
    TraceSample sample;
    sample.t = t_;
    sample.left = left_;
    sample.right = right_;
    sample.tau_left = tau_left_;
    sample.tau_right = tau_right_;
    sample.object = object_position();
    sample.triggered = trigger_.closed();
    if (plan_) {
      sample.plan = *plan_;
    }
    result_.trace.push_back(std::move(sample));
  }

  // Success check at the predicted arrival of the active plan.
  if (trigger_.closed() && plan_ && fit_ && !evaluated_) {
    const double arrival = fit_->time_origin + plan_->t_catch;
    if (t_ >= arrival) {
      evaluate_catch();
    }
  }

  if (evaluated_ && t_ >= *result_.eval_time + config_.settle_time) {
    done_ = true;
  }
  if (!trigger_.closed() && t_ > spec_.t0 && object_position().x() < -0.2) {
    done_ = true;  // the object passed the robot without a close
  }
  if (t_ >= t_end_) {
    done_ = true;
  }
}

EpisodeResult EpisodeSim::finish() {
  EpisodeResult result = result_;
  if (!evaluated_) {
    result.caught = false;
    result.catch_error = std::isfinite(min_distance_seen_) ? min_distance_seen_ : 0.0;
  }
  result.mean_power = power_ticks_ > 0 ? power_sum_ / power_ticks_ : 0.0;
  result.observations_used = acc_.count();
  return result;
}

EpisodeResult run_episode(const ThrowSpec& spec, const SimConfig& config,
                          std::uint64_t seed) {
  EpisodeSim sim(spec, config, seed);
  while (!sim.done()) {
    sim.step();
  }
  return sim.finish();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix_seed(base, index);
}

double mean_total_power(const std::vector<TraceSample>& trace) {
  if (trace.empty()) {
    throw InvalidInputError("power needs a non-empty trace");
  }
  double sum = 0.0;
  for (const auto& s : trace) {
    sum += s.tau_left.cwiseProduct(s.left.qd).cwiseAbs().sum() +
           s.tau_right.cwiseProduct(s.right.qd).cwiseAbs().sum();
  }
  return sum / static_cast<double>(trace.size());
}

}  // namespace quadcatch
