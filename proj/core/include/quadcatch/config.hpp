#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "quadcatch/experiments.hpp"

namespace quadcatch {

// Mixture construction parameters: either a recorded demonstration file, a
// pre-fitted mixture file, or (default) a synthetic demonstration set drawn
// around the nominal foot center.
struct GmmConfig {
  int k_min = 1;
  int k_max = 3;
  EmOptions em;
  int demo_count = 100;
  Vec3 demo_mean_offset{0.0, 0.0, -0.04};
  Vec3 demo_std{0.05, 0.04, 0.05};
  std::optional<std::filesystem::path> demo_file;
  std::optional<std::filesystem::path> mixture_file;
};

// The whole pipeline configuration. Every field has a working default; a
// config file overrides individual keys. Unknown keys are rejected.
struct FullConfig {
  CameraIntrinsics camera;
  NoiseModel noise;

  double perception_fps = 30.0;
  int pre_release_frames = 5;
  double delta_min = 0.05;
  int latency_ticks = 1;
  int min_obs_for_trigger = 5;

  double lambda = 1.0;
  double g = 9.81;

  CatchMethod method = CatchMethod::gmm;
  double x_offset = 0.25;
  double t_horizon = 3.0;

  GmmConfig gmm;
  LegGeometry legs;
  CartesianGains gains;
  double y_opened = 0.15;
  double y_closed = 0.01;
  double t_thresh = 0.15;

  double control_dt = 1e-3;
  Vec3 joint_inertia{0.012, 0.012, 0.012};
  double joint_damping = 0.02;
  double capture_radius = 0.04;
  double object_halfwidth = 0.05;
  double max_episode_time = 4.0;
  double settle_time = 0.10;
  bool record_trace = false;

  std::vector<Scenario> scenarios;

  // Fits (or loads) the demonstration mixture configured under `gmm`.
  GaussianMixture build_mixture() const;

  // Assembles the per-episode configuration, including the mixture.
  SimConfig make_sim_config() const;
};

// Defaults plus the built-in scenario catalog (centered-50, low-10, smoke-1).
FullConfig default_config();

// Parses a JSON config. An empty (or whitespace-only) file yields the
// defaults. Parse errors carry line/column diagnostics; unknown keys and
// out-of-range values raise ConfigError.
FullConfig load_config(const std::filesystem::path& path);
FullConfig parse_config(const std::string& text, const std::string& origin = "<string>");

// Mixture files: {"weights": [...], "means": [[...]], "covariances": [[[...]]]}
void save_mixture(const GaussianMixture& mixture, const std::filesystem::path& path);
GaussianMixture load_mixture(const std::filesystem::path& path);

}  // namespace quadcatch
