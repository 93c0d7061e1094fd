#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "quadcatch/frames.hpp"

namespace quadcatch {

// Ground-truth free-fall parameters of one throw.
struct ThrowSpec {
  Vec3 p0 = Vec3::Zero();  // release position, m
  Vec3 v0 = Vec3::Zero();  // release velocity, m/s
  double g = 9.81;         // gravitational acceleration magnitude, m/s^2
  double t0 = 0.0;         // release time, s
};

// Synthetic detector noise. Sigmas of zero give a perfect detector.
struct NoiseModel {
  double sigma_px = 1.0;     // pixel noise on xp and yp, px
  double sigma_depth = 0.01; // depth noise, m
  double drop_prob = 0.02;   // per-frame miss probability, [0, 1]
  std::uint64_t seed = 0;
};

// Time-ordered detections at a nominal camera frame rate.
struct ObservationStream {
  std::vector<PixelDetection> frames;
  double fps = 30.0;
};

// Free-fall position at time t. Throws BeforeReleaseError for t < t0.
RobotPoint truth_position(const ThrowSpec& spec, double t);

// Samples the throw at 1/fps, prepending `pre_release_frames` detections of
// the object held at p0. Flight frames are projected through the camera,
// perturbed with pixel/depth noise and dropped with drop_prob; held frames
// get the same noise but are never dropped. Frames behind the camera (or
// whose noisy depth is non-positive) are omitted. Sampling stops
// max_flight_time seconds after release.
ObservationStream generate_observations(const ThrowSpec& spec,
                                        const CameraIntrinsics& intr,
                                        const NoiseModel& noise, double fps,
                                        int pre_release_frames,
                                        double max_flight_time = 3.0);

// Returns the suffix of the stream starting at the first detection whose
// back-projected position differs from the previous one by more than
// delta_min in any coordinate. Streams with fewer than two detections, or
// streams that never move, yield an empty stream.
ObservationStream throw_start_filter(const ObservationStream& stream,
                                     const CameraIntrinsics& intr,
                                     double delta_min);

// Line-oriented log: "stamp xp yp depth" per detection, '#' comments.
void save_observation_log(const ObservationStream& stream, std::ostream& out);
void save_observation_log(const ObservationStream& stream,
                          const std::filesystem::path& path);
ObservationStream load_observation_log(std::istream& in);
ObservationStream load_observation_log(const std::filesystem::path& path);

}  // namespace quadcatch
