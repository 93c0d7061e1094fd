#pragma once

#include <Eigen/Core>
#include <optional>

#include "quadcatch/errors.hpp"

namespace quadcatch {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Pinhole model of the onboard depth camera. tilt > 0 pitches the optical
// axis below the horizontal. The camera sits at `offset` in the robot frame
// (zero by default).
struct CameraIntrinsics {
  double fx = 600.0;   // focal length, px
  double fy = 600.0;   // focal length, px
  double ppx = 640.0;  // principal point column, px
  double ppy = 360.0;  // principal point row, px
  double tilt = 0.0;   // rad, |tilt| < pi/2
  Vec3 offset = Vec3::Zero();

  void validate() const;  // throws InvalidInputError
};

// One detector output: bounding-box center in pixels plus the depth value
// sampled at it. depth is range along the camera optical axis, not the
// Euclidean distance to the object.
struct PixelDetection {
  double xp = 0.0;         // column of the bounding-box center, px
  double yp = 0.0;         // row of the bounding-box center, px
  double depth = 0.0;      // m, > 0
  double stamp = 0.0;      // s
  double confidence = 1.0; // [0, 1]
};

// A point in the robot frame: x forward, y lateral, z up.
struct RobotPoint {
  Vec3 p = Vec3::Zero();
  double stamp = 0.0;
};

// Back-projects a detection into the robot frame.
RobotPoint pixel_to_robot(const PixelDetection& det, const CameraIntrinsics& intr);

// Exact inverse of pixel_to_robot. Throws OutOfViewError if the point is
// behind the camera (recovered depth <= 0).
PixelDetection robot_to_pixel(const RobotPoint& pt, const CameraIntrinsics& intr);

// Same as robot_to_pixel but returns nullopt instead of throwing.
std::optional<PixelDetection> try_robot_to_pixel(const RobotPoint& pt,
                                                 const CameraIntrinsics& intr);

}  // namespace quadcatch
