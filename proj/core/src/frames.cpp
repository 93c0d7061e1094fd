#include "quadcatch/frames.hpp"

#include <cmath>

namespace quadcatch {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidInputError("camera focal lengths must be positive");
  }
  if (!std::isfinite(ppx) || !std::isfinite(ppy) || !std::isfinite(tilt) ||
      !offset.allFinite()) {
    throw InvalidInputError("camera intrinsics must be finite");
  }
  if (!(std::abs(tilt) < M_PI / 2.0)) {
    throw InvalidInputError("camera tilt must satisfy |tilt| < pi/2");
  }
}

RobotPoint pixel_to_robot(const PixelDetection& det, const CameraIntrinsics& intr) {
  intr.validate();
  if (!std::isfinite(det.xp) || !std::isfinite(det.yp) ||
      !std::isfinite(det.depth) || !std::isfinite(det.stamp)) {
    throw InvalidInputError("detection fields must be finite");
  }
  if (!(det.depth > 0.0)) {
    throw InvalidInputError("detection depth must be positive");
  }

  const double ct = std::cos(intr.tilt);
  const double st = std::sin(intr.tilt);
  const double row = (det.yp - intr.ppy) / intr.fy;
  const double col = (det.xp - intr.ppx) / intr.fx;

  RobotPoint out;
  out.p.x() = det.depth * ct - det.depth * row * st;
  out.p.y() = det.depth * col;
  out.p.z() = -(det.depth * st + det.depth * row * ct);
  out.p += intr.offset;
  out.stamp = det.stamp;
  return out;
}

std::optional<PixelDetection> try_robot_to_pixel(const RobotPoint& pt,
                                                 const CameraIntrinsics& intr) {
  intr.validate();
  if (!pt.p.allFinite() || !std::isfinite(pt.stamp)) {
    throw InvalidInputError("robot point must be finite");
  }

  const Vec3 p = pt.p - intr.offset;
  const double ct = std::cos(intr.tilt);
  const double st = std::sin(intr.tilt);

  // The x and z formulas are a rotation of (depth, depth * row); invert it,
  // then recover the column offset from the y formula.
  const double depth = p.x() * ct - p.z() * st;
  if (!(depth > 0.0)) {
    return std::nullopt;
  }
  const double row = (-p.x() * st - p.z() * ct) / depth;

  PixelDetection det;
  det.depth = depth;
  det.xp = intr.ppx + (p.y() / depth) * intr.fx;
  det.yp = intr.ppy + row * intr.fy;
  det.stamp = pt.stamp;
  det.confidence = 1.0;
  return det;
}

PixelDetection robot_to_pixel(const RobotPoint& pt, const CameraIntrinsics& intr) {
  auto det = try_robot_to_pixel(pt, intr);
  if (!det) {
    throw OutOfViewError("point lies behind the camera");
  }
  return *det;
}

}  // namespace quadcatch
