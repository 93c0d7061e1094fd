#include "quadcatch/ballistics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace quadcatch {

RobotPoint truth_position(const ThrowSpec& spec, double t) {
  if (!(spec.g > 0.0)) {
    throw InvalidInputError("gravity must be positive");
  }
  if (t < spec.t0) {
    throw BeforeReleaseError("queried time precedes the release of the throw");
  }
  const double dt = t - spec.t0;
  RobotPoint out;
  out.p.x() = spec.p0.x() + spec.v0.x() * dt;
  out.p.y() = spec.p0.y() + spec.v0.y() * dt;
  out.p.z() = spec.p0.z() + spec.v0.z() * dt - 0.5 * spec.g * dt * dt;
  out.stamp = t;
  return out;
}

ObservationStream generate_observations(const ThrowSpec& spec,
                                        const CameraIntrinsics& intr,
                                        const NoiseModel& noise, double fps,
                                        int pre_release_frames,
                                        double max_flight_time) {
  if (!(fps > 0.0)) {
    throw InvalidInputError("fps must be positive");
  }
  if (noise.sigma_px < 0.0 || noise.sigma_depth < 0.0 ||
      noise.drop_prob < 0.0 || noise.drop_prob > 1.0) {
    throw InvalidInputError("noise model out of range");
  }
  if (pre_release_frames < 0) {
    throw InvalidInputError("pre_release_frames must be non-negative");
  }

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const double dt = 1.0 / fps;
  const int flight_frames = static_cast<int>(std::ceil(max_flight_time * fps));

  ObservationStream stream;
  stream.fps = fps;
  stream.frames.reserve(pre_release_frames + flight_frames + 1);

  for (int k = 0; k < pre_release_frames + flight_frames + 1; ++k) {
    const double t = spec.t0 + (k - pre_release_frames) * dt;
    const bool in_flight = k >= pre_release_frames;

    RobotPoint truth;
    if (in_flight) {
      truth = truth_position(spec, t);
    } else {
      truth.p = spec.p0;  // still in the thrower's hands
      truth.stamp = t;
    }

    auto det = try_robot_to_pixel(truth, intr);
    if (!det) {
      continue;
    }
    if (noise.sigma_px > 0.0) {
      det->xp += noise.sigma_px * gauss(rng);
      det->yp += noise.sigma_px * gauss(rng);
    }
    if (noise.sigma_depth > 0.0) {
      det->depth += noise.sigma_depth * gauss(rng);
    }
    if (!(det->depth > 0.0)) {
      continue;
    }
    if (in_flight && noise.drop_prob > 0.0 && uniform(rng) < noise.drop_prob) {
      continue;
    }
    stream.frames.push_back(*det);
  }
  return stream;
}

ObservationStream throw_start_filter(const ObservationStream& stream,
                                     const CameraIntrinsics& intr,
                                     double delta_min) {
  if (!(delta_min > 0.0)) {
    throw InvalidInputError("delta_min must be positive");
  }

  ObservationStream out;
  out.fps = stream.fps;
  if (stream.frames.size() < 2) {
    return out;
  }

  Vec3 prev = pixel_to_robot(stream.frames.front(), intr).p;
  for (std::size_t i = 1; i < stream.frames.size(); ++i) {
    const Vec3 cur = pixel_to_robot(stream.frames[i], intr).p;
    const Vec3 diff = (cur - prev).cwiseAbs();
    if (diff.maxCoeff() > delta_min) {
      out.frames.assign(stream.frames.begin() + static_cast<long>(i),
                        stream.frames.end());
      return out;
    }
    prev = cur;
  }
  return out;
}

void save_observation_log(const ObservationStream& stream, std::ostream& out) {
  out << "# quadcatch observation log: stamp xp yp depth\n";
  out.precision(17);
  for (const auto& det : stream.frames) {
    out << det.stamp << ' ' << det.xp << ' ' << det.yp << ' ' << det.depth
        << '\n';
  }
}

void save_observation_log(const ObservationStream& stream,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidInputError("cannot open observation log for writing: " +
                            path.string());
  }
  save_observation_log(stream, out);
}

ObservationStream load_observation_log(std::istream& in) {
  ObservationStream stream;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream row(line);
    PixelDetection det;
    if (!(row >> det.stamp >> det.xp >> det.yp >> det.depth)) {
      throw InvalidInputError("malformed observation log line: " + line);
    }
    stream.frames.push_back(det);
  }

  // Nominal rate from the median stamp spacing, for metadata only.
  if (stream.frames.size() >= 2) {
    std::vector<double> gaps;
    gaps.reserve(stream.frames.size() - 1);
    for (std::size_t i = 1; i < stream.frames.size(); ++i) {
      gaps.push_back(stream.frames[i].stamp - stream.frames[i - 1].stamp);
    }
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<long>(gaps.size() / 2),
                     gaps.end());
    const double median = gaps[gaps.size() / 2];
    if (median > 0.0) {
      stream.fps = 1.0 / median;
    }
  }
  return stream;
}

ObservationStream load_observation_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInputError("cannot open observation log: " + path.string());
  }
  return load_observation_log(in);
}

}  // namespace quadcatch
