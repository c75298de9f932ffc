#pragma once

#include "bcomp/camera.hpp"
#include "bcomp/common.hpp"

#include <vector>

namespace bcomp {

struct Frame;

struct Point {
  Vec3 position = Vec3::Zero();
  Rgb color;
};

struct PointCloud {
  std::vector<Point> points;
  FrameId frame_id = FrameId::Camera;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] bool empty() const noexcept { return points.empty(); }
};

/// Pinhole back-projection of every stride-th pixel with nonzero depth.
/// Colors come from the RGB image when it matches the depth resolution.
[[nodiscard]] PointCloud backproject(const Frame& frame, const CameraIntrinsics& intrinsics, int stride = 1);

/// Replaces the members of each occupied voxel (floor(p / voxel_size) per
/// axis) by their centroid and mean color. Output order follows the first
/// occurrence of each voxel in the input.
[[nodiscard]] PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

/// Keeps points with theta_min <= |p| <= theta_max, preserving order.
[[nodiscard]] PointCloud distance_filter(const PointCloud& cloud, double theta_min, double theta_max);

}  // namespace bcomp
