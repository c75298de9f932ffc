#include "bcomp/cloud.hpp"

#include "bcomp/frame_io.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace bcomp {

PointCloud backproject(const Frame& frame, const CameraIntrinsics& intrinsics, int stride) {
  if (stride < 1) throw ConfigError("backproject: stride must be >= 1");
  PointCloud cloud;
  cloud.frame_id = FrameId::Camera;
  const DepthImage& depth = frame.depth;
  const bool has_rgb = frame.rgb.same_shape(depth.width(), depth.height());
  const double inv_scale = 1.0 / intrinsics.depth_scale;
  const double inv_fx = 1.0 / intrinsics.fx;
  const double inv_fy = 1.0 / intrinsics.fy;
  cloud.points.reserve(depth.size() / static_cast<std::size_t>(stride * stride) + 1);
  for (int v = 0; v < depth.height(); v += stride) {
    for (int u = 0; u < depth.width(); u += stride) {
      const std::uint16_t raw = depth.at(u, v);
      if (raw == 0) continue;
      const double z = raw * inv_scale;
      Point p;
      p.position = Vec3((u - intrinsics.cx) * z * inv_fx, (v - intrinsics.cy) * z * inv_fy, z);
      if (has_rgb) p.color = frame.rgb.at(u, v);
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

struct VoxelAccumulator {
  Vec3 sum = Vec3::Zero();
  std::uint64_t r = 0, g = 0, b = 0;
  std::uint64_t count = 0;
};

std::uint8_t mean_channel(std::uint64_t sum, std::uint64_t count) {
  return static_cast<std::uint8_t>((sum + count / 2) / count);
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw ConfigError("voxel_downsample: voxel_size must be positive");
  PointCloud out;
  out.frame_id = cloud.frame_id;
  if (cloud.empty()) return out;

  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> index;
  index.reserve(cloud.size());
  std::vector<VoxelAccumulator> voxels;
  const double inv = 1.0 / voxel_size;
  for (const Point& p : cloud.points) {
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.position.x() * inv)),
                       static_cast<std::int64_t>(std::floor(p.position.y() * inv)),
                       static_cast<std::int64_t>(std::floor(p.position.z() * inv))};
    auto [it, inserted] = index.try_emplace(key, voxels.size());
    if (inserted) voxels.emplace_back();
    VoxelAccumulator& acc = voxels[it->second];
    acc.sum += p.position;
    acc.r += p.color.r;
    acc.g += p.color.g;
    acc.b += p.color.b;
    ++acc.count;
  }

  out.points.reserve(voxels.size());
  for (const VoxelAccumulator& acc : voxels) {
    Point p;
    p.position = acc.sum / static_cast<double>(acc.count);
    p.color = Rgb{mean_channel(acc.r, acc.count), mean_channel(acc.g, acc.count), mean_channel(acc.b, acc.count)};
    out.points.push_back(p);
  }
  return out;
}

PointCloud distance_filter(const PointCloud& cloud, double theta_min, double theta_max) {
  if (!(theta_min >= 0.0) || !(theta_min < theta_max))
    throw ConfigError("distance_filter: require 0 <= theta_min < theta_max");
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.points.reserve(cloud.size());
  for (const Point& p : cloud.points) {
    const double r = p.position.norm();
    if (r >= theta_min && r <= theta_max) out.points.push_back(p);
  }
  return out;
}

}  // namespace bcomp
