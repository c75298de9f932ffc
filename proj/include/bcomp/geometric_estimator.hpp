#pragma once

#include "bcomp/cloud.hpp"
#include "bcomp/plane.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace bcomp {

struct RansacConfig {
  int max_iterations = 500;
  double epsilon_inlier = 0.02;  // meters
  int min_inliers = 200;
  int max_planes = 8;
  std::uint64_t random_seed = 42;

  void validate() const;
};

/// min_inliers scaled to the size of the preprocessed cloud:
/// max(base * n / 30000, 50).
[[nodiscard]] int scaled_min_inliers(int base, std::size_t cloud_size) noexcept;

/// Single-plane RANSAC over 3-point hypotheses followed by a total least
/// squares refit of the consensus set. The returned normal faces the origin
/// (d > 0). nullopt when the cloud is degenerate or support < min_inliers.
[[nodiscard]] std::optional<Plane> fit_plane_ransac(const PointCloud& cloud, const RansacConfig& config);

/// Greedy multi-plane extraction: fit, remove the inliers, repeat. Inlier
/// indices refer to `cloud`. Planes are ordered by decreasing support.
[[nodiscard]] std::vector<Plane> extract_planes(const PointCloud& cloud, const RansacConfig& config);

}  // namespace bcomp
