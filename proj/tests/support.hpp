// Independent reference implementations and fixtures shared by the tests.
#pragma once

#include "bcomp/cloud.hpp"
#include "bcomp/fusion.hpp"
#include "bcomp/plane.hpp"
#include "bcomp/semantic_validator.hpp"
#include "bcomp/synthetic.hpp"

#include <Eigen/SVD>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

namespace bcomp::test {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("bcomp_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const fs::path& path() const noexcept { return path_; }
  [[nodiscard]] fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Plane through the points by SVD of the centered coordinates.
inline PlaneEquation svd_plane(const std::vector<Vec3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = (pts[i] - c).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  const Vec3 n = svd.matrixV().col(2).normalized();
  return {n, -n.dot(c)};
}

/// Same plane up to orientation: |angle| in radians and offset difference
/// after aligning the signs.
inline std::pair<double, double> plane_error(const PlaneEquation& a, const PlaneEquation& b) {
  const double s = a.normal.dot(b.normal) >= 0.0 ? 1.0 : -1.0;
  const Vec3 na = a.normal.normalized();
  const Vec3 nb = b.normal.normalized();
  return {std::atan2(na.cross(nb).norm(), std::abs(na.dot(nb))), std::abs(a.d - s * b.d)};
}

inline std::size_t brute_voxel_count(const PointCloud& cloud, double vs) {
  std::set<std::tuple<long long, long long, long long>> keys;
  for (const Point& p : cloud.points)
    keys.emplace(static_cast<long long>(std::floor(p.position.x() / vs)),
                 static_cast<long long>(std::floor(p.position.y() / vs)),
                 static_cast<long long>(std::floor(p.position.z() / vs)));
  return keys.size();
}

inline PointCloud make_cloud(const std::vector<Vec3>& pts) {
  PointCloud c;
  for (const Vec3& p : pts) c.points.push_back({p, Rgb{}});
  return c;
}

inline std::vector<Vec3> positions(const PointCloud& cloud) {
  std::vector<Vec3> out;
  for (const Point& p : cloud.points) out.push_back(p.position);
  return out;
}

/// Points on the rectangle origin + s*a + t*b, s, t in [0, 1], with optional
/// Gaussian offsets along the normal.
inline std::vector<Vec3> sample_rect(std::mt19937_64& rng, std::size_t n, const Vec3& origin, const Vec3& a,
                                     const Vec3& b, double sigma = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const Vec3 normal = a.cross(b).normalized();
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p = origin + u(rng) * a + u(rng) * b;
    if (sigma > 0.0) p += sigma * g(rng) * normal;
    out.push_back(p);
  }
  return out;
}

/// Regular grid over a rectangle, `nu` x `nv` points.
inline std::vector<Vec3> grid_rect(const Vec3& origin, const Vec3& a, const Vec3& b, int nu, int nv) {
  std::vector<Vec3> out;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      out.push_back(origin + a * (nu > 1 ? i / double(nu - 1) : 0.5) + b * (nv > 1 ? j / double(nv - 1) : 0.5));
  return out;
}

/// Validated component whose inliers are exactly `pts` (camera frame).
inline ValidatedComponent component(SemanticClass cls, const std::vector<Vec3>& pts, double timestamp = 0.0) {
  ValidatedComponent c;
  const PlaneEquation eq = svd_plane(pts);
  c.plane.normal = eq.normal;
  c.plane.d = eq.d;
  if (c.plane.d < 0.0) {
    c.plane.normal = -c.plane.normal;
    c.plane.d = -c.plane.d;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    c.plane.inliers.push_back(static_cast<std::uint32_t>(i));
    c.points.push_back({pts[i], Rgb{200, 100, 50}});
  }
  c.cls = cls;
  c.match_score = 1.0;
  c.frame_timestamp = timestamp;
  return c;
}

/// Semantic plane with the given inlier points and class.
inline SemanticPlane semantic_plane(SemanticClass cls, const std::vector<Vec3>& pts) {
  SemanticPlane s;
  const PlaneEquation eq = svd_plane(pts);
  s.plane.normal = eq.normal;
  s.plane.d = eq.d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.plane.inliers.push_back(static_cast<std::uint32_t>(i));
    s.points.push_back({pts[i], Rgb{}});
  }
  s.cls = cls;
  return s;
}

inline Plane plane_from(const Vec3& normal, double d, std::size_t inliers = 0) {
  Plane p;
  p.normal = normal.normalized();
  p.d = d;
  for (std::size_t i = 0; i < inliers; ++i) p.inliers.push_back(static_cast<std::uint32_t>(i));
  return p;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v;
  do v = Vec3(g(rng), g(rng), g(rng));
  while (v.norm() < 1e-6);
  return v.normalized();
}

inline Pose random_pose(std::mt19937_64& rng, double translation = 3.0) {
  std::uniform_real_distribution<double> u(-translation, translation);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return Pose(q, Vec3(u(rng), u(rng), u(rng)));
}

/// Scene with only the building-component rectangles of the box room and
/// the ceiling (no table).
inline SyntheticScene box_room_without_table() {
  SyntheticScene s = box_room_scene();
  std::erase_if(s.planes, [](const SyntheticPlane& p) { return p.id == 6; });
  return s;
}

}  // namespace bcomp::test
