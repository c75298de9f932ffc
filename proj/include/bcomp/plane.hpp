#pragma once

#include "bcomp/cloud.hpp"
#include "bcomp/common.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace bcomp {

/// Plane n . p + d = 0 with a unit normal and its support in a source cloud.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double d = 0.0;
  std::vector<std::uint32_t> inliers;  // indices into the source cloud
  FrameId frame_id = FrameId::Camera;
  double rms_residual = 0.0;

  [[nodiscard]] double signed_distance(const Vec3& p) const noexcept { return normal.dot(p) + d; }
  [[nodiscard]] double distance(const Vec3& p) const noexcept;
};

struct PlaneEquation {
  Vec3 normal = Vec3::UnitZ();
  double d = 0.0;
};

/// Total-least-squares plane through the points: centroid plus the
/// eigenvector of the smallest covariance eigenvalue. nullopt for fewer than
/// three points. The returned orientation is not normalized.
[[nodiscard]] std::optional<PlaneEquation> fit_plane_tls(std::span<const Vec3> points);

/// Orthonormal in-plane axes (u, v) with u . n = v . n = 0 and u x v = n.
/// u is the projection of the coordinate axis least aligned with n, so the
/// basis is deterministic for a given normal.
struct PlaneBasis {
  Vec3 u;
  Vec3 v;
};
[[nodiscard]] PlaneBasis plane_basis(const Vec3& normal);

/// Axis-aligned box in plane coordinates.
struct Box2 {
  Vec2 min{0.0, 0.0};
  Vec2 max{0.0, 0.0};

  [[nodiscard]] double area() const noexcept { return (max - min).prod(); }
  [[nodiscard]] Box2 united(const Box2& other) const noexcept;
  /// Euclidean gap between the boxes, 0 when they touch or overlap.
  [[nodiscard]] double gap(const Box2& other) const noexcept;
};

/// Bounding box of points projected onto the plane with `basis` around `origin`.
[[nodiscard]] Box2 project_bounds(std::span<const Vec3> points, const Vec3& origin, const PlaneBasis& basis);

/// Area of the bounding rectangle of the points projected onto the plane with
/// the given normal (axes from plane_basis). Zero for empty input.
[[nodiscard]] double projected_extent_area(std::span<const Point> points, const Vec3& normal);

}  // namespace bcomp
