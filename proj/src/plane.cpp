#include "bcomp/plane.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bcomp {

double Plane::distance(const Vec3& p) const noexcept { return std::abs(signed_distance(p)); }

std::optional<PlaneEquation> fit_plane_tls(std::span<const Vec3> points) {
  if (points.size() < 3) return std::nullopt;
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 q = p - centroid;
    cov.noalias() += q * q.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  if (solver.info() != Eigen::Success) return std::nullopt;
  // Eigenvalues are sorted ascending.
  const Vec3 normal = solver.eigenvectors().col(0).normalized();
  if (!normal.allFinite()) return std::nullopt;
  return PlaneEquation{normal, -normal.dot(centroid)};
}

PlaneBasis plane_basis(const Vec3& normal) {
  const Vec3 n = normal.normalized();
  int axis = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double a = std::abs(n[i]);
    if (a < best - 1e-12) {
      best = a;
      axis = i;
    }
  }
  const Vec3 e = Vec3::Unit(axis);
  const Vec3 u = (e - e.dot(n) * n).normalized();
  return PlaneBasis{u, n.cross(u)};
}

Box2 Box2::united(const Box2& other) const noexcept {
  return Box2{min.cwiseMin(other.min), max.cwiseMax(other.max)};
}

double Box2::gap(const Box2& other) const noexcept {
  const double dx = std::max({0.0, other.min.x() - max.x(), min.x() - other.max.x()});
  const double dy = std::max({0.0, other.min.y() - max.y(), min.y() - other.max.y()});
  return std::hypot(dx, dy);
}

Box2 project_bounds(std::span<const Vec3> points, const Vec3& origin, const PlaneBasis& basis) {
  if (points.empty()) return Box2{};
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const Vec3& p : points) {
    const Vec3 q = p - origin;
    const Vec2 uv(q.dot(basis.u), q.dot(basis.v));
    lo = lo.cwiseMin(uv);
    hi = hi.cwiseMax(uv);
  }
  return Box2{lo, hi};
}

double projected_extent_area(std::span<const Point> points, const Vec3& normal) {
  if (points.empty()) return 0.0;
  const PlaneBasis basis = plane_basis(normal);
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const Point& p : points) {
    const Vec2 uv(p.position.dot(basis.u), p.position.dot(basis.v));
    lo = lo.cwiseMin(uv);
    hi = hi.cwiseMax(uv);
  }
  return (hi - lo).prod();
}

}  // namespace bcomp
