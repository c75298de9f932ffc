#include "bcomp/geometric_estimator.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace bcomp;
namespace t = bcomp::test;

namespace {

RansacConfig config_with(int min_inliers, std::uint64_t seed = 42) {
  RansacConfig c;
  c.min_inliers = min_inliers;
  c.random_seed = seed;
  return c;
}

PointCloud cloud_of(const std::vector<Vec3>& a, const std::vector<Vec3>& b = {}) {
  std::vector<Vec3> all = a;
  all.insert(all.end(), b.begin(), b.end());
  return t::make_cloud(all);
}

}  // namespace

TEST_CASE("exact points on z = 2 give a camera-facing normal") {
  std::mt19937_64 rng(1);
  const auto pts = t::sample_rect(rng, 100, Vec3(-1, -1, 2), Vec3(2, 0, 0), Vec3(0, 2, 0));
  const auto plane = fit_plane_ransac(t::make_cloud(pts), config_with(50));
  REQUIRE(plane.has_value());
  CHECK((plane->normal - Vec3(0, 0, -1)).norm() < 1e-6);
  CHECK(plane->d == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(plane->inliers.size() == 100);
  CHECK(plane->rms_residual < 1e-9);
  CHECK(plane->normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("under-determined and degenerate clouds give no plane") {
  CHECK_FALSE(fit_plane_ransac(t::make_cloud({Vec3(0, 0, 1), Vec3(1, 0, 1)}), config_with(1)).has_value());
  CHECK_FALSE(fit_plane_ransac(PointCloud{}, config_with(1)).has_value());
  std::vector<Vec3> line;
  for (int i = 0; i < 50; ++i) line.push_back(Vec3(i * 0.1, 2.0 * i * 0.1, 1.0));
  CHECK_FALSE(fit_plane_ransac(t::make_cloud(line), config_with(3)).has_value());
  CHECK(extract_planes(PointCloud{}, config_with(10)).empty());
}

TEST_CASE("support below min_inliers is rejected") {
  std::mt19937_64 rng(2);
  const auto pts = t::sample_rect(rng, 120, Vec3(-1, -1, 2), Vec3(2, 0, 0), Vec3(0, 2, 0));
  CHECK(fit_plane_ransac(t::make_cloud(pts), config_with(120)).has_value());
  CHECK_FALSE(fit_plane_ransac(t::make_cloud(pts), config_with(121)).has_value());
}

TEST_CASE("noisy plane is recovered within one degree and one centimeter") {
  std::mt19937_64 rng(3);
  const auto pts = t::sample_rect(rng, 500, Vec3(-1, -1, 2), Vec3(2, 0, 0), Vec3(0, 2, 0), 0.005);
  const auto plane = fit_plane_ransac(t::make_cloud(pts), config_with(200));
  REQUIRE(plane.has_value());
  CHECK(rad2deg(std::acos(std::abs(plane->normal.z()))) < 1.0);
  CHECK(std::abs(plane->d - 2.0) < 0.01);
}

TEST_CASE("two perpendicular planes are separated") {
  std::mt19937_64 rng(4);
  const auto floor = t::sample_rect(rng, 500, Vec3(-1, -1, 2), Vec3(2, 0, 0), Vec3(0, 2, 0));
  const auto side = t::sample_rect(rng, 500, Vec3(3, -1, 3), Vec3(0, 2, 0), Vec3(0, 0, 2));
  const auto planes = extract_planes(cloud_of(floor, side), config_with(200));
  REQUIRE(planes.size() == 2);
  CHECK(angle_deg(planes[0].normal, planes[1].normal) == doctest::Approx(90.0).epsilon(0.5 / 90.0));
  CHECK(planes[0].inliers.size() == 500);
  CHECK(planes[1].inliers.size() == 500);
}

TEST_CASE("planes come back in decreasing support order") {
  std::mt19937_64 rng(5);
  const auto small = t::sample_rect(rng, 300, Vec3(-1, -1, 2), Vec3(2, 0, 0), Vec3(0, 2, 0));
  const auto large = t::sample_rect(rng, 700, Vec3(3, -1, 3), Vec3(0, 2, 0), Vec3(0, 0, 2));
  const auto planes = extract_planes(cloud_of(small, large), config_with(100));
  REQUIRE(planes.size() == 2);
  CHECK(planes[0].inliers.size() == 700);
  CHECK(planes[1].inliers.size() == 300);
}

TEST_CASE("max_planes caps the extraction") {
  std::mt19937_64 rng(6);
  const auto a = t::sample_rect(rng, 300, Vec3(-1, -1, 2), Vec3(2, 0, 0), Vec3(0, 2, 0));
  const auto b = t::sample_rect(rng, 300, Vec3(3, -1, 3), Vec3(0, 2, 0), Vec3(0, 0, 2));
  RansacConfig c = config_with(100);
  c.max_planes = 1;
  CHECK(extract_planes(cloud_of(a, b), c).size() == 1);
}

TEST_CASE("box room with all six faces in view yields six planes") {
  // Two back-to-back wide-angle views from the room center cover every face.
  SyntheticScene scene = t::box_room_without_table();
  scene.intrinsics.fx = scene.intrinsics.fy = 120.0;
  const Vec3 center(2.0, 1.5, 1.3);
  scene.trajectory = {look_along(center, Vec3(1, 0, 0), Vec3::UnitZ()),
                      look_along(center, Vec3(-1, 0, 0), Vec3::UnitZ())};
  PointCloud cloud;
  for (std::size_t i = 0; i < 2; ++i) {
    const Frame f = render_scene(scene, i);
    for (Point p : backproject(f, scene.intrinsics, 4).points) {
      p.position = scene.trajectory[i].to_world(p.position) - center;
      cloud.points.push_back(p);
    }
  }
  const auto planes = extract_planes(cloud, config_with(200));
  REQUIRE(planes.size() == 6);
  std::set<int> matched;
  for (const Plane& p : planes) {
    // Shift each truth plane into the center-origin frame used by the cloud.
    for (const SyntheticPlane& gt : scene.planes) {
      const PlaneEquation shifted{gt.equation.normal, gt.equation.d + gt.equation.normal.dot(center)};
      const auto [angle, offset] = t::plane_error({p.normal, p.d}, shifted);
      if (rad2deg(angle) <= 1.0 && offset <= 0.02) matched.insert(gt.id);
    }
  }
  CHECK(matched.size() == 6);
}

TEST_CASE("extraction is deterministic for a fixed seed") {
  std::mt19937_64 rng(7);
  const auto a = t::sample_rect(rng, 400, Vec3(-1, -1, 2), Vec3(2, 0, 0), Vec3(0, 2, 0), 0.01);
  const auto b = t::sample_rect(rng, 400, Vec3(2, -1, 1), Vec3(0, 2, 0), Vec3(0, 0, 2), 0.01);
  const PointCloud c = cloud_of(a, b);
  const auto p1 = extract_planes(c, config_with(100, 99));
  const auto p2 = extract_planes(c, config_with(100, 99));
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].normal == p2[i].normal);
    CHECK(p1[i].d == p2[i].d);
    CHECK(p1[i].inliers == p2[i].inliers);
  }
}

TEST_CASE("inlier sets are exact, disjoint and respect the threshold") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> pts;
    for (int k = 0; k < 3; ++k) {
      const Vec3 n = t::random_unit(rng);
      const Vec3 u = n.unitOrthogonal();
      const Vec3 v = n.cross(u);
      const Vec3 o = 3.0 * t::random_unit(rng);
      const auto part = t::sample_rect(rng, 200 + 100 * k, o, 2.0 * u, 2.0 * v, 0.008);
      pts.insert(pts.end(), part.begin(), part.end());
    }
    std::uniform_real_distribution<double> clutter(-4.0, 4.0);
    for (int k = 0; k < 100; ++k) pts.push_back(Vec3(clutter(rng), clutter(rng), clutter(rng)));
    const PointCloud cloud = t::make_cloud(pts);
    RansacConfig c = config_with(60, static_cast<std::uint64_t>(trial));
    const auto planes = extract_planes(cloud, c);
    std::vector<bool> taken(cloud.size(), false);
    for (std::size_t k = 0; k < planes.size(); ++k) {
      const Plane& p = planes[k];
      CHECK(p.normal.norm() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(p.d > 0.0);
      CHECK(p.inliers.size() >= static_cast<std::size_t>(c.min_inliers));
      if (k > 0) CHECK(p.inliers.size() <= planes[k - 1].inliers.size());
      for (std::uint32_t i : p.inliers) {
        CHECK(std::abs(p.signed_distance(cloud.points[i].position)) <= c.epsilon_inlier);
        CHECK_FALSE(taken[i]);
        taken[i] = true;
      }
    }
  }
}

TEST_CASE("inliers of a single fit are exactly the points within the threshold") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec3 n = t::random_unit(rng);
    const Vec3 u = n.unitOrthogonal();
    auto pts = t::sample_rect(rng, 400, 2.0 * n, 2.0 * u, 2.0 * n.cross(u), 0.01);
    std::uniform_real_distribution<double> clutter(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) pts.push_back(Vec3(clutter(rng), clutter(rng), clutter(rng)));
    const PointCloud cloud = t::make_cloud(pts);
    const auto plane = fit_plane_ransac(cloud, config_with(100, static_cast<std::uint64_t>(trial)));
    REQUIRE(plane.has_value());
    std::vector<std::uint32_t> expected;
    for (std::uint32_t i = 0; i < cloud.size(); ++i)
      if (std::abs(plane->signed_distance(cloud.points[i].position)) <= 0.02) expected.push_back(i);
    CHECK(plane->inliers == expected);
    CHECK(plane->inliers.size() >= 360);
  }
}

TEST_CASE("refit equals the closed-form total least squares fit on exact data") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 n = t::random_unit(rng);
    const Vec3 u = n.unitOrthogonal();
    const Vec3 o = (1.0 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng)) * n;
    const auto pts = t::sample_rect(rng, 150, o - u - n.cross(u), 2.0 * u, 2.0 * n.cross(u));
    const auto plane = fit_plane_ransac(t::make_cloud(pts), config_with(100, static_cast<std::uint64_t>(trial)));
    REQUIRE(plane.has_value());
    const auto [angle, offset] = t::plane_error({plane->normal, plane->d}, t::svd_plane(pts));
    CHECK(angle < 1e-6);
    CHECK(offset < 1e-6);
  }
}

TEST_CASE("tls fit matches the SVD oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 n = t::random_unit(rng);
    const Vec3 u = n.unitOrthogonal();
    const auto pts = t::sample_rect(rng, 60, t::random_unit(rng), 1.5 * u, 0.7 * n.cross(u), 0.01);
    const auto eq = fit_plane_tls(pts);
    REQUIRE(eq.has_value());
    const auto [angle, offset] = t::plane_error(*eq, t::svd_plane(pts));
    CHECK(angle < 1e-9);
    CHECK(offset < 1e-9);
  }
  CHECK_FALSE(fit_plane_tls(std::vector<Vec3>{Vec3::Zero(), Vec3::UnitX()}).has_value());
}

TEST_CASE("minimum support scales with the cloud and is floored at 50") {
  CHECK(scaled_min_inliers(200, 30000) == 200);
  CHECK(scaled_min_inliers(200, 60000) == 400);
  CHECK(scaled_min_inliers(200, 3000) == 50);
  CHECK(scaled_min_inliers(200, 0) == 50);
}

TEST_CASE("invalid configuration is rejected") {
  RansacConfig c;
  c.epsilon_inlier = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RansacConfig{};
  c.max_iterations = 0;
  CHECK_THROWS_AS((void)fit_plane_ransac(t::make_cloud({Vec3::Zero()}), c), ConfigError);
}
