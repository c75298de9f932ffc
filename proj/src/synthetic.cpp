#include "bcomp/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace bcomp {

SyntheticPlane SyntheticPlane::from_corners(int id, SemanticClass cls, const std::array<Vec3, 4>& corners) {
  const Vec3 e1 = corners[1] - corners[0];
  const Vec3 e2 = corners[3] - corners[0];
  const double l1 = e1.norm();
  const double l2 = e2.norm();
  if (l1 < 1e-9 || l2 < 1e-9) throw ConfigError("synthetic plane " + std::to_string(id) + ": degenerate rectangle");
  if (std::abs(e1.dot(e2)) > 1e-6 * l1 * l2)
    throw ConfigError("synthetic plane " + std::to_string(id) + ": corners do not form a rectangle");
  if ((corners[0] + e1 + e2 - corners[2]).norm() > 1e-6 * std::max(l1, l2))
    throw ConfigError("synthetic plane " + std::to_string(id) + ": fourth corner off the rectangle");
  SyntheticPlane p;
  p.id = id;
  p.cls = cls;
  p.corners = corners;
  p.equation.normal = e1.cross(e2).normalized();
  p.equation.d = -p.equation.normal.dot(corners[0]);
  return p;
}

std::optional<double> SyntheticPlane::intersect(const Vec3& origin, const Vec3& direction) const {
  const double denom = equation.normal.dot(direction);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double s = -(equation.normal.dot(origin) + equation.d) / denom;
  if (!(s > 0.0)) return std::nullopt;
  const Vec3 q = origin + s * direction - corners[0];
  const Vec3 e1 = corners[1] - corners[0];
  const Vec3 e2 = corners[3] - corners[0];
  const double a = q.dot(e1) / e1.squaredNorm();
  const double b = q.dot(e2) / e2.squaredNorm();
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) return std::nullopt;
  return s;
}

double SyntheticPlane::area() const {
  return (corners[1] - corners[0]).norm() * (corners[3] - corners[0]).norm();
}

void SyntheticScene::validate() const {
  intrinsics.validate();
  if (noise.depth_sigma < 0.0) throw ConfigError("scene: negative depth sigma");
  if (noise.label_corruption < 0.0 || noise.label_corruption > 1.0)
    throw ConfigError("scene: label corruption must be in [0, 1]");
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(noise.lambda_clean_max) || !in_unit(noise.lambda_corrupt_min) || !in_unit(noise.lambda_corrupt_max) ||
      noise.lambda_corrupt_min > noise.lambda_corrupt_max)
    throw ConfigError("scene: lambda bounds must lie in [0, 1]");
}

std::vector<SyntheticPlane> SyntheticScene::building_components() const {
  std::vector<SyntheticPlane> out;
  for (const SyntheticPlane& p : planes)
    if (is_building_component(p.cls)) out.push_back(p);
  return out;
}

namespace {

Rgb plane_color(const SyntheticPlane& plane, const Vec3& hit) {
  static constexpr Rgb kBase[] = {{196, 188, 170}, {150, 120, 90}, {220, 220, 215}, {120, 140, 170},
                                  {180, 160, 140}, {100, 110, 100}, {200, 180, 150}, {160, 170, 180}};
  const Rgb base = kBase[static_cast<std::size_t>(plane.id < 0 ? -plane.id : plane.id) % std::size(kBase)];
  // 0.25 m checker so the RGB stream carries texture.
  const Vec3 q = hit - plane.corners[0];
  const Vec3 e1 = (plane.corners[1] - plane.corners[0]).normalized();
  const Vec3 e2 = (plane.corners[3] - plane.corners[0]).normalized();
  const auto cell = static_cast<long>(std::floor(q.dot(e1) / 0.25)) + static_cast<long>(std::floor(q.dot(e2) / 0.25));
  const int shade = (cell & 1L) ? -18 : 0;
  const auto ch = [shade](std::uint8_t c) { return static_cast<std::uint8_t>(std::clamp(int{c} + shade, 0, 255)); };
  return Rgb{ch(base.r), ch(base.g), ch(base.b)};
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t frame_index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(frame_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Frame render_scene(const SyntheticScene& scene, std::size_t frame_index) {
  if (frame_index >= scene.trajectory.size()) throw ConfigError("render_scene: frame index outside trajectory");
  const CameraIntrinsics& k = scene.intrinsics;
  const Pose& pose = scene.trajectory[frame_index];
  const ClassIdTable ids = ClassIdTable::defaults();
  const std::array<std::uint16_t, 3> class_ids{*ids.id_for(SemanticClass::Wall), *ids.id_for(SemanticClass::Ground),
                                               *ids.id_for(SemanticClass::Other)};

  Frame f;
  f.timestamp = pose.timestamp();
  f.pose = pose;
  f.depth = DepthImage(k.width, k.height, 0);
  f.rgb = RgbImage(k.width, k.height, Rgb{0, 0, 0});
  f.labels = LabelImage(k.width, k.height, 0);
  const bool with_confidence = scene.noise.writes_confidence();
  if (with_confidence) f.confidence = ConfidenceImage(k.width, k.height, 0);

  std::mt19937_64 rng(frame_seed(scene.noise.seed, frame_index));
  std::normal_distribution<double> depth_noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const SceneNoise& noise = scene.noise;
  const Mat3 r = pose.rotation_matrix();
  const Vec3 origin = pose.translation();

  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Vec3 dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      const Vec3 dir = r * dir_cam;
      double nearest = std::numeric_limits<double>::infinity();
      const SyntheticPlane* hit = nullptr;
      for (const SyntheticPlane& plane : scene.planes) {
        const auto s = plane.intersect(origin, dir);
        if (s && *s < nearest) {
          nearest = *s;
          hit = &plane;
        }
      }
      if (hit == nullptr) continue;

      // dir_cam has unit z, so the ray parameter is the camera-frame depth.
      double z = nearest;
      if (noise.depth_sigma > 0.0) z += noise.depth_sigma * depth_noise(rng);
      const double raw = std::round(z * k.depth_scale);
      f.depth.at(u, v) = (raw >= 1.0 && raw <= 65535.0) ? static_cast<std::uint16_t>(raw) : 0;
      f.rgb.at(u, v) = plane_color(*hit, origin + nearest * dir);

      auto cls_index = static_cast<std::size_t>(hit->cls);
      bool corrupted = false;
      if (noise.label_corruption > 0.0 && unit(rng) < noise.label_corruption) {
        const std::size_t shift = unit(rng) < 0.5 ? 1 : 2;
        cls_index = (cls_index + shift) % 3;
        corrupted = true;
      }
      f.labels->at(u, v) = class_ids[cls_index];
      if (with_confidence) {
        const double lambda = corrupted
                                  ? noise.lambda_corrupt_min +
                                        (noise.lambda_corrupt_max - noise.lambda_corrupt_min) * unit(rng)
                                  : noise.lambda_clean_max * unit(rng);
        f.confidence->at(u, v) = static_cast<std::uint8_t>(std::lround(std::clamp(lambda, 0.0, 1.0) * 255.0));
      }
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Scene files

SyntheticScene read_scene_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open scene file " + file.string());
  SyntheticScene scene;
  std::string line;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& what) {
    throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag.front() == '#') continue;
    if (tag == "intrinsics") {
      CameraIntrinsics& k = scene.intrinsics;
      if (!(ss >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height >> k.depth_scale)) fail("bad intrinsics");
    } else if (tag == "noise") {
      SceneNoise& n = scene.noise;
      if (!(ss >> n.depth_sigma >> n.label_corruption >> n.lambda_clean_max >> n.lambda_corrupt_min >>
            n.lambda_corrupt_max >> n.seed))
        fail("bad noise record");
    } else if (tag == "plane") {
      int id = 0;
      std::string cls_name;
      Vec3 n;
      double d = 0.0;
      std::array<Vec3, 4> c;
      if (!(ss >> id >> cls_name >> n.x() >> n.y() >> n.z() >> d)) fail("bad plane record");
      for (Vec3& corner : c)
        if (!(ss >> corner.x() >> corner.y() >> corner.z())) fail("bad plane corners");
      const auto cls = parse_semantic_class(cls_name);
      if (!cls) fail("unknown class '" + cls_name + "'");
      SyntheticPlane p = SyntheticPlane::from_corners(id, *cls, c);
      if (!(n.norm() > 0.0)) fail("zero plane normal");
      const double scale = n.norm();
      const Vec3 nn = n / scale;
      const double dd = d / scale;
      const double agree = nn.dot(p.equation.normal);
      if (std::abs(std::abs(agree) - 1.0) > 1e-6 || std::abs(dd - (agree > 0 ? 1.0 : -1.0) * p.equation.d) > 1e-6)
        fail("plane equation disagrees with its corners");
      scene.planes.push_back(p);
    } else if (tag == "pose") {
      double t, tx, ty, tz, qx, qy, qz, qw;
      if (!(ss >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) fail("bad pose record");
      scene.trajectory.emplace_back(Eigen::Quaterniond(qw, qx, qy, qz), Vec3(tx, ty, tz), t);
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  scene.validate();
  return scene;
}

void write_scene_file(const fs::path& file, const SyntheticScene& scene) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  const CameraIntrinsics& k = scene.intrinsics;
  const SceneNoise& n = scene.noise;
  out << std::setprecision(12);
  out << "# intrinsics fx fy cx cy width height depth_scale\n";
  out << "intrinsics " << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << ' ' << k.width << ' ' << k.height
      << ' ' << k.depth_scale << '\n';
  out << "# noise sigma corruption lambda_clean_max lambda_corrupt_min lambda_corrupt_max seed\n";
  out << "noise " << n.depth_sigma << ' ' << n.label_corruption << ' ' << n.lambda_clean_max << ' '
      << n.lambda_corrupt_min << ' ' << n.lambda_corrupt_max << ' ' << n.seed << '\n';
  out << "# plane id class nx ny nz d c0 c1 c2 c3\n";
  for (const SyntheticPlane& p : scene.planes) {
    out << "plane " << p.id << ' ' << to_string(p.cls) << ' ' << p.equation.normal.x() << ' ' << p.equation.normal.y()
        << ' ' << p.equation.normal.z() << ' ' << p.equation.d;
    for (const Vec3& c : p.corners) out << ' ' << c.x() << ' ' << c.y() << ' ' << c.z();
    out << '\n';
  }
  out << "# pose timestamp tx ty tz qx qy qz qw\n";
  for (const Pose& pose : scene.trajectory) {
    const auto& q = pose.rotation();
    const auto& t = pose.translation();
    out << "pose " << pose.timestamp() << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' '
        << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
  }
  if (!out) throw IoError("failed writing " + file.string());
}

// ---------------------------------------------------------------------------
// Standard scenes

namespace {

constexpr double kPi = 3.14159265358979323846;

SyntheticPlane rect(int id, SemanticClass cls, Vec3 c0, Vec3 c1, Vec3 c2, Vec3 c3) {
  return SyntheticPlane::from_corners(id, cls, {c0, c1, c2, c3});
}

Pose camera_pose(const Vec3& position, double yaw, double pitch, double timestamp) {
  const Vec3 forward(std::cos(yaw) * std::cos(pitch), std::sin(yaw) * std::cos(pitch), std::sin(pitch));
  return look_along(position, forward, Vec3::UnitZ(), timestamp);
}

SceneNoise noise_from(const BoxRoomOptions& o) {
  SceneNoise n;
  n.depth_sigma = o.depth_sigma;
  n.label_corruption = o.label_corruption;
  n.lambda_clean_max = o.lambda_clean_max;
  n.lambda_corrupt_min = o.lambda_corrupt_min;
  n.lambda_corrupt_max = o.lambda_corrupt_max;
  n.seed = o.seed;
  return n;
}

}  // namespace

SyntheticScene box_room_scene(const BoxRoomOptions& options) {
  constexpr double W = 4.0, D = 3.0, H = 2.6;
  SyntheticScene s;
  s.noise = noise_from(options);
  using C = SemanticClass;
  s.planes = {
      rect(0, C::Ground, {0, 0, 0}, {W, 0, 0}, {W, D, 0}, {0, D, 0}),
      rect(1, C::Wall, {0, 0, 0}, {0, 0, H}, {W, 0, H}, {W, 0, 0}),  // y = 0
      rect(2, C::Wall, {0, D, 0}, {W, D, 0}, {W, D, H}, {0, D, H}),  // y = D
      rect(3, C::Wall, {0, 0, 0}, {0, D, 0}, {0, D, H}, {0, 0, H}),  // x = 0
      rect(4, C::Wall, {W, 0, 0}, {W, 0, H}, {W, D, H}, {W, D, 0}),  // x = W
      rect(5, C::Other, {0, 0, H}, {0, D, H}, {W, D, H}, {W, 0, H}),  // ceiling
      rect(6, C::Other, {2.6, 0.5, 0.75}, {3.5, 0.5, 0.75}, {3.5, 1.3, 0.75}, {2.6, 1.3, 0.75}),  // table top
  };
  const Vec3 center(W / 2, D / 2, 1.4);
  for (std::size_t i = 0; i < options.frames; ++i) {
    const double theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(options.frames, 1));
    const Vec3 pos = center + 0.5 * Vec3(std::cos(theta), std::sin(theta), 0.0);
    const double pitch = deg2rad(-12.0 + 18.0 * std::sin(2.0 * theta));
    s.trajectory.push_back(camera_pose(pos, theta, pitch, 0.1 * static_cast<double>(i)));
  }
  s.validate();
  return s;
}

SyntheticScene corridor_scene(const BoxRoomOptions& options) {
  constexpr double L = 8.0, D = 2.0, H = 2.6;
  SyntheticScene s;
  s.noise = noise_from(options);
  using C = SemanticClass;
  s.planes = {
      rect(0, C::Ground, {0, 0, 0}, {L, 0, 0}, {L, D, 0}, {0, D, 0}),
      rect(1, C::Wall, {0, 0, 0}, {0, 0, H}, {L, 0, H}, {L, 0, 0}),  // y = 0
      rect(2, C::Wall, {0, D, 0}, {L, D, 0}, {L, D, H}, {0, D, H}),  // y = D
      rect(3, C::Other, {0, 0, H}, {0, D, H}, {L, D, H}, {L, 0, H}),  // ceiling
  };
  const std::size_t n = std::max<std::size_t>(options.frames, 1);
  for (std::size_t i = 0; i < options.frames; ++i) {
    const double a = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    const Vec3 pos(0.3 + 5.0 * a, D / 2, 1.4);
    const double yaw = deg2rad(40.0 * std::sin(4.0 * kPi * a));
    const double pitch = deg2rad(-15.0);
    s.trajectory.push_back(camera_pose(pos, yaw, pitch, 0.1 * static_cast<double>(i)));
  }
  s.validate();
  return s;
}

std::size_t generate_dataset(const SyntheticScene& scene, const fs::path& out_dir) {
  scene.validate();
  std::vector<Frame> frames;
  frames.reserve(scene.trajectory.size());
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) frames.push_back(render_scene(scene, i));
  write_dataset(out_dir, scene.intrinsics, frames);
  write_scene_file(out_dir / "groundtruth.txt", scene);
  return frames.size();
}

}  // namespace bcomp
