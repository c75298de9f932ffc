#include "bcomp/frame_io.hpp"
#include "bcomp/png_io.hpp"
#include "bcomp/scene_graph.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace bcomp;
using bcomp::test::TempDir;

namespace {

CameraIntrinsics tiny_intrinsics() {
  CameraIntrinsics k;
  k.fx = k.fy = 10.0;
  k.cx = 3.5;
  k.cy = 2.5;
  k.width = 8;
  k.height = 6;
  return k;
}

Frame tiny_frame(double t, std::uint16_t depth) {
  Frame f;
  f.timestamp = t;
  f.depth = DepthImage(8, 6, depth);
  f.rgb = RgbImage(8, 6, Rgb{10, 20, 30});
  f.depth.at(1, 2) = 0;
  f.rgb.at(3, 4) = Rgb{250, 0, 7};
  return f;
}

struct Ply {
  std::size_t declared = 0;
  std::vector<std::array<double, 6>> vertices;
  bool header_ok = false;
};

Ply read_ply(const std::filesystem::path& file) {
  std::ifstream in(file);
  Ply ply;
  std::string line;
  std::getline(in, line);
  if (line != "ply") return ply;
  std::vector<std::string> props;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "element") {
      std::string name;
      ss >> name >> ply.declared;
    } else if (word == "property") {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    }
  }
  ply.header_ok = props == std::vector<std::string>{"x", "y", "z", "red", "green", "blue"};
  std::array<double, 6> v{};
  while (in >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> v[5]) ply.vertices.push_back(v);
  return ply;
}

}  // namespace

TEST_CASE("three matching depth/rgb pairs load as three frames") {
  TempDir dir("three");
  const std::vector<Frame> frames = {tiny_frame(1.0, 1000), tiny_frame(1.5, 1200), tiny_frame(2.0, 1400)};
  write_dataset(dir.path(), tiny_intrinsics(), frames);
  const Dataset ds = load_dataset(dir.path());
  REQUIRE(ds.frames.size() == 3);
  CHECK(ds.skipped_frames == 0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ds.frames[i].timestamp == doctest::Approx(frames[i].timestamp));
    CHECK(ds.frames[i].depth == frames[i].depth);
    CHECK(ds.frames[i].rgb == frames[i].rgb);
    CHECK_FALSE(ds.frames[i].labels.has_value());
    CHECK_FALSE(ds.frames[i].pose.has_value());
  }
}

TEST_CASE("rgb far from any depth timestamp leaves its frame unmatched") {
  TempDir dir("skew");
  write_dataset(dir.path(), tiny_intrinsics(), std::vector<Frame>{tiny_frame(1.0, 900), tiny_frame(2.0, 900)});
  std::filesystem::rename(dir / ("rgb/" + timestamp_stem(2.0) + ".png"), dir / ("rgb/" + timestamp_stem(2.5) + ".png"));
  const Dataset ds = load_dataset(dir.path());
  REQUIRE(ds.frames.size() == 1);
  CHECK(ds.frames[0].timestamp == doctest::Approx(1.0));
  CHECK(ds.skipped_frames >= 1);
}

TEST_CASE("rgb within the association window is paired") {
  TempDir dir("window");
  write_dataset(dir.path(), tiny_intrinsics(), std::vector<Frame>{tiny_frame(3.0, 900)});
  std::filesystem::rename(dir / ("rgb/" + timestamp_stem(3.0) + ".png"), dir / ("rgb/" + timestamp_stem(3.015) + ".png"));
  CHECK(load_dataset(dir.path()).frames.size() == 1);
}

TEST_CASE("missing intrinsics is a configuration error") {
  TempDir dir("nointr");
  std::filesystem::create_directories(dir / "depth");
  std::filesystem::create_directories(dir / "rgb");
  CHECK_THROWS_AS((void)load_dataset(dir.path()), ConfigError);
}

TEST_CASE("unparseable depth image skips the frame and records an error") {
  TempDir dir("corrupt");
  write_dataset(dir.path(), tiny_intrinsics(), std::vector<Frame>{tiny_frame(1.0, 900), tiny_frame(2.0, 900)});
  std::ofstream(dir / ("depth/" + timestamp_stem(2.0) + ".png")) << "not a png";
  const Dataset ds = load_dataset(dir.path());
  CHECK(ds.frames.size() == 1);
  CHECK(ds.skipped_frames == 1);
  CHECK_FALSE(ds.errors.empty());
}

TEST_CASE("images with the wrong resolution are rejected") {
  TempDir dir("resolution");
  Frame f = tiny_frame(1.0, 900);
  write_dataset(dir.path(), tiny_intrinsics(), std::vector<Frame>{f});
  png::write_gray16(dir / ("depth/" + timestamp_stem(1.0) + ".png"), DepthImage(4, 4, 5));
  const Dataset ds = load_dataset(dir.path());
  CHECK(ds.frames.empty());
  CHECK(ds.skipped_frames == 1);
}

TEST_CASE("rendered frames survive a write/load round trip bit for bit") {
  BoxRoomOptions o;
  o.frames = 4;
  o.depth_sigma = 0.01;
  o.label_corruption = 0.05;
  const SyntheticScene scene = box_room_scene(o);
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) frames.push_back(render_scene(scene, i));
  TempDir dir("roundtrip");
  write_dataset(dir.path(), scene.intrinsics, frames);
  const Dataset ds = load_dataset(dir.path());
  REQUIRE(ds.frames.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& a = frames[i];
    const Frame& b = ds.frames[i];
    CHECK(a.depth == b.depth);
    CHECK(a.rgb == b.rgb);
    REQUIRE(b.labels.has_value());
    CHECK(*a.labels == *b.labels);
    REQUIRE(b.confidence.has_value());
    CHECK(*a.confidence == *b.confidence);
    REQUIRE(b.pose.has_value());
    CHECK((a.pose->translation() - b.pose->translation()).norm() < 1e-8);
    CHECK(a.pose->rotation().angularDistance(b.pose->rotation()) < 1e-8);
  }
  const CameraIntrinsics k = ds.intrinsics;
  CHECK(k.fx == scene.intrinsics.fx);
  CHECK(k.cx == scene.intrinsics.cx);
  CHECK(k.width == scene.intrinsics.width);
  CHECK(k.depth_scale == scene.intrinsics.depth_scale);
}

TEST_CASE("png codecs round trip extreme values") {
  TempDir dir("png");
  DepthImage d(5, 3, 0);
  d.at(0, 0) = 65535;
  d.at(4, 2) = 1;
  d.at(2, 1) = 256;
  png::write_gray16(dir / "d.png", d);
  CHECK(png::read_gray16(dir / "d.png") == d);
  ConfidenceImage c(3, 2, 255);
  c.at(1, 1) = 0;
  png::write_gray8(dir / "c.png", c);
  CHECK(png::read_gray8(dir / "c.png") == c);
  RgbImage rgb(2, 2, Rgb{1, 2, 3});
  rgb.at(1, 0) = Rgb{255, 128, 0};
  png::write_rgb8(dir / "r.png", rgb);
  CHECK(png::read_rgb8(dir / "r.png") == rgb);
  CHECK_THROWS_AS((void)png::read_gray16(dir / "missing.png"), IoError);
}

TEST_CASE("poses file pairs frames with the nearest pose") {
  TempDir dir("poses");
  write_dataset(dir.path(), tiny_intrinsics(), std::vector<Frame>{tiny_frame(1.0, 900), tiny_frame(2.0, 900)});
  std::ofstream(dir / "poses.txt") << "# timestamp tx ty tz qx qy qz qw\n"
                                    << "1.005 1 2 3 0 0 0 1\n"
                                    << "2.5 0 0 0 0 0 0 1\n";
  const Dataset ds = load_dataset(dir.path());
  REQUIRE(ds.frames.size() == 2);
  REQUIRE(ds.frames[0].pose.has_value());
  CHECK(ds.frames[0].pose->translation().isApprox(Vec3(1, 2, 3)));
  CHECK_FALSE(ds.frames[1].pose.has_value());
}

TEST_CASE("malformed pose quaternion is a configuration error") {
  TempDir dir("badpose");
  std::ofstream(dir / "poses.txt") << "1.0 0 0 0 0 0 0 0.5\n";
  CHECK_THROWS_AS((void)read_poses(dir / "poses.txt"), ConfigError);
}

TEST_CASE("timestamp association is unique and symmetric") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(20), b(25);
    for (double& x : a) x = u(rng);
    for (double& x : b) x = u(rng);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto ab = associate_timestamps(a, b, 0.02);
    const auto ba = associate_timestamps(b, a, 0.02);
    std::set<std::size_t> used;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!ab[i]) continue;
      CHECK(used.insert(*ab[i]).second);
      CHECK(std::abs(a[i] - b[*ab[i]]) <= 0.02 + 1e-9);
      REQUIRE(ba[*ab[i]].has_value());
      CHECK(*ba[*ab[i]] == i);
    }
    std::size_t matched_b = 0;
    for (const auto& m : ba) matched_b += m.has_value();
    CHECK(matched_b == used.size());
  }
}

TEST_CASE("PLY export of an empty map has a valid header and no vertices") {
  TempDir dir("ply0");
  export_ply({}, dir / "empty.ply", PlyColorMode::ColorCoded);
  const Ply ply = read_ply(dir / "empty.ply");
  CHECK(ply.header_ok);
  CHECK(ply.declared == 0);
  CHECK(ply.vertices.empty());
}

TEST_CASE("color-coded PLY paints one landmark in a single color") {
  PlaneLandmark l;
  l.id = 4;
  l.cls = SemanticClass::Wall;
  for (int i = 0; i < 100; ++i) l.stored_points.push_back({Vec3(i * 0.01, 1.0, 2.0), Rgb{static_cast<std::uint8_t>(i), 0, 0}});
  TempDir dir("ply1");
  export_ply(std::vector<PlaneLandmark>{l}, dir / "one.ply", PlyColorMode::ColorCoded);
  const Ply ply = read_ply(dir / "one.ply");
  REQUIRE(ply.vertices.size() == 100);
  CHECK(ply.declared == 100);
  const Rgb c = landmark_color(l.cls, l.id);
  for (const auto& v : ply.vertices) {
    CHECK(v[3] == c.r);
    CHECK(v[4] == c.g);
    CHECK(v[5] == c.b);
  }

  export_ply(std::vector<PlaneLandmark>{l}, dir / "rgb.ply", PlyColorMode::RgbTextured);
  const Ply textured = read_ply(dir / "rgb.ply");
  REQUIRE(textured.vertices.size() == 100);
  CHECK(textured.vertices[42][3] == 42);
  CHECK(textured.vertices[42][0] == doctest::Approx(0.42));
}

TEST_CASE("landmark colors differ between classes") {
  CHECK_FALSE(landmark_color(SemanticClass::Wall, 0) == landmark_color(SemanticClass::Ground, 0));
  CHECK(landmark_color(SemanticClass::Wall, 3) == landmark_color(SemanticClass::Wall, 3));
}

TEST_CASE("PLY export to an unwritable path is an I/O error") {
  CHECK_THROWS_AS(export_ply({}, "/nonexistent-dir/x/y.ply", PlyColorMode::ColorCoded), IoError);
}
