#include "bcomp/frame_io.hpp"

#include "bcomp/png_io.hpp"
#include "bcomp/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

namespace fs = std::filesystem;

namespace bcomp {

std::string timestamp_stem(double timestamp) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", timestamp);
  return buf;
}

CameraIntrinsics read_intrinsics(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("missing intrinsics file " + file.string());
  CameraIntrinsics k;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    if (!(ss >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height >> k.depth_scale))
      throw ConfigError("malformed intrinsics in " + file.string());
    k.validate();
    return k;
  }
  throw ConfigError("empty intrinsics file " + file.string());
}

void write_intrinsics(const fs::path& file, const CameraIntrinsics& k) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "# fx fy cx cy width height depth_scale\n";
  out << std::setprecision(10) << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << ' ' << k.width << ' '
      << k.height << ' ' << k.depth_scale << '\n';
  if (!out) throw IoError("failed writing " + file.string());
}

std::vector<Pose> read_poses(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<Pose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
      throw ConfigError("malformed pose at " + file.string() + ":" + std::to_string(lineno));
    poses.emplace_back(Eigen::Quaterniond(qw, qx, qy, qz), Vec3(tx, ty, tz), t);
  }
  std::stable_sort(poses.begin(), poses.end(),
                   [](const Pose& a, const Pose& b) { return a.timestamp() < b.timestamp(); });
  return poses;
}

std::vector<std::optional<std::size_t>> associate_timestamps(std::span<const double> a, std::span<const double> b,
                                                             double window) {
  struct Candidate {
    double dt;
    std::size_t i, j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // b is sorted: scan the window around a[i].
    auto it = std::lower_bound(b.begin(), b.end(), a[i] - window - 1e-9);
    for (; it != b.end() && *it <= a[i] + window + 1e-9; ++it) {
      const double dt = std::abs(*it - a[i]);
      if (dt <= window + 1e-9) candidates.push_back({dt, i, static_cast<std::size_t>(it - b.begin())});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.dt, x.i, x.j) < std::tie(y.dt, y.i, y.j);
  });
  std::vector<std::optional<std::size_t>> match(a.size());
  std::vector<bool> b_used(b.size(), false);
  for (const Candidate& c : candidates) {
    if (match[c.i] || b_used[c.j]) continue;
    match[c.i] = c.j;
    b_used[c.j] = true;
  }
  return match;
}

namespace {

struct StreamFile {
  double timestamp;
  fs::path path;
};

// PNG files of a stream directory whose stem parses as a timestamp.
std::vector<StreamFile> list_stream(const fs::path& dir, Dataset& ds) {
  std::vector<StreamFile> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    const std::string stem = entry.path().stem().string();
    try {
      std::size_t used = 0;
      const double t = std::stod(stem, &used);
      if (used != stem.size()) throw std::invalid_argument(stem);
      files.push_back({t, entry.path()});
    } catch (const std::exception&) {
      ds.warnings.push_back("ignoring file without timestamp name: " + entry.path().string());
    }
  }
  std::sort(files.begin(), files.end(), [](const StreamFile& x, const StreamFile& y) {
    return std::tie(x.timestamp, x.path) < std::tie(y.timestamp, y.path);
  });
  return files;
}

std::vector<double> stamps(const std::vector<StreamFile>& files) {
  std::vector<double> t;
  t.reserve(files.size());
  for (const auto& f : files) t.push_back(f.timestamp);
  return t;
}

}  // namespace

Dataset load_dataset(const fs::path& root) {
  Dataset ds;
  ds.intrinsics = read_intrinsics(root / "intrinsics.txt");

  std::vector<Pose> poses;
  if (fs::exists(root / "poses.txt")) poses = read_poses(root / "poses.txt");
  std::vector<double> pose_stamps;
  for (const Pose& p : poses) pose_stamps.push_back(p.timestamp());

  const auto depth_files = list_stream(root / "depth", ds);
  const auto rgb_files = list_stream(root / "rgb", ds);
  const auto label_files = list_stream(root / "label", ds);
  const auto conf_files = list_stream(root / "conf", ds);
  const auto depth_t = stamps(depth_files);
  const auto rgb_of = associate_timestamps(depth_t, stamps(rgb_files));
  const auto label_of = associate_timestamps(depth_t, stamps(label_files));
  const auto conf_of = associate_timestamps(depth_t, stamps(conf_files));

  // RGB images that found no depth partner are frames missing depth.
  std::vector<bool> rgb_used(rgb_files.size(), false);
  for (const auto& m : rgb_of)
    if (m) rgb_used[*m] = true;
  for (std::size_t j = 0; j < rgb_files.size(); ++j) {
    if (rgb_used[j]) continue;
    ++ds.skipped_frames;
    ds.warnings.push_back("rgb image without depth: " + rgb_files[j].path.string());
  }

  const auto& k = ds.intrinsics;
  for (std::size_t i = 0; i < depth_files.size(); ++i) {
    if (!rgb_of[i]) {
      ++ds.skipped_frames;
      ds.warnings.push_back("depth image without rgb: " + depth_files[i].path.string());
      continue;
    }
    Frame f;
    f.timestamp = depth_files[i].timestamp;
    try {
      f.depth = png::read_gray16(depth_files[i].path);
      f.rgb = png::read_rgb8(rgb_files[*rgb_of[i]].path);
      if (label_of[i]) f.labels = png::read_gray16(label_files[*label_of[i]].path);
      if (conf_of[i]) f.confidence = png::read_gray8(conf_files[*conf_of[i]].path);
    } catch (const IoError& e) {
      ++ds.skipped_frames;
      ds.errors.push_back(e.what());
      continue;
    }
    const bool shapes_ok = f.depth.same_shape(k.width, k.height) && f.rgb.same_shape(k.width, k.height) &&
                           (!f.labels || f.labels->same_shape(k.width, k.height)) &&
                           (!f.confidence || f.confidence->same_shape(k.width, k.height));
    if (!shapes_ok) {
      ++ds.skipped_frames;
      ds.errors.push_back("image size does not match intrinsics at t=" + timestamp_stem(f.timestamp));
      continue;
    }
    if (!pose_stamps.empty()) {
      const auto it = std::lower_bound(pose_stamps.begin(), pose_stamps.end(), f.timestamp);
      std::optional<std::size_t> best;
      double best_dt = kAssociationWindow + 1e-9;
      for (auto c : {it, it == pose_stamps.begin() ? it : std::prev(it)}) {
        if (c == pose_stamps.end()) continue;
        const double dt = std::abs(*c - f.timestamp);
        if (dt <= best_dt) {
          best_dt = dt;
          best = static_cast<std::size_t>(c - pose_stamps.begin());
        }
      }
      if (best) f.pose = poses[*best];
    }
    ds.frames.push_back(std::move(f));
  }
  return ds;
}

void write_dataset(const fs::path& root, const CameraIntrinsics& intrinsics, std::span<const Frame> frames) {
  std::error_code ec;
  for (const char* sub : {"depth", "rgb", "label", "conf"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw IoError("cannot create " + (root / sub).string() + ": " + ec.message());
  }
  write_intrinsics(root / "intrinsics.txt", intrinsics);

  std::ofstream poses(root / "poses.txt");
  if (!poses) throw IoError("cannot write " + (root / "poses.txt").string());
  poses << "# timestamp tx ty tz qx qy qz qw\n";
  poses << std::fixed << std::setprecision(9);
  for (const Frame& f : frames) {
    const std::string stem = timestamp_stem(f.timestamp) + ".png";
    png::write_gray16(root / "depth" / stem, f.depth);
    png::write_rgb8(root / "rgb" / stem, f.rgb);
    if (f.labels) png::write_gray16(root / "label" / stem, *f.labels);
    if (f.confidence) png::write_gray8(root / "conf" / stem, *f.confidence);
    if (f.pose) {
      const auto& q = f.pose->rotation();
      const auto& t = f.pose->translation();
      poses << timestamp_stem(f.timestamp) << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' '
            << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
    }
  }
  if (!poses) throw IoError("failed writing poses.txt");
}

// ---------------------------------------------------------------------------
// PLY export

Rgb landmark_color(SemanticClass cls, int id) noexcept {
  static constexpr Rgb kWalls[] = {{230, 25, 75},  {60, 180, 75},  {0, 130, 200},  {245, 130, 48},
                                   {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {210, 245, 60}};
  static constexpr Rgb kGrounds[] = {{170, 110, 40}, {128, 128, 0}, {255, 215, 180}, {128, 128, 128}};
  const auto idx = static_cast<std::size_t>(id < 0 ? -id : id);
  switch (cls) {
    case SemanticClass::Wall: return kWalls[idx % std::size(kWalls)];
    case SemanticClass::Ground: return kGrounds[idx % std::size(kGrounds)];
    case SemanticClass::Other: break;
  }
  return Rgb{255, 255, 255};
}

void export_ply(std::span<const PlaneLandmark> landmarks, const fs::path& path, PlyColorMode mode) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::size_t vertices = 0;
  for (const PlaneLandmark& l : landmarks) vertices += l.stored_points.size();

  out << "ply\n"
      << "format ascii 1.0\n"
      << "comment building components\n"
      << "element vertex " << vertices << '\n'
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property uchar red\n"
      << "property uchar green\n"
      << "property uchar blue\n"
      << "end_header\n";
  out << std::fixed << std::setprecision(5);
  for (const PlaneLandmark& l : landmarks) {
    const Rgb coded = landmark_color(l.cls, l.id);
    for (const Point& p : l.stored_points) {
      const Rgb c = mode == PlyColorMode::ColorCoded ? coded : p.color;
      out << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z() << ' ' << int{c.r} << ' '
          << int{c.g} << ' ' << int{c.b} << '\n';
    }
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace bcomp
