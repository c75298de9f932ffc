#include "bcomp/pipeline.hpp"

#include "bcomp/cloud.hpp"
#include "bcomp/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace bcomp {

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    const double out = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
}

long long to_int(std::string_view key, std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + std::string(key) + "' expects a boolean, got '" + std::string(v) + "'");
}

Vec3 to_vec3(std::string_view key, std::string_view v) {
  std::string s(v);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream ss(s);
  Vec3 out;
  std::string rest;
  if (!(ss >> out.x() >> out.y() >> out.z()) || (ss >> rest))
    throw ConfigError("config: '" + std::string(key) + "' expects three numbers");
  return out;
}

bool is_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

}  // namespace

void PipelineConfig::validate() const {
  if (frame_stride < 1) throw ConfigError("config: frame_stride must be >= 1");
  if (pixel_stride < 1 || semantic_stride < 1) throw ConfigError("config: pixel strides must be >= 1");
  if (!(voxel_size > 0.0)) throw ConfigError("config: voxel_size must be positive");
  if (!(depth_min >= 0.0) || !(depth_min < depth_max)) throw ConfigError("config: require 0 <= depth_min < depth_max");
  if (!(lambda_max >= 0.0 && lambda_max <= 1.0)) throw ConfigError("config: lambda_max must be in [0, 1]");
  if (!(gravity_up.norm() > 0.0)) throw ConfigError("config: gravity_up must be nonzero");
  if (camera_gravity_up && !(camera_gravity_up->norm() > 0.0))
    throw ConfigError("config: camera_gravity_up must be nonzero");
  if (!(ground_truth_tolerance.angle_tol > 0.0) || !(ground_truth_tolerance.offset_tol > 0.0))
    throw ConfigError("config: ground-truth tolerances must be positive");
  ransac.validate();
  fusion.validate();
  association.validate();
}

void PipelineConfig::set(std::string_view raw_key, std::string_view raw_value) {
  std::string key(trim(raw_key));
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string_view value = trim(raw_value);
  if (is_integer(key)) {
    class_table.parse_entry(key + "=" + std::string(value));
    return;
  }
  const auto positive_int = [&](long long v) {
    if (v < 1 || v > 1'000'000'000) throw ConfigError("config: '" + key + "' must be a positive integer");
    return static_cast<int>(v);
  };
  if (key == "frame_stride") frame_stride = positive_int(to_int(key, value));
  else if (key == "pixel_stride") pixel_stride = positive_int(to_int(key, value));
  else if (key == "semantic_stride") semantic_stride = positive_int(to_int(key, value));
  else if (key == "voxel_size") voxel_size = to_double(key, value);
  else if (key == "depth_min") depth_min = to_double(key, value);
  else if (key == "depth_max") depth_max = to_double(key, value);
  else if (key == "ransac_iters") ransac.max_iterations = positive_int(to_int(key, value));
  else if (key == "inlier_threshold") ransac.epsilon_inlier = to_double(key, value);
  else if (key == "min_inliers") ransac.min_inliers = fusion.min_inliers = positive_int(to_int(key, value));
  else if (key == "max_planes") ransac.max_planes = positive_int(to_int(key, value));
  else if (key == "seed") {
    const long long s = to_int(key, value);
    if (s < 0) throw ConfigError("config: seed must be non-negative");
    ransac.random_seed = static_cast<std::uint64_t>(s);
  } else if (key == "lambda_max") lambda_max = to_double(key, value);
  else if (key == "match_threshold") fusion.epsilon_match = to_double(key, value);
  else if (key == "tau_dist") fusion.tau_dist = to_double(key, value);
  else if (key == "theta_normal") fusion.theta_normal = to_double(key, value);
  else if (key == "min_area") fusion.min_area = to_double(key, value);
  else if (key == "vertical_tol") fusion.vertical_tol = to_double(key, value);
  else if (key == "horizontal_tol") fusion.horizontal_tol = to_double(key, value);
  else if (key == "assoc_angle_tol") association.angle_tol = to_double(key, value);
  else if (key == "assoc_offset_tol") association.offset_tol = to_double(key, value);
  else if (key == "assoc_max_gap") association.max_extent_gap = to_double(key, value);
  else if (key == "gt_angle_tol") ground_truth_tolerance.angle_tol = to_double(key, value);
  else if (key == "gt_offset_tol") ground_truth_tolerance.offset_tol = to_double(key, value);
  else if (key == "gravity_up") gravity_up = to_vec3(key, value);
  else if (key == "camera_gravity_up") camera_gravity_up = to_vec3(key, value);
  else if (key == "parallel") parallel = to_bool(key, value);
  else if (key == "graph_out") graph_out = fs::path(value);
  else if (key == "export_ply") ply_out = fs::path(value);
  else if (key == "report_out") report_out = fs::path(value);
  else if (key == "eval_gt") ground_truth = fs::path(value);
  else if (key == "ply_mode") {
    if (value == "color" || value == "color-coded") ply_mode = PlyColorMode::ColorCoded;
    else if (value == "rgb" || value == "rgb-textured") ply_mode = PlyColorMode::RgbTextured;
    else throw ConfigError("config: ply_mode must be color-coded or rgb-textured");
  } else if (key == "class_table") {
    for (const auto& [id, cls] : ClassIdTable::read(fs::path(value)).entries()) class_table.set(id, cls);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

void PipelineConfig::load_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected key = value");
    set(s.substr(0, eq), s.substr(eq + 1));
  }
}

// ---------------------------------------------------------------------------
// Timing

void StageStats::add(double ms) noexcept {
  ++count;
  total_ms += ms;
  max_ms = std::max(max_ms, ms);
}

void TimingReport::write(std::ostream& os) const {
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(3);
  for (const auto& [name, s] : stages)
    os << "timing " << name << " mean_ms " << s.mean_ms() << " max_ms " << s.max_ms << " count " << s.count << '\n';
  os.flags(flags);
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::uint64_t stage_seed(std::uint64_t base, std::size_t frame_index, std::uint64_t stage) {
  std::uint64_t z = base ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(frame_index) + 1)) ^ (stage << 56);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct GeometricOutput {
  PointCloud cloud;
  std::vector<Plane> planes;
  double ms = 0.0;
};

struct SemanticOutput {
  std::vector<SemanticPlane> planes;
  double ms = 0.0;
};

}  // namespace

FrameResult process_frame(const Frame& frame, std::size_t frame_index, const CameraIntrinsics& intrinsics,
                          const PipelineConfig& config, TimingReport* timing) {
  const auto geometric_stage = [&]() {
    const auto t0 = Clock::now();
    GeometricOutput out;
    PointCloud cloud = backproject(frame, intrinsics, config.pixel_stride);
    cloud = voxel_downsample(cloud, config.voxel_size);
    out.cloud = distance_filter(cloud, config.depth_min, config.depth_max);
    RansacConfig rc = config.ransac;
    rc.min_inliers = scaled_min_inliers(config.ransac.min_inliers, out.cloud.size());
    rc.random_seed = stage_seed(config.ransac.random_seed, frame_index, 1);
    out.planes = extract_planes(out.cloud, rc);
    out.ms = elapsed_ms(t0);
    return out;
  };
  const auto semantic_stage = [&]() {
    const auto t0 = Clock::now();
    SemanticOutput out;
    if (frame.labels) {
      const ConfidenceImage* conf = frame.confidence ? &*frame.confidence : nullptr;
      const LabelMap map = class_filter(*frame.labels, config.class_table, conf);
      RansacConfig rc = config.ransac;
      rc.random_seed = stage_seed(config.ransac.random_seed, frame_index, 2);
      out.planes = extract_semantic_planes(frame, map, intrinsics, rc, config.lambda_max, config.semantic_stride);
    }
    out.ms = elapsed_ms(t0);
    return out;
  };

  GeometricOutput geo;
  SemanticOutput sem;
  if (config.parallel) {
    auto pending = std::async(std::launch::async, geometric_stage);
    sem = semantic_stage();
    geo = pending.get();
  } else {
    geo = geometric_stage();
    sem = semantic_stage();
  }

  const auto t0 = Clock::now();
  FrameResult result;
  result.timestamp = frame.timestamp;
  auto fused = fuse_frame(geo.cloud, geo.planes, sem.planes, config.fusion, frame.timestamp);
  fused = remove_dangling(fused, config.fusion);
  GravityReference gravity{config.gravity_up, config.camera_gravity_up};
  result.components = structural_validate(fused, gravity, frame.pose, config.fusion);
  result.geometric_planes = std::move(geo.planes);
  result.semantic_planes = std::move(sem.planes);
  if (timing != nullptr) {
    timing->stages["geometric"].add(geo.ms);
    timing->stages["semantic"].add(sem.ms);
    timing->stages["fusion"].add(elapsed_ms(t0));
  }
  return result;
}

PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& config, const FrameObserver& observer) {
  config.validate();
  dataset.intrinsics.validate();
  PipelineResult result;
  const auto stride = static_cast<std::size_t>(config.frame_stride);
  for (std::size_t i = 0; i < dataset.frames.size(); i += stride) {
    const Frame& frame = dataset.frames[i];
    const auto t0 = Clock::now();
    try {
      FrameResult fr = process_frame(frame, i, dataset.intrinsics, config, &result.timing);
      const auto ta = Clock::now();
      const Pose pose = frame.pose.value_or(Pose::identity(frame.timestamp));
      for (const ValidatedComponent& c : fr.components) associate(result.graph, c, pose, config.association);
      result.timing.stages["association"].add(elapsed_ms(ta));
      result.timing.stages["frame"].add(elapsed_ms(t0));
      ++result.frames_processed;
      if (observer) observer(fr, result.graph);
    } catch (const std::exception& e) {
      ++result.frames_failed;
      result.errors.push_back("frame t=" + timestamp_stem(frame.timestamp) + ": " + e.what());
    }
  }
  result.graph.set_structures(infer_structures(result.graph, config.gravity_up, config.structures));

  if (config.ground_truth) {
    const SyntheticScene truth = read_scene_file(*config.ground_truth);
    result.report = match_to_ground_truth(result.graph.landmark_list(), truth.planes, config.ground_truth_tolerance);
  }
  if (config.graph_out) {
    std::ofstream out(*config.graph_out);
    if (!out) throw IoError("cannot write " + config.graph_out->string());
    result.graph.write(out);
    if (!out) throw IoError("failed writing " + config.graph_out->string());
  }
  if (config.ply_out) export_ply(result.graph.landmark_list(), *config.ply_out, config.ply_mode);
  if (config.report_out) {
    std::ofstream out(*config.report_out);
    if (!out) throw IoError("cannot write " + config.report_out->string());
    write_report(out, result);
  }
  return result;
}

PipelineResult run_pipeline(const fs::path& dataset_root, const PipelineConfig& config) {
  const Dataset dataset = load_dataset(dataset_root);
  PipelineResult result = run_pipeline(dataset, config);
  for (const std::string& e : dataset.errors) result.errors.insert(result.errors.begin(), "load: " + e);
  result.frames_failed += dataset.skipped_frames;
  return result;
}

void write_report(std::ostream& os, const PipelineResult& result) {
  const SceneGraph& g = result.graph;
  std::size_t walls = 0, grounds = 0, rooms = 0, corridors = 0;
  for (const auto& [id, l] : g.landmarks()) (l.cls == SemanticClass::Wall ? walls : grounds)++;
  for (const StructureNode& s : g.structures()) (s.kind == StructureKind::Room ? rooms : corridors)++;
  const auto flags = os.flags();
  os << "frames_processed " << result.frames_processed << '\n';
  os << "frames_failed " << result.frames_failed << '\n';
  os << "landmarks " << g.landmarks().size() << " walls " << walls << " grounds " << grounds << '\n';
  os << "structures rooms " << rooms << " corridors " << corridors << '\n';
  if (result.report) {
    const RecognitionReport& r = *result.report;
    os << std::fixed << std::setprecision(4);
    os << "recognition tp " << r.tp << " fp " << r.fp << " fn " << r.fn << " precision " << r.precision << " recall "
       << r.recall << " f1 " << r.f1 << '\n';
    for (const auto& [lm, gt] : r.matches) os << "match landmark " << lm << " truth " << gt << '\n';
  }
  os.flags(flags);
  result.timing.write(os);
  for (const std::string& e : result.errors) os << "error " << e << '\n';
}

}  // namespace bcomp
