#include "bcomp/semantic_validator.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

namespace bcomp {

ClassIdTable ClassIdTable::defaults() {
  ClassIdTable t;
  t.set(1, SemanticClass::Wall);
  t.set(2, SemanticClass::Ground);
  t.set(3, SemanticClass::Other);
  return t;
}

SemanticClass ClassIdTable::lookup(std::uint16_t id) const noexcept {
  const auto it = table_.find(id);
  return it == table_.end() ? SemanticClass::Other : it->second;
}

std::optional<std::uint16_t> ClassIdTable::id_for(SemanticClass cls) const noexcept {
  for (const auto& [id, c] : table_)
    if (c == cls) return id;
  return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ClassIdTable::parse_entry(std::string_view line) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw ConfigError("class table: expected id=class, got '" + std::string(line) + "'");
  const std::string_view key = trim(line.substr(0, eq));
  const std::string_view value = trim(line.substr(eq + 1));
  unsigned id = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
  if (ec != std::errc{} || ptr != key.data() + key.size() || id > 0xFFFFu)
    throw ConfigError("class table: invalid id '" + std::string(key) + "'");
  const auto cls = parse_semantic_class(value);
  if (!cls) throw ConfigError("class table: unknown class '" + std::string(value) + "'");
  set(static_cast<std::uint16_t>(id), *cls);
}

ClassIdTable ClassIdTable::read(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open class table " + file.string());
  ClassIdTable t;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    t.parse_entry(s);
  }
  return t;
}

std::size_t LabelMap::labeled_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(labels.data().begin(), labels.data().end(),
                                                [](const auto& l) { return l.has_value(); }));
}

LabelMap class_filter(const LabelImage& raw_labels, const ClassIdTable& id_table, const ConfidenceImage* confidence) {
  if (confidence != nullptr && !confidence->same_shape(raw_labels.width(), raw_labels.height()))
    throw ConfigError("class_filter: confidence image dimensions differ from the label image");
  LabelMap map;
  map.labels = Image<std::optional<SemanticClass>>(raw_labels.width(), raw_labels.height());
  map.lambda = Image<float>(raw_labels.width(), raw_labels.height(), 0.0f);
  const auto& raw = raw_labels.data();
  auto& out = map.labels.data();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const SemanticClass cls = id_table.lookup(raw[i]);
    if (is_building_component(cls)) out[i] = cls;
  }
  if (confidence != nullptr) {
    const auto& conf = confidence->data();
    auto& lambda = map.lambda.data();
    for (std::size_t i = 0; i < conf.size(); ++i) lambda[i] = static_cast<float>(conf[i]) / 255.0f;
  }
  return map;
}

ClassCloud gather_class_points(const Frame& frame, const LabelMap& label_map, const CameraIntrinsics& intrinsics,
                               SemanticClass cls, double lambda_max, int stride) {
  if (stride < 1) throw ConfigError("semantic stride must be >= 1");
  const DepthImage& depth = frame.depth;
  if (!label_map.labels.same_shape(depth.width(), depth.height()))
    throw ConfigError("label map dimensions differ from the depth image");
  const bool has_rgb = frame.rgb.same_shape(depth.width(), depth.height());
  ClassCloud out;
  out.cloud.frame_id = FrameId::Camera;
  const double inv_scale = 1.0 / intrinsics.depth_scale;
  for (int v = 0; v < depth.height(); v += stride) {
    for (int u = 0; u < depth.width(); u += stride) {
      const auto& label = label_map.labels.at(u, v);
      if (!label || *label != cls) continue;
      const float lambda = label_map.lambda.at(u, v);
      if (lambda > lambda_max) continue;
      const std::uint16_t raw = depth.at(u, v);
      if (raw == 0) continue;
      const double z = raw * inv_scale;
      Point p;
      p.position = Vec3((u - intrinsics.cx) * z / intrinsics.fx, (v - intrinsics.cy) * z / intrinsics.fy, z);
      if (has_rgb) p.color = frame.rgb.at(u, v);
      out.cloud.points.push_back(p);
      out.lambda.push_back(lambda);
    }
  }
  return out;
}

std::vector<SemanticPlane> extract_semantic_planes(const Frame& frame, const LabelMap& label_map,
                                                   const CameraIntrinsics& intrinsics, const RansacConfig& config,
                                                   double lambda_max, int stride) {
  RansacConfig pass = config;
  pass.min_inliers = std::max(1, config.min_inliers / 4);

  std::vector<SemanticPlane> out;
  for (const SemanticClass cls : {SemanticClass::Wall, SemanticClass::Ground}) {
    const ClassCloud cc = gather_class_points(frame, label_map, intrinsics, cls, lambda_max, stride);
    if (cc.cloud.size() < static_cast<std::size_t>(pass.min_inliers)) continue;
    for (Plane& plane : extract_planes(cc.cloud, pass)) {
      SemanticPlane sp;
      sp.cls = cls;
      sp.points.reserve(plane.inliers.size());
      double lambda_sum = 0.0;
      for (std::uint32_t& idx : plane.inliers) {
        lambda_sum += cc.lambda[idx];
        sp.points.push_back(cc.cloud.points[idx]);
        idx = static_cast<std::uint32_t>(sp.points.size() - 1);
      }
      sp.mean_lambda = plane.inliers.empty() ? 0.0 : lambda_sum / static_cast<double>(plane.inliers.size());
      sp.plane = std::move(plane);
      out.push_back(std::move(sp));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const SemanticPlane& a, const SemanticPlane& b) {
    return a.plane.inliers.size() > b.plane.inliers.size();
  });
  return out;
}

}  // namespace bcomp
