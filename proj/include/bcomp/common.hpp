#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bcomp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Raised for invalid parameters, malformed configuration or missing
/// mandatory inputs. Callers treat it as fatal.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a file cannot be read, written or decoded.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Dense row-major 2D image.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width < 0 || height < 0) throw ConfigError("negative image dimensions");
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] T& at(int u, int v) { return data_[index(u, v)]; }
  [[nodiscard]] const T& at(int u, int v) const { return data_[index(u, v)]; }

  [[nodiscard]] std::vector<T>& data() noexcept { return data_; }
  [[nodiscard]] const std::vector<T>& data() const noexcept { return data_; }

  [[nodiscard]] bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  [[nodiscard]] std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using DepthImage = Image<std::uint16_t>;
using RgbImage = Image<Rgb>;
using LabelImage = Image<std::uint16_t>;
using ConfidenceImage = Image<std::uint8_t>;

enum class FrameId { Camera, World };

/// Building-component classes. Wall and Ground form the retained set;
/// everything else collapses to Other.
enum class SemanticClass : std::uint8_t { Wall, Ground, Other };

[[nodiscard]] constexpr bool is_building_component(SemanticClass c) noexcept {
  return c == SemanticClass::Wall || c == SemanticClass::Ground;
}

[[nodiscard]] std::string_view to_string(SemanticClass c) noexcept;
[[nodiscard]] std::string_view to_string(FrameId f) noexcept;

/// Case-insensitive parse of "wall", "ground" (alias "floor") and "other".
[[nodiscard]] std::optional<SemanticClass> parse_semantic_class(std::string_view text);

[[nodiscard]] constexpr double deg2rad(double deg) noexcept { return deg * 3.14159265358979323846 / 180.0; }
[[nodiscard]] constexpr double rad2deg(double rad) noexcept { return rad * 180.0 / 3.14159265358979323846; }

/// Angle between two unit vectors in degrees, clamped against rounding.
[[nodiscard]] double angle_deg(const Vec3& a, const Vec3& b) noexcept;

}  // namespace bcomp
