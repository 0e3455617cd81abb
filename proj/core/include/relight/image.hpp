#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace relight {

using Rgb = Eigen::Array3d;

/// Foreground mask; nonzero entries are foreground.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  Mask() = default;
  Mask(int w, int h, bool fill = false);

  [[nodiscard]] bool at(int x, int y) const { return values[index(x, y)] != 0; }
  [[nodiscard]] bool operator[](std::size_t i) const { return values[i] != 0; }
  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] std::size_t count() const;
  [[nodiscard]] bool same_shape(int w, int h) const { return width == w && height == h; }
};

/// H x W buffer of linear RGB radiance, scanline order.
struct RadianceImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  RadianceImage() = default;
  RadianceImage(int w, int h, const Rgb& fill = Rgb::Zero());

  [[nodiscard]] Rgb& at(int x, int y) { return pixels[index(x, y)]; }
  [[nodiscard]] const Rgb& at(int x, int y) const { return pixels[index(x, y)]; }
  [[nodiscard]] Rgb& operator[](std::size_t i) { return pixels[i]; }
  [[nodiscard]] const Rgb& operator[](std::size_t i) const { return pixels[i]; }
  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  [[nodiscard]] std::size_t size() const { return pixels.size(); }
  [[nodiscard]] bool same_shape(int w, int h) const { return width == w && height == h; }

  RadianceImage& operator+=(const RadianceImage& other);
  RadianceImage& operator*=(double s);
};

[[nodiscard]] RadianceImage operator+(RadianceImage a, const RadianceImage& b);
[[nodiscard]] RadianceImage operator-(const RadianceImage& a, const RadianceImage& b);
[[nodiscard]] RadianceImage operator*(RadianceImage a, double s);

/// Per-pixel unit normals together with the foreground mask they are valid on.
struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> normals;
  Mask mask;

  NormalMap() = default;
  NormalMap(int w, int h);

  [[nodiscard]] std::size_t size() const { return normals.size(); }

  /// Masked-in normals must be unit within 1e-4 and face the viewer (z >= 0).
  /// Throws DomainError otherwise, ShapeError on inconsistent buffers.
  void validate() const;
};

/// Orthographic view of the unit sphere: foreground where u^2 + v^2 < 1.
[[nodiscard]] NormalMap sphere_normal_map(int width, int height);

/// Split ShapeError helpers used by every module.
void require_same_shape(const NormalMap& normals, const RadianceImage& image, const char* what);
void require_same_shape(const Mask& mask, const RadianceImage& image, const char* what);

}  // namespace relight
