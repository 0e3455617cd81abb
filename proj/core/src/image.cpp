#include "relight/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relight/errors.hpp"

namespace relight {

Mask::Mask(int w, int h, bool fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

RadianceImage::RadianceImage(int w, int h, const Rgb& fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

RadianceImage& RadianceImage::operator+=(const RadianceImage& other) {
  if (!same_shape(other.width, other.height)) throw ShapeError("image sizes differ");
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] += other.pixels[i];
  return *this;
}

RadianceImage& RadianceImage::operator*=(double s) {
  for (auto& p : pixels) p *= s;
  return *this;
}

RadianceImage operator+(RadianceImage a, const RadianceImage& b) {
  a += b;
  return a;
}

RadianceImage operator-(const RadianceImage& a, const RadianceImage& b) {
  if (!a.same_shape(b.width, b.height)) throw ShapeError("image sizes differ");
  RadianceImage out(a.width, a.height);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

RadianceImage operator*(RadianceImage a, double s) {
  a *= s;
  return a;
}

NormalMap::NormalMap(int w, int h)
    : width(w),
      height(h),
      normals(static_cast<std::size_t>(w) * h, Eigen::Vector3d(0.0, 0.0, 1.0)),
      mask(w, h) {}

void NormalMap::validate() const {
  const auto n = static_cast<std::size_t>(width) * height;
  if (normals.size() != n || !mask.same_shape(width, height) || mask.size() != n) {
    throw ShapeError("normal map buffers do not match its dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const auto& v = normals[i];
    const double len = v.norm();
    if (!std::isfinite(len) || std::abs(len - 1.0) > 1e-4) {
      throw DomainError("normal at pixel " + std::to_string(i) + " is not unit length");
    }
    if (v.z() < -1e-4) {
      throw DomainError("normal at pixel " + std::to_string(i) + " faces away from the viewer");
    }
  }
}

NormalMap sphere_normal_map(int width, int height) {
  NormalMap map(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width * 2.0 - 1.0;
      const double v = 1.0 - (y + 0.5) / height * 2.0;
      const double r2 = u * u + v * v;
      const auto i = map.mask.index(x, y);
      if (r2 < 1.0) {
        map.mask.values[i] = 1;
        map.normals[i] = Eigen::Vector3d(u, v, std::sqrt(1.0 - r2));
      }
    }
  }
  return map;
}

void require_same_shape(const NormalMap& normals, const RadianceImage& image, const char* what) {
  if (!image.same_shape(normals.width, normals.height) || image.size() != normals.size()) {
    throw ShapeError(std::string(what) + " does not match the normal map dimensions");
  }
}

void require_same_shape(const Mask& mask, const RadianceImage& image, const char* what) {
  if (!image.same_shape(mask.width, mask.height) || image.size() != mask.size()) {
    throw ShapeError(std::string(what) + " does not match the mask dimensions");
  }
}

}  // namespace relight
