#pragma once

#include "relight/image.hpp"
#include "relight/render.hpp"

namespace relight::envlight {

/// Equirectangular HDR panorama: column u maps to phi in [0, 2 pi), row v to
/// theta in [0, pi]; width must equal 2 * height.
struct Panorama {
  RadianceImage radiance;

  [[nodiscard]] int width() const { return radiance.width; }
  [[nodiscard]] int height() const { return radiance.height; }
  void validate() const;
  /// Direction through the centre of pixel (x, y).
  [[nodiscard]] Eigen::Vector3d direction(int x, int y) const;
};

/// Per-channel projection of a panorama, before packing into twelve numbers.
struct ChannelCoefficients {
  std::array<sh::BasisVector9, 3> rgb{};
  sh::BasisVector9 luminance{};
};

inline constexpr std::array<double, 3> kLuminanceWeights = {0.2126, 0.7152, 0.0722};

/// Midpoint quadrature with sin(theta) weighting; rows are reduced pairwise.
[[nodiscard]] ChannelCoefficients project_channels(const Panorama& pano);

/// Luminance projection as the nine intensities; color = per-channel DC over
/// luminance DC, or (1, 1, 1) when the luminance DC vanishes.
[[nodiscard]] ShLighting project_to_sh(const Panorama& pano);

/// Panorama whose radiance is max(sum_k C_k Y_k, 0) * color per pixel centre.
[[nodiscard]] Panorama synthesize_panorama(const ShLighting& light, int height);

inline constexpr double kGamma = 2.2;

/// Clamp to [0, 1] then v^(1/2.2).
[[nodiscard]] double gamma_encode(double v);
/// v^2.2 on [0, 1] input.
[[nodiscard]] double gamma_decode(double v);
[[nodiscard]] RadianceImage gamma_encode(const RadianceImage& img);
[[nodiscard]] RadianceImage gamma_decode(const RadianceImage& img);

}  // namespace relight::envlight
