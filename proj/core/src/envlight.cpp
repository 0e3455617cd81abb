#include "relight/envlight.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relight/errors.hpp"

namespace relight::envlight {

void Panorama::validate() const {
  if (radiance.width <= 0 || radiance.height <= 0 || radiance.width != 2 * radiance.height) {
    throw ShapeError("equirectangular panorama must be 2H x H, got " +
                     std::to_string(radiance.width) + "x" + std::to_string(radiance.height));
  }
  if (radiance.size() != static_cast<std::size_t>(radiance.width) * radiance.height) {
    throw ShapeError("panorama pixel buffer does not match its dimensions");
  }
  for (const auto& p : radiance.pixels) {
    if (!p.isFinite().all() || (p < 0.0).any()) {
      throw DomainError("panorama radiance must be finite and >= 0");
    }
  }
}

Eigen::Vector3d Panorama::direction(int x, int y) const {
  const double phi = 2.0 * sh::kPi * (x + 0.5) / width();
  const double theta = sh::kPi * (y + 0.5) / height();
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

namespace {

using Partial = std::array<double, 4 * sh::kNumCoeffs>;  // R, G, B, luminance

Partial pairwise_sum(std::vector<Partial>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Partial a = pairwise_sum(parts, lo, mid);
  const Partial b = pairwise_sum(parts, mid, hi);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

}  // namespace

ChannelCoefficients project_channels(const Panorama& pano) {
  pano.validate();
  const int w = pano.width();
  const int h = pano.height();
  const double d_theta = sh::kPi / h;
  const double d_phi = 2.0 * sh::kPi / w;

  std::vector<Partial> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    Partial acc{};
    const double theta = sh::kPi * (y + 0.5) / h;
    const double weight = std::sin(theta) * d_theta * d_phi;
    for (int x = 0; x < w; ++x) {
      const Rgb& l = pano.radiance.at(x, y);
      const double lum = kLuminanceWeights[0] * l[0] + kLuminanceWeights[1] * l[1] +
                         kLuminanceWeights[2] * l[2];
      const auto basis = sh::eval_Y_raw(pano.direction(x, y));
      for (int k = 0; k < sh::kNumCoeffs; ++k) {
        const double yw = basis[k] * weight;
        acc[k] += l[0] * yw;
        acc[sh::kNumCoeffs + k] += l[1] * yw;
        acc[2 * sh::kNumCoeffs + k] += l[2] * yw;
        acc[3 * sh::kNumCoeffs + k] += lum * yw;
      }
    }
    rows[static_cast<std::size_t>(y)] = acc;
  }
  const Partial total = pairwise_sum(rows, 0, rows.size());

  ChannelCoefficients out;
  for (int k = 0; k < sh::kNumCoeffs; ++k) {
    for (int ch = 0; ch < 3; ++ch) out.rgb[ch][k] = total[ch * sh::kNumCoeffs + k];
    out.luminance[k] = total[3 * sh::kNumCoeffs + k];
  }
  return out;
}

ShLighting project_to_sh(const Panorama& pano) {
  const auto proj = project_channels(pano);
  ShLighting light;
  light.coeffs = proj.luminance;
  const double dc = proj.luminance[0];
  if (std::abs(dc) < 1e-12) {
    light.color = {1.0, 1.0, 1.0};
  } else {
    for (int ch = 0; ch < 3; ++ch) light.color[ch] = std::max(proj.rgb[ch][0] / dc, 0.0);
  }
  return light;
}

Panorama synthesize_panorama(const ShLighting& light, int height) {
  if (height <= 0) throw ShapeError("panorama height must be positive");
  light.validate();
  Panorama pano{RadianceImage(2 * height, height)};
  const Rgb color(light.color[0], light.color[1], light.color[2]);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < 2 * height; ++x) {
      const auto basis = sh::eval_Y_raw(pano.direction(x, y));
      double v = 0.0;
      for (int k = 0; k < sh::kNumCoeffs; ++k) v += light.coeffs[k] * basis[k];
      pano.radiance.at(x, y) = std::max(v, 0.0) * color;
    }
  }
  return pano;
}

double gamma_encode(double v) { return std::pow(std::clamp(v, 0.0, 1.0), 1.0 / kGamma); }

double gamma_decode(double v) { return std::pow(std::clamp(v, 0.0, 1.0), kGamma); }

RadianceImage gamma_encode(const RadianceImage& img) {
  RadianceImage out = img;
  for (auto& p : out.pixels) {
    for (int ch = 0; ch < 3; ++ch) p[ch] = gamma_encode(p[ch]);
  }
  return out;
}

RadianceImage gamma_decode(const RadianceImage& img) {
  RadianceImage out = img;
  for (auto& p : out.pixels) {
    for (int ch = 0; ch < 3; ++ch) p[ch] = gamma_decode(p[ch]);
  }
  return out;
}

}  // namespace relight::envlight
