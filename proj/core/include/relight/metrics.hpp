#pragma once

#include "relight/image.hpp"

namespace relight::metrics {

struct MetricReport {
  double mse = 0.0;
  double smse = 0.0;
  double lmse = 0.0;
  double dssim = 0.0;
};

/// Mean squared difference over masked pixels and all three channels.
[[nodiscard]] double mse(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask);

/// Optimal least-squares scale w* = <pred, gt> / <pred, pred> (0 for an all-zero pred).
[[nodiscard]] double optimal_scale(const RadianceImage& pred, const RadianceImage& gt,
                                   const Mask& mask);

/// mse(w* pred, gt).
[[nodiscard]] double smse(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask);

inline constexpr int kLmseWindow = 20;
inline constexpr int kLmseStride = 10;

/// Mean SMSE over 20x20 windows at stride 10 that are at least half foreground.
/// Throws DomainError when the image is smaller than one window or no window
/// qualifies.
[[nodiscard]] double lmse(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask);

/// Grayscale SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 1, averaged over window positions fully inside the image.
[[nodiscard]] double ssim(const RadianceImage& pred, const RadianceImage& gt);

/// (1 - SSIM) / 2.
[[nodiscard]] double dssim(const RadianceImage& pred, const RadianceImage& gt);

[[nodiscard]] MetricReport report(const RadianceImage& pred, const RadianceImage& gt,
                                  const Mask& mask);

}  // namespace relight::metrics
