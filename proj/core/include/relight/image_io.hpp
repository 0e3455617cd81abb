#pragma once

#include <filesystem>

#include "relight/image.hpp"

namespace relight::io {

/// 8-bit PNG holding display values; channel values are divided by 255 and no
/// gamma is applied. Gray images are expanded to RGB. When alpha_mask is given
/// it receives alpha > 0 (all foreground without an alpha channel).
[[nodiscard]] RadianceImage read_png(const std::filesystem::path& path, Mask* alpha_mask = nullptr);

/// Writes values clamped to [0, 1] and rounded to 8 bits. With a mask the file
/// is RGBA and the mask becomes the alpha channel.
void write_png(const std::filesystem::path& path, const RadianceImage& display,
               const Mask* mask = nullptr);

/// Mask PNG: any nonzero channel (or alpha) marks foreground.
[[nodiscard]] Mask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

/// n = 2 (rgb / 255) - 1, renormalized. Foreground is alpha > 0 when the file has
/// alpha, otherwise an undecoded length above 0.5; background normals are (0,0,1).
[[nodiscard]] NormalMap read_normals_png(const std::filesystem::path& path);
void write_normals_png(const std::filesystem::path& path, const NormalMap& normals);

/// Radiance RGBE (.hdr), flat or new-style run-length scanlines, -Y H +X W layout.
[[nodiscard]] RadianceImage read_hdr(const std::filesystem::path& path);
/// Writes flat RGBE scanlines.
void write_hdr(const std::filesystem::path& path, const RadianceImage& image);

}  // namespace relight::io
