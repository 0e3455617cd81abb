#include "relight/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "relight/errors.hpp"

namespace relight::io {

namespace {

struct Rgba8 {
  int width = 0;
  int height = 0;
  bool has_alpha = false;
  std::vector<std::uint8_t> data;  // RGBA
};

Rgba8 read_rgba(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  Rgba8 out;
  out.has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  image.format = PNG_FORMAT_RGBA;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

void write_bytes(const std::filesystem::path& path, int width, int height, bool alpha,
                 const std::vector<std::uint8_t>& data) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, data.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

std::uint8_t to_byte(double v) {
  if (!std::isfinite(v)) throw NumericError("non-finite pixel value in PNG output");
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

RadianceImage read_png(const std::filesystem::path& path, Mask* alpha_mask) {
  const auto raw = read_rgba(path);
  RadianceImage img(raw.width, raw.height);
  if (alpha_mask) *alpha_mask = Mask(raw.width, raw.height, true);
  for (std::size_t p = 0; p < img.size(); ++p) {
    for (int ch = 0; ch < 3; ++ch) img[p][ch] = raw.data[4 * p + ch] / 255.0;
    if (alpha_mask && raw.has_alpha) alpha_mask->values[p] = raw.data[4 * p + 3] > 0 ? 1 : 0;
  }
  return img;
}

void write_png(const std::filesystem::path& path, const RadianceImage& display, const Mask* mask) {
  if (mask) require_same_shape(*mask, display, "PNG image");
  const int channels = mask ? 4 : 3;
  std::vector<std::uint8_t> data(display.size() * channels);
  for (std::size_t p = 0; p < display.size(); ++p) {
    for (int ch = 0; ch < 3; ++ch) data[channels * p + ch] = to_byte(display[p][ch]);
    if (mask) data[channels * p + 3] = (*mask)[p] ? 255 : 0;
  }
  write_bytes(path, display.width, display.height, mask != nullptr, data);
}

Mask read_mask_png(const std::filesystem::path& path) {
  const auto raw = read_rgba(path);
  Mask m(raw.width, raw.height);
  for (std::size_t p = 0; p < m.size(); ++p) {
    const bool colored = raw.data[4 * p] || raw.data[4 * p + 1] || raw.data[4 * p + 2];
    const bool opaque = raw.data[4 * p + 3] > 0;
    m.values[p] = (raw.has_alpha ? opaque && colored : colored) ? 1 : 0;
  }
  return m;
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  std::vector<std::uint8_t> data(mask.size() * 3);
  for (std::size_t p = 0; p < mask.size(); ++p) {
    std::fill_n(data.begin() + 3 * p, 3, mask[p] ? 255 : 0);
  }
  write_bytes(path, mask.width, mask.height, false, data);
}

NormalMap read_normals_png(const std::filesystem::path& path) {
  const auto raw = read_rgba(path);
  NormalMap nm(raw.width, raw.height);
  for (std::size_t p = 0; p < nm.size(); ++p) {
    Eigen::Vector3d n;
    for (int ch = 0; ch < 3; ++ch) n[ch] = 2.0 * raw.data[4 * p + ch] / 255.0 - 1.0;
    const double len = n.norm();
    const bool fg = raw.has_alpha ? raw.data[4 * p + 3] > 0 : len > 0.5;
    if (fg && len > 0.0) {
      n /= len;
      // 8-bit quantization can tip grazing normals slightly behind the view plane.
      if (n.z() < 0.0) {
        n.z() = 0.0;
        n.normalize();
      }
      nm.normals[p] = n;
      nm.mask.values[p] = 1;
    } else {
      nm.normals[p] = Eigen::Vector3d(0.0, 0.0, 1.0);
      nm.mask.values[p] = 0;
    }
  }
  return nm;
}

void write_normals_png(const std::filesystem::path& path, const NormalMap& normals) {
  std::vector<std::uint8_t> data(normals.size() * 4);
  for (std::size_t p = 0; p < normals.size(); ++p) {
    const bool fg = normals.mask[p];
    for (int ch = 0; ch < 3; ++ch) {
      data[4 * p + ch] = fg ? to_byte(0.5 * (normals.normals[p][ch] + 1.0)) : 0;
    }
    data[4 * p + 3] = fg ? 255 : 0;
  }
  write_bytes(path, normals.width, normals.height, true, data);
}

namespace {

Rgb rgbe_to_rgb(const std::array<std::uint8_t, 4>& e) {
  if (e[3] == 0) return Rgb::Zero();
  const double f = std::ldexp(1.0, static_cast<int>(e[3]) - (128 + 8));
  return Rgb(e[0] * f, e[1] * f, e[2] * f);
}

std::array<std::uint8_t, 4> rgb_to_rgbe(const Rgb& c) {
  if (!c.allFinite() || (c < 0.0).any()) throw NumericError("RGBE needs finite nonnegative radiance");
  const double v = c.maxCoeff();
  if (v < 1e-32) return {0, 0, 0, 0};
  int e = 0;
  const double m = std::frexp(v, &e);
  const double scale = m * 256.0 / v;
  return {static_cast<std::uint8_t>(std::min(c[0] * scale, 255.0)),
          static_cast<std::uint8_t>(std::min(c[1] * scale, 255.0)),
          static_cast<std::uint8_t>(std::min(c[2] * scale, 255.0)), static_cast<std::uint8_t>(e + 128)};
}

int get_byte(std::istream& in, const std::string& what) {
  const int c = in.get();
  if (c == std::char_traits<char>::eof()) throw IoError("truncated HDR " + what);
  return c;
}

void read_scanline(std::istream& in, int width, std::vector<std::array<std::uint8_t, 4>>& line) {
  std::array<int, 4> head{};
  for (int& h : head) h = get_byte(in, "scanline");
  const bool rle = width >= 8 && width < 32768 && head[0] == 2 && head[1] == 2 && (head[2] & 0x80) == 0;
  if (!rle) {
    for (int k = 0; k < 4; ++k) line[0][k] = static_cast<std::uint8_t>(head[k]);
    for (int x = 1; x < width; ++x) {
      for (int k = 0; k < 4; ++k) line[x][k] = static_cast<std::uint8_t>(get_byte(in, "scanline"));
    }
    return;
  }
  if (((head[2] << 8) | head[3]) != width) throw IoError("HDR scanline width mismatch");
  for (int k = 0; k < 4; ++k) {
    int x = 0;
    while (x < width) {
      int count = get_byte(in, "run");
      if (count > 128) {
        count -= 128;
        const int value = get_byte(in, "run");
        if (x + count > width) throw IoError("HDR run overflows scanline");
        for (int r = 0; r < count; ++r) line[x++][k] = static_cast<std::uint8_t>(value);
      } else {
        if (count == 0 || x + count > width) throw IoError("bad HDR literal run");
        for (int r = 0; r < count; ++r) line[x++][k] = static_cast<std::uint8_t>(get_byte(in, "run"));
      }
    }
  }
}

}  // namespace

RadianceImage read_hdr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open HDR " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("#?", 0) != 0) throw IoError("not a Radiance HDR file: " + path.string());
  bool format_ok = true;
  while (std::getline(in, line) && !line.empty()) {
    if (line.rfind("FORMAT=", 0) == 0) format_ok = line == "FORMAT=32-bit_rle_rgbe";
  }
  if (!format_ok) throw IoError("unsupported HDR pixel format in " + path.string());
  if (!std::getline(in, line)) throw IoError("HDR file has no resolution line");
  std::istringstream res(line);
  std::string ya, xa;
  int height = 0, width = 0;
  if (!(res >> ya >> height >> xa >> width) || ya != "-Y" || xa != "+X" || width <= 0 || height <= 0) {
    throw IoError("unsupported HDR resolution line: " + line);
  }
  RadianceImage img(width, height);
  std::vector<std::array<std::uint8_t, 4>> scan(static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    read_scanline(in, width, scan);
    for (int x = 0; x < width; ++x) img.at(x, y) = rgbe_to_rgb(scan[x]);
  }
  return img;
}

void write_hdr(const std::filesystem::path& path, const RadianceImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write HDR " + path.string());
  out << "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y " << image.height << " +X " << image.width << "\n";
  for (const auto& px : image.pixels) {
    const auto e = rgb_to_rgbe(px);
    out.write(reinterpret_cast<const char*>(e.data()), 4);
  }
  if (!out) throw IoError("failed writing HDR " + path.string());
}

}  // namespace relight::io
