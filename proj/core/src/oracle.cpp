#include "relight/oracle.hpp"

#include <cmath>
#include <random>

#include "relight/errors.hpp"

namespace relight::oracle {

void PointLightSet::validate() const {
  if (directions.empty()) throw DomainError("point light set is empty");
  if (directions.size() != intensities.size()) {
    throw ShapeError("point light directions and intensities differ in length");
  }
  if (!(solid_angle >= 0.0)) throw DomainError("solid angle must be >= 0");
  for (const auto& d : directions) {
    if (std::abs(d.squaredNorm() - 1.0) > 1e-6) throw DomainError("light direction is not unit");
  }
  for (const auto& l : intensities) {
    if (!(l >= 0.0).all()) throw DomainError("light intensity must be >= 0");
  }
}

McRender mc_render(const NormalMap& normals, const Material& material,
                   const PointLightSet& lights) {
  lights.validate();
  require_same_shape(normals, material.albedo, "albedo");

  const Eigen::Vector3d view(kViewDirection[0], kViewDirection[1], kViewDirection[2]);
  const bool with_specular = material.spec_reflectance != 0.0;

  // Bisectors do not depend on the pixel.
  std::vector<Eigen::Vector3d> half(lights.directions.size());
  std::vector<bool> has_half(lights.directions.size());
  for (std::size_t j = 0; j < lights.directions.size(); ++j) {
    const Eigen::Vector3d h = lights.directions[j] + view;
    const double len = h.norm();
    has_half[j] = len > 1e-12;
    half[j] = has_half[j] ? Eigen::Vector3d(h / len) : Eigen::Vector3d::Zero();
  }

  McRender out;
  out.diffuse = RadianceImage(normals.width, normals.height);
  out.specular = RadianceImage(normals.width, normals.height);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normals.mask[i]) continue;
    const Eigen::Vector3d& n = normals.normals[i];
    Rgb diffuse = Rgb::Zero();
    Rgb specular = Rgb::Zero();
    for (std::size_t j = 0; j < lights.directions.size(); ++j) {
      const Rgb& l = lights.intensities[j];
      const double cos_term = lights.directions[j].dot(n);
      if (cos_term > 0.0) diffuse += l * cos_term;
      if (with_specular && has_half[j]) {
        const double h_term = half[j].dot(n);
        if (h_term > 0.0) specular += l * std::pow(h_term, material.shininess);
      }
    }
    out.diffuse[i] = material.albedo[i] * diffuse * lights.solid_angle;
    out.specular[i] = specular * (material.spec_reflectance * lights.solid_angle);
  }
  out.total = out.diffuse + out.specular;
  return out;
}

namespace {

// 53 random mantissa bits; fixed across standard library implementations.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PointLightSet sample_env_to_lights(const ShLighting& light, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw DomainError("need at least one sample");
  light.validate();
  std::mt19937_64 rng(seed);

  PointLightSet set;
  set.solid_angle = 4.0 * sh::kPi / n_samples;
  set.directions.reserve(n_samples);
  set.intensities.reserve(n_samples);

  // Rows are z-bands whose heights are proportional to their cell counts, so every
  // cell covers 4 pi / n steradians.
  const int rows = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_samples)))));
  const int base = n_samples / rows;
  const int extra = n_samples % rows;
  const Rgb color(light.color[0], light.color[1], light.color[2]);
  int start = 0;
  for (int r = 0; r < rows; ++r) {
    const int cols = base + (r < extra ? 1 : 0);
    const double z_top = 1.0 - 2.0 * start / n_samples;
    const double z_bottom = 1.0 - 2.0 * (start + cols) / n_samples;
    for (int c = 0; c < cols; ++c) {
      const double z = z_top - (z_top - z_bottom) * unit_uniform(rng);
      const double phi = 2.0 * sh::kPi * (c + unit_uniform(rng)) / cols;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      Eigen::Vector3d d(rho * std::cos(phi), rho * std::sin(phi), z);
      d.normalize();
      const auto y = sh::eval_Y_raw(d);
      double radiance = 0.0;
      for (int k = 0; k < sh::kNumCoeffs; ++k) radiance += light.coeffs[k] * y[k];
      set.directions.push_back(d);
      set.intensities.push_back(std::max(radiance, 0.0) * color);
    }
    start += cols;
  }
  return set;
}

std::vector<double> finite_diff_gradient(const ScalarFunction& f, std::span<const double> x,
                                         double h, std::span<const std::size_t> coords) {
  if (!(h > 0.0)) throw DomainError("finite difference step must be > 0");
  std::vector<double> work(x.begin(), x.end());
  std::vector<double> grad;
  grad.reserve(coords.size());
  for (std::size_t i : coords) {
    if (i >= work.size()) throw ShapeError("finite difference coordinate out of range");
    const double saved = work[i];
    work[i] = saved + h;
    const double fp = f(work);
    work[i] = saved - h;
    const double fm = f(work);
    work[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("objective is not finite at coordinate " + std::to_string(i));
    }
    grad.push_back((fp - fm) / (2.0 * h));
  }
  return grad;
}

std::vector<double> finite_diff_gradient(const ScalarFunction& f, std::span<const double> x,
                                         double h) {
  std::vector<std::size_t> all(x.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return finite_diff_gradient(f, x, h, all);
}

}  // namespace relight::oracle
