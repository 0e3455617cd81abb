#pragma once

#include <array>
#include <vector>

#include "relight/image.hpp"
#include "relight/sh_basis.hpp"

namespace relight {

/// Nine SH intensity coefficients plus an RGB scale: twelve numbers in total.
struct ShLighting {
  sh::BasisVector9 coeffs{};
  std::array<double, 3> color{1.0, 1.0, 1.0};

  [[nodiscard]] static ShLighting dc(double c00, std::array<double, 3> color = {1.0, 1.0, 1.0});
  /// Throws DomainError on negative or non-finite color, NumericError on
  /// non-finite coefficients.
  void validate() const;
};

/// Diffuse albedo per pixel plus scalar Blinn-Phong parameters.
struct Material {
  RadianceImage albedo;
  double spec_reflectance = 0.0;
  double shininess = 1.0;
};

/// Clamping is on by default; tests of linearity switch it off.
struct RenderOptions {
  bool clamp = true;
  double power_floor = 1e-8;
};

/// View direction for both render layers; no camera model.
inline constexpr std::array<double, 3> kViewDirection = {0.0, 0.0, 1.0};

/// S(p) per channel: color[ch] * sum_k Â_k C_k Y_k(n(p)), clamped at zero.
[[nodiscard]] RadianceImage render_shading(const NormalMap& normals, const ShLighting& light,
                                           const RenderOptions& opts = {});

/// I_d = albedo ⊙ S.
[[nodiscard]] RadianceImage render_diffuse(const NormalMap& normals, const Material& material,
                                           const ShLighting& light, const RenderOptions& opts = {});

/// H(p) = color[ch] * s_p * sum_k C_k max(Â_k Yhat_k(n(p)), floor)^alpha, clamped at
/// zero. Throws DomainError when shininess < 1.
[[nodiscard]] RadianceImage render_specular(const NormalMap& normals, const Material& material,
                                            const ShLighting& light,
                                            const RenderOptions& opts = {});

/// I = I_d + H.
[[nodiscard]] RadianceImage render_composite(const NormalMap& normals, const Material& material,
                                             const ShLighting& light,
                                             const RenderOptions& opts = {});

/// Gradients of L = sum_p sum_ch upstream(p, ch) * I(p, ch) for the composite image.
struct RenderGradients {
  sh::BasisVector9 coeffs{};
  std::array<double, 3> color{};
  RadianceImage albedo;
  double spec_reflectance = 0.0;
  double shininess = 0.0;
  std::vector<Eigen::Vector3d> normals;
};

/// Closed-form backward pass of render_composite. Clamped pixels and floored
/// power bases pass no gradient to the quantities inside the clamp; the derivative
/// in alpha uses t^alpha ln t on the floored base. Normal gradients are taken
/// with respect to the raw 3-vector, without renormalization.
[[nodiscard]] RenderGradients render_gradients(const NormalMap& normals, const Material& material,
                                               const ShLighting& light,
                                               const RadianceImage& upstream,
                                               const RenderOptions& opts = {});

}  // namespace relight
