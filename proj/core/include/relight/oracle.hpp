#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "relight/image.hpp"
#include "relight/render.hpp"

namespace relight::oracle {

/// Discrete environment: point lights with a shared quadrature weight.
struct PointLightSet {
  std::vector<Eigen::Vector3d> directions;
  std::vector<Rgb> intensities;
  double solid_angle = 1.0;

  void validate() const;
};

struct McRender {
  RadianceImage diffuse;
  RadianceImage specular;
  RadianceImage total;
};

/// Brute-force point-light Blinn-Phong with view (0,0,1):
///   I_d = albedo * w * sum l (max(L.n, 0))
///   H   = s_p * w * sum l max(h.n, 0)^alpha,   h = (L + v) / |L + v|
/// where w is the set's solid angle. Lights exactly opposite the viewer have no
/// bisector and are skipped in the specular sum. Deterministic summation order.
[[nodiscard]] McRender mc_render(const NormalMap& normals, const Material& material,
                                 const PointLightSet& lights);

/// Jittered equal-area stratification of the sphere. Intensity of each sample is
/// max(sum_k C_k Y_k(L), 0) * color; solid angle is 4 pi / n. Bit-identical output
/// for a given seed.
[[nodiscard]] PointLightSet sample_env_to_lights(const ShLighting& light, int n_samples,
                                                 std::uint64_t seed);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
/// Throws NumericError if f returns a non-finite value, DomainError if h <= 0.
[[nodiscard]] std::vector<double> finite_diff_gradient(const ScalarFunction& f,
                                                       std::span<const double> x, double h);

/// Same, restricted to the listed coordinates; entry i of the result belongs to
/// coords[i].
[[nodiscard]] std::vector<double> finite_diff_gradient(const ScalarFunction& f,
                                                       std::span<const double> x, double h,
                                                       std::span<const std::size_t> coords);

}  // namespace relight::oracle
