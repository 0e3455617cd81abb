#pragma once

#include <optional>
#include <vector>

#include "relight/image.hpp"
#include "relight/render.hpp"

namespace relight::fit {

/// N >= 2 pixel-registered images sharing one foreground mask.
struct AlignedBatch {
  std::vector<RadianceImage> images;
  Mask mask;

  [[nodiscard]] std::size_t size() const { return images.size(); }
  /// ShapeError on mismatched sizes, DomainError for N < 2 or non-finite
  /// foreground pixels.
  void validate() const;
};

struct SpecularParams {
  double spec_reflectance = 0.0;
  double shininess = 1.0;
};

struct FitState {
  std::vector<ShLighting> lights;
  RadianceImage albedo;
  NormalMap normals;
  std::optional<SpecularParams> spec;
  /// Final objective value and number of accepted descent steps.
  double objective = 0.0;
  int iterations = 0;
};

inline constexpr double kSaturationLevel = 0.95;

/// True iff the fraction of foreground pixels whose three display-range channels
/// are all >= 0.95 strictly exceeds threshold. DomainError on an empty mask.
[[nodiscard]] bool detect_specular(const RadianceImage& display, const Mask& mask,
                                   double threshold = 0.05);

struct SeparationOptions {
  int max_iterations = 500;
  double initial_step = 1e-2;
  /// Relative decrease below which the refinement counts as converged.
  double relative_tolerance = 1e-10;
};

struct Separation {
  std::vector<RadianceImage> diffuse;
  std::vector<RadianceImage> highlight;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  /// Set when the iteration cap was reached before the refinement settled.
  bool warning = false;
};

/// Splits every I_i into I_i - H_i and an achromatic highlight H_i = h_i (1,1,1)
/// with 0 <= H_i <= I_i. The initial h comes from a dichromatic projection against
/// each pixel's most chromatic observation, or from the above-saturation excess
/// where every observation is achromatic; projected descent then minimizes the low-rank loss of the rg-chromaticity rows of
/// the diffuse images.
[[nodiscard]] Separation separate_specular(const AlignedBatch& batch,
                                           const SeparationOptions& opts = {});

struct DiffuseFitOptions {
  /// Weight of the low-rank term.
  double lambda = 1.0;
  int max_iterations = 2000;
  double initial_step = 1e-3;
  /// Shading values below this are left out of the reflectance ratio.
  double shading_floor = 1e-4;
  double relative_tolerance = 1e-14;
  /// Also fit the per-image RGB color triple (otherwise kept at the initial value).
  bool fit_color = false;
  /// Optional starting lights; defaults to a DC-only light per image.
  std::vector<ShLighting> initial_lights;
};

/// Objective of fit_diffuse at a given set of lights: reconstruction with the
/// per-pixel least-squares albedo plus lambda times the low-rank loss of the
/// reflectance rows I_i / S_i, multiplied by the mean square shading so that
/// the total is invariant to a global light scale.
struct DiffuseObjective {
  double total = 0.0;
  double reconstruction = 0.0;
  double lowrank = 0.0;
};

[[nodiscard]] DiffuseObjective diffuse_objective(const AlignedBatch& batch,
                                                 const NormalMap& normals,
                                                 const std::vector<ShLighting>& lights,
                                                 const DiffuseFitOptions& opts = {});

/// Gradient descent over the per-image lights. The returned albedo is the leading
/// singular row of the reflectance matrix, scaled so its largest foreground
/// channel value is 1; the lights absorb the matching per-image factors so that
/// albedo ⊙ S(light_i) reproduces the rank-one reconstruction of image i.
[[nodiscard]] FitState fit_diffuse(const AlignedBatch& batch, const NormalMap& normals,
                                   const DiffuseFitOptions& opts = {});

struct SpecularFitOptions {
  int max_iterations = 300;
};

/// Least-squares fit of render_specular to a highlight image with alpha = 1 + e^a.
/// For a fixed alpha the best s_p is closed form, so descent runs over a alone.
/// An all-zero highlight gives s_p = 0, alpha = 1.
[[nodiscard]] SpecularParams fit_specular_params(const RadianceImage& highlight,
                                                 const NormalMap& normals,
                                                 const ShLighting& light,
                                                 const SpecularFitOptions& opts = {});

/// render_composite of the fitted state under a new light, optionally with other
/// specular parameters.
[[nodiscard]] RadianceImage relight(const FitState& state, const ShLighting& new_light,
                                    const std::optional<SpecularParams>& material_override = {});

}  // namespace relight::fit
