#include "relight/render.hpp"

#include <cmath>
#include <string>

#include "relight/errors.hpp"

namespace relight {

ShLighting ShLighting::dc(double c00, std::array<double, 3> color) {
  ShLighting out;
  out.coeffs[0] = c00;
  out.color = color;
  return out;
}

void ShLighting::validate() const {
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw NumericError("lighting coefficient is not finite");
  }
  for (double c : color) {
    if (!std::isfinite(c) || c < 0.0) throw DomainError("lighting color must be finite and >= 0");
  }
}

namespace {

void check_material(const NormalMap& normals, const Material& material, bool needs_specular) {
  require_same_shape(normals, material.albedo, "albedo");
  if (needs_specular) {
    if (!(material.shininess >= 1.0)) {
      throw DomainError("shininess must be >= 1, got " + std::to_string(material.shininess));
    }
    if (!(material.spec_reflectance >= 0.0)) {
      throw DomainError("specular reflectance must be >= 0");
    }
  }
}

double shading_sum(const Eigen::Vector3d& n, const ShLighting& light) {
  const auto y = sh::eval_Y_raw(n);
  double s = 0.0;
  for (int k = 0; k < sh::kNumCoeffs; ++k) s += sh::ahat(k) * light.coeffs[k] * y[k];
  return s;
}

// sum_k C_k max(Â_k Yhat_k, floor)^alpha
double specular_sum(const Eigen::Vector3d& n, const ShLighting& light, double alpha, double floor) {
  const auto yh = sh::eval_Yhat_raw(n);
  double p = 0.0;
  for (int k = 0; k < sh::kNumCoeffs; ++k) {
    const double t = std::max(sh::ahat(k) * yh[k], floor);
    p += light.coeffs[k] * std::pow(t, alpha);
  }
  return p;
}

double clamp_if(double v, const RenderOptions& opts) { return opts.clamp ? std::max(v, 0.0) : v; }

}  // namespace

RadianceImage render_shading(const NormalMap& normals, const ShLighting& light,
                             const RenderOptions& opts) {
  light.validate();
  RadianceImage out(normals.width, normals.height);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normals.mask[i]) continue;
    const double s = shading_sum(normals.normals[i], light);
    for (int ch = 0; ch < 3; ++ch) out[i][ch] = clamp_if(light.color[ch] * s, opts);
  }
  return out;
}

RadianceImage render_diffuse(const NormalMap& normals, const Material& material,
                             const ShLighting& light, const RenderOptions& opts) {
  check_material(normals, material, false);
  RadianceImage out = render_shading(normals, light, opts);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= material.albedo[i];
  return out;
}

RadianceImage render_specular(const NormalMap& normals, const Material& material,
                              const ShLighting& light, const RenderOptions& opts) {
  check_material(normals, material, true);
  light.validate();
  RadianceImage out(normals.width, normals.height);
  if (material.spec_reflectance == 0.0) return out;
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normals.mask[i]) continue;
    const double p =
        material.spec_reflectance *
        specular_sum(normals.normals[i], light, material.shininess, opts.power_floor);
    for (int ch = 0; ch < 3; ++ch) out[i][ch] = clamp_if(light.color[ch] * p, opts);
  }
  return out;
}

RadianceImage render_composite(const NormalMap& normals, const Material& material,
                               const ShLighting& light, const RenderOptions& opts) {
  return render_diffuse(normals, material, light, opts) +
         render_specular(normals, material, light, opts);
}

RenderGradients render_gradients(const NormalMap& normals, const Material& material,
                                 const ShLighting& light, const RadianceImage& upstream,
                                 const RenderOptions& opts) {
  check_material(normals, material, true);
  require_same_shape(normals, upstream, "upstream gradient");
  light.validate();

  RenderGradients g;
  g.albedo = RadianceImage(normals.width, normals.height);
  g.normals.assign(normals.size(), Eigen::Vector3d::Zero());

  const double alpha = material.shininess;
  const double sp = material.spec_reflectance;

  Eigen::Matrix<double, sh::kNumCoeffs, 1> ahat_c;
  for (int k = 0; k < sh::kNumCoeffs; ++k) ahat_c(k) = sh::ahat(k) * light.coeffs[k];

  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normals.mask[i]) continue;
    const Rgb& up = upstream[i];
    if ((up == 0.0).all()) continue;
    const Eigen::Vector3d& n = normals.normals[i];
    const Rgb& albedo = material.albedo[i];

    // Diffuse.
    const auto y = sh::eval_Y_raw(n);
    double s = 0.0;
    for (int k = 0; k < sh::kNumCoeffs; ++k) s += ahat_c(k) * y[k];
    const Eigen::Vector3d ds_dn = sh::jacobian_Y_raw(n).transpose() * ahat_c;

    // Specular.
    const auto yh = sh::eval_Yhat_raw(n);
    const auto jh = sh::jacobian_Yhat_raw(n);
    double p = 0.0;
    double dp_dalpha = 0.0;
    Eigen::Vector3d dp_dn = Eigen::Vector3d::Zero();
    std::array<double, sh::kNumCoeffs> powers{};
    for (int k = 0; k < sh::kNumCoeffs; ++k) {
      const double raw = sh::ahat(k) * yh[k];
      const double t = std::max(raw, opts.power_floor);
      const double tp = std::pow(t, alpha);
      powers[k] = tp;
      p += light.coeffs[k] * tp;
      dp_dalpha += light.coeffs[k] * tp * std::log(t);
      if (raw > opts.power_floor) {
        dp_dn += light.coeffs[k] * alpha * std::pow(t, alpha - 1.0) * sh::ahat(k) *
                 jh.row(k).transpose();
      }
    }

    for (int ch = 0; ch < 3; ++ch) {
      const double u = up[ch];
      if (u == 0.0) continue;
      const double col = light.color[ch];

      const double pre_d = col * s;
      g.albedo[i][ch] = u * clamp_if(pre_d, opts);
      if (!opts.clamp || pre_d > 0.0) {
        const double w = u * albedo[ch];
        g.color[ch] += w * s;
        for (int k = 0; k < sh::kNumCoeffs; ++k) g.coeffs[k] += w * col * sh::ahat(k) * y[k];
        g.normals[i] += w * col * ds_dn;
      }

      // The sign of col * p decides the clamp for every s_p >= 0, including the
      // one-sided derivative at s_p = 0.
      if (!opts.clamp || col * p > 0.0) {
        g.spec_reflectance += u * col * p;
        g.color[ch] += u * sp * p;
        for (int k = 0; k < sh::kNumCoeffs; ++k) g.coeffs[k] += u * col * sp * powers[k];
        g.shininess += u * col * sp * dp_dalpha;
        g.normals[i] += u * col * sp * dp_dn;
      }
    }
  }
  return g;
}

}  // namespace relight
