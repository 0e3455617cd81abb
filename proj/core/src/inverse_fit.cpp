#include "relight/inverse_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "relight/envlight.hpp"
#include "relight/errors.hpp"
#include "relight/lowrank.hpp"
#include "relight/optimize.hpp"

namespace relight::fit {

void AlignedBatch::validate() const {
  if (images.size() < 2) throw DomainError("need at least 2 aligned images");
  for (const auto& img : images) {
    require_same_shape(mask, img, "aligned image");
    for (std::size_t p = 0; p < img.size(); ++p) {
      if (mask[p] && !img[p].allFinite()) throw DomainError("aligned image has non-finite pixels");
    }
  }
}

bool detect_specular(const RadianceImage& display, const Mask& mask, double threshold) {
  require_same_shape(mask, display, "image");
  std::size_t fg = 0;
  std::size_t saturated = 0;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask[p]) continue;
    ++fg;
    if ((display[p] >= kSaturationLevel).all()) ++saturated;
  }
  if (fg == 0) throw DomainError("detect_specular on an empty mask");
  return static_cast<double>(saturated) > threshold * static_cast<double>(fg);
}

namespace {

std::vector<std::size_t> foreground_indices(const Mask& mask) {
  std::vector<std::size_t> out;
  out.reserve(mask.count());
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (mask[p]) out.push_back(p);
  }
  return out;
}

double saturation(const Rgb& c) {
  const double sum = c.sum();
  if (sum < lowrank::kChromaFloor) return 0.0;
  return 1.0 - 3.0 * c.minCoeff() / sum;
}

// Achromatic diffuse colors leave the dichromatic projection undetermined.
constexpr double kMinChromaticSaturation = 0.02;

// h of the least-squares fit I = s kappa + h (1,1,1) with s, h >= 0.
double dichromatic_highlight(const Rgb& obs, const Rgb& kappa) {
  const double kk = kappa.square().sum();
  const double k1 = kappa.sum();
  const double det = 3.0 * kk - k1 * k1;
  if (det <= 1e-12 * kk) return 0.0;
  const double ik = (obs * kappa).sum();
  const double i1 = obs.sum();
  double s = (3.0 * ik - k1 * i1) / det;
  double h = (kk * i1 - k1 * ik) / det;
  if (s < 0.0) {
    s = 0.0;
    h = i1 / 3.0;
  }
  if (h < 0.0) h = 0.0;
  return h;
}

}  // namespace

Separation separate_specular(const AlignedBatch& batch, const SeparationOptions& opts) {
  batch.validate();
  const auto fg = foreground_indices(batch.mask);
  const std::size_t n = batch.size();
  const std::size_t np = fg.size();
  if (np == 0) throw DomainError("separate_specular on an empty mask");
  const double saturated_linear = envlight::gamma_decode(kSaturationLevel);

  // Layout of the unknowns: image-major, one h per foreground pixel.
  std::vector<double> h0(n * np, 0.0);
  std::vector<double> upper(n * np, 0.0);
  for (std::size_t q = 0; q < np; ++q) {
    const std::size_t p = fg[q];
    std::size_t best = 0;
    double best_sat = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = saturation(batch.images[i][p]);
      if (s > best_sat) {
        best_sat = s;
        best = i;
      }
    }
    const Rgb kappa = batch.images[best][p];
    for (std::size_t i = 0; i < n; ++i) {
      const Rgb& obs = batch.images[i][p];
      const double cap = std::max(obs.minCoeff(), 0.0);
      // Without a chromatic reference only the above-saturation excess is known.
      const double h = best_sat >= kMinChromaticSaturation ? dichromatic_highlight(obs, kappa)
                                                           : obs.minCoeff() - saturated_linear;
      upper[i * np + q] = cap;
      h0[i * np + q] = std::clamp(h, 0.0, cap);
    }
  }

  const auto objective = [&](std::span<const double> x, std::span<double> grad) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 * np));
    // d(r, g)/dh per entry, zero where the chromaticity is floored.
    Eigen::MatrixXd dr(rows.rows(), rows.cols());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < np; ++q) {
        const Rgb d = batch.images[i][fg[q]] - x[i * np + q];
        const double sum = d.sum();
        const auto col = static_cast<Eigen::Index>(2 * q);
        const auto row = static_cast<Eigen::Index>(i);
        if (sum < lowrank::kChromaFloor) {
          rows(row, col) = rows(row, col + 1) = 1.0 / 3.0;
          dr(row, col) = dr(row, col + 1) = 0.0;
        } else {
          rows(row, col) = d[0] / sum;
          rows(row, col + 1) = d[1] / sum;
          dr(row, col) = (3.0 * d[0] - sum) / (sum * sum);
          dr(row, col + 1) = (3.0 * d[1] - sum) / (sum * sum);
        }
      }
    }
    const auto lg = lowrank::lowrank_loss<double>(rows);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < np; ++q) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto col = static_cast<Eigen::Index>(2 * q);
        grad[i * np + q] = lg.grad(row, col) * dr(row, col) + lg.grad(row, col + 1) * dr(row, col + 1);
      }
    }
    return lg.loss;
  };
  const auto project = [&](std::span<double> x) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], 0.0, upper[k]);
  };

  optimize::DescentOptions dopts;
  dopts.initial_step = opts.initial_step;
  dopts.max_iterations = opts.max_iterations;
  dopts.relative_tolerance = opts.relative_tolerance;
  const auto result = optimize::minimize(objective, h0, dopts, project);

  Separation out;
  out.initial_loss = result.trajectory.front();
  out.final_loss = result.value;
  out.warning = result.reason == optimize::StopReason::kMaxIterations;
  for (std::size_t i = 0; i < n; ++i) {
    RadianceImage highlight(batch.mask.width, batch.mask.height);
    for (std::size_t q = 0; q < np; ++q) highlight[fg[q]] = Rgb::Constant(result.x[i * np + q]);
    out.diffuse.push_back(batch.images[i] - highlight);
    out.highlight.push_back(std::move(highlight));
  }
  return out;
}

namespace {

// Per-image lights flattened as 9 coefficients, then 3 colors when fitted.
class DiffuseProblem {
 public:
  DiffuseProblem(const AlignedBatch& batch, const NormalMap& normals, const DiffuseFitOptions& opts,
                 std::vector<ShLighting> lights)
      : batch_(batch), opts_(opts), lights_(std::move(lights)), fg_(foreground_indices(batch.mask)) {
    basis_.resize(static_cast<Eigen::Index>(fg_.size()), sh::kNumCoeffs);
    for (std::size_t q = 0; q < fg_.size(); ++q) {
      const auto y = sh::eval_Y_raw(normals.normals[fg_[q]]);
      for (int k = 0; k < sh::kNumCoeffs; ++k) {
        basis_(static_cast<Eigen::Index>(q), k) = sh::ahat(k) * y[k];
      }
    }
  }

  [[nodiscard]] std::size_t stride() const { return opts_.fit_color ? 12 : 9; }
  [[nodiscard]] std::size_t num_params() const { return stride() * lights_.size(); }

  [[nodiscard]] std::vector<double> pack() const {
    std::vector<double> x(num_params());
    for (std::size_t i = 0; i < lights_.size(); ++i) {
      for (int k = 0; k < sh::kNumCoeffs; ++k) x[i * stride() + k] = lights_[i].coeffs[k];
      if (opts_.fit_color) {
        for (int ch = 0; ch < 3; ++ch) x[i * stride() + 9 + ch] = lights_[i].color[ch];
      }
    }
    return x;
  }

  [[nodiscard]] std::vector<ShLighting> unpack(std::span<const double> x) const {
    auto out = lights_;
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (int k = 0; k < sh::kNumCoeffs; ++k) out[i].coeffs[k] = x[i * stride() + k];
      if (opts_.fit_color) {
        for (int ch = 0; ch < 3; ++ch) out[i].color[ch] = x[i * stride() + 9 + ch];
      }
    }
    return out;
  }

  // Shading per image as P x 3.
  [[nodiscard]] std::vector<Eigen::ArrayX3d> shading(const std::vector<ShLighting>& lights,
                                                     std::vector<Eigen::VectorXd>* scalar) const {
    std::vector<Eigen::ArrayX3d> out;
    for (const auto& light : lights) {
      Eigen::Map<const Eigen::Matrix<double, sh::kNumCoeffs, 1>> c(light.coeffs.data());
      Eigen::VectorXd s = basis_ * c;
      Eigen::ArrayX3d sc(s.size(), 3);
      for (int ch = 0; ch < 3; ++ch) sc.col(ch) = s.array() * light.color[ch];
      out.push_back(std::move(sc));
      if (scalar) scalar->push_back(std::move(s));
    }
    return out;
  }

  [[nodiscard]] Eigen::ArrayX3d observed(std::size_t i) const {
    Eigen::ArrayX3d out(static_cast<Eigen::Index>(fg_.size()), 3);
    for (std::size_t q = 0; q < fg_.size(); ++q) {
      out.row(static_cast<Eigen::Index>(q)) = batch_.images[i][fg_[q]].transpose();
    }
    return out;
  }

  [[nodiscard]] Eigen::MatrixXd reflectance(const std::vector<Eigen::ArrayX3d>& shade) const {
    const auto np = static_cast<Eigen::Index>(fg_.size());
    Eigen::MatrixXd r(static_cast<Eigen::Index>(shade.size()), 3 * np);
    for (std::size_t i = 0; i < shade.size(); ++i) {
      const auto& obs = observed_[i];
      for (Eigen::Index q = 0; q < np; ++q) {
        for (int ch = 0; ch < 3; ++ch) {
          r(static_cast<Eigen::Index>(i), 3 * q + ch) =
              obs(q, ch) / std::max(shade[i](q, ch), opts_.shading_floor);
        }
      }
    }
    return r;
  }

  void cache_observations() {
    observed_.clear();
    for (std::size_t i = 0; i < batch_.size(); ++i) observed_.push_back(observed(i));
  }

  DiffuseObjective evaluate(std::span<const double> x, std::span<double> grad) const {
    const auto lights = unpack(x);
    std::vector<Eigen::VectorXd> scalar;
    const auto shade = shading(lights, &scalar);
    const std::size_t n = lights.size();
    const auto np = static_cast<Eigen::Index>(fg_.size());

    Eigen::ArrayX3d num = Eigen::ArrayX3d::Zero(np, 3);
    Eigen::ArrayX3d den = Eigen::ArrayX3d::Zero(np, 3);
    for (std::size_t i = 0; i < n; ++i) {
      num += shade[i] * observed_[i];
      den += shade[i].square();
    }
    const Eigen::ArrayX3d albedo = (den > 1e-12).select(num / den.max(1e-12), 0.0);

    DiffuseObjective obj;
    std::vector<Eigen::ArrayX3d> g_shade(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::ArrayX3d res = albedo * shade[i] - observed_[i];
      obj.reconstruction += res.square().sum();
      // Albedo sits at its per-pixel optimum, so it contributes no extra term.
      g_shade[i] = 2.0 * res * albedo;
    }

    // Scaling by the mean square shading makes the term invariant to a global light
    // scale, as the reconstruction term already is. Normalizing by |R| instead
    // rewards a single exploding ratio, which the rank-one fit then absorbs.
    const Eigen::MatrixXd r = reflectance(shade);
    const auto lg = lowrank::lowrank_loss<double>(r);
    double mean_sq = 0.0;
    for (const auto& s : shade) mean_sq += s.square().sum();
    const double count = static_cast<double>(r.size());
    mean_sq /= count;
    if (!(mean_sq > 0.0)) throw NumericError("shading is zero everywhere");
    obj.lowrank = lg.loss * mean_sq;
    obj.total = obj.reconstruction + opts_.lambda * obj.lowrank;
    const Eigen::MatrixXd g_r = mean_sq * lg.grad;
    for (std::size_t i = 0; i < n; ++i) g_shade[i] += opts_.lambda * (2.0 * lg.loss / count) * shade[i];

    if (!grad.empty()) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index q = 0; q < np; ++q) {
          for (int ch = 0; ch < 3; ++ch) {
            const double s = shade[i](q, ch);
            if (s > opts_.shading_floor) {
              g_shade[i](q, ch) += opts_.lambda * g_r(static_cast<Eigen::Index>(i), 3 * q + ch) *
                                   (-observed_[i](q, ch) / (s * s));
            }
          }
        }
        // dS/dC_k = color * B_k and dS/dcolor = scalar shading.
        Eigen::VectorXd per_pixel = Eigen::VectorXd::Zero(np);
        for (int ch = 0; ch < 3; ++ch) per_pixel += g_shade[i].col(ch).matrix() * lights[i].color[ch];
        const Eigen::VectorXd gc = basis_.transpose() * per_pixel;
        for (int k = 0; k < sh::kNumCoeffs; ++k) grad[i * stride() + k] = gc(k);
        if (opts_.fit_color) {
          for (int ch = 0; ch < 3; ++ch) {
            grad[i * stride() + 9 + ch] = g_shade[i].col(ch).matrix().dot(scalar[i]);
          }
        }
      }
    }
    return obj;
  }

  [[nodiscard]] const std::vector<std::size_t>& foreground() const { return fg_; }

 private:
  const AlignedBatch& batch_;
  const DiffuseFitOptions& opts_;
  std::vector<ShLighting> lights_;
  std::vector<std::size_t> fg_;
  Eigen::MatrixXd basis_;
  std::vector<Eigen::ArrayX3d> observed_;
};

std::vector<ShLighting> starting_lights(const AlignedBatch& batch, const DiffuseFitOptions& opts) {
  if (opts.initial_lights.empty()) return std::vector<ShLighting>(batch.size(), ShLighting::dc(1.0));
  if (opts.initial_lights.size() != batch.size()) {
    throw ShapeError("initial_lights has " + std::to_string(opts.initial_lights.size()) +
                     " entries for " + std::to_string(batch.size()) + " images");
  }
  for (const auto& l : opts.initial_lights) l.validate();
  return opts.initial_lights;
}

void check_fit_inputs(const AlignedBatch& batch, const NormalMap& normals,
                      const DiffuseFitOptions& opts) {
  batch.validate();
  normals.validate();
  if (!normals.mask.same_shape(batch.mask.width, batch.mask.height)) {
    throw ShapeError("normal map and batch differ in size");
  }
  for (std::size_t p = 0; p < batch.mask.size(); ++p) {
    if (batch.mask[p] && !normals.mask[p]) {
      throw DomainError("batch foreground extends outside the normal map mask");
    }
  }
  if (batch.mask.count() == 0) throw DomainError("fit on an empty mask");
  if (!(opts.lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (!(opts.shading_floor > 0.0)) throw DomainError("shading floor must be positive");
}

}  // namespace

DiffuseObjective diffuse_objective(const AlignedBatch& batch, const NormalMap& normals,
                                   const std::vector<ShLighting>& lights,
                                   const DiffuseFitOptions& opts) {
  check_fit_inputs(batch, normals, opts);
  if (lights.size() != batch.size()) throw ShapeError("one light per image is required");
  for (const auto& l : lights) l.validate();
  DiffuseProblem problem(batch, normals, opts, lights);
  problem.cache_observations();
  const auto x = problem.pack();
  return problem.evaluate(x, {});
}

FitState fit_diffuse(const AlignedBatch& batch, const NormalMap& normals,
                     const DiffuseFitOptions& opts) {
  check_fit_inputs(batch, normals, opts);
  DiffuseProblem problem(batch, normals, opts, starting_lights(batch, opts));
  problem.cache_observations();

  optimize::DescentOptions dopts;
  dopts.initial_step = opts.initial_step;
  dopts.max_iterations = opts.max_iterations;
  dopts.relative_tolerance = opts.relative_tolerance;
  const auto result = optimize::minimize(
      [&](std::span<const double> x, std::span<double> g) { return problem.evaluate(x, g).total; },
      problem.pack(), dopts);

  FitState state;
  state.lights = problem.unpack(result.x);
  state.normals = normals;
  state.objective = result.value;
  state.iterations = result.iterations;

  const auto shade = problem.shading(state.lights, nullptr);
  const auto rank_one = lowrank::rank_one_approx<double>(problem.reflectance(shade));
  const Eigen::VectorXd& c = rank_one.factors.c;
  const double peak = c.maxCoeff();
  if (!(peak > 0.0)) throw NumericError("leading reflectance direction has no positive entry");

  const auto& fg = problem.foreground();
  state.albedo = RadianceImage(batch.mask.width, batch.mask.height);
  for (std::size_t q = 0; q < fg.size(); ++q) {
    for (int ch = 0; ch < 3; ++ch) {
      state.albedo[fg[q]][ch] = std::max(c(static_cast<Eigen::Index>(3 * q + ch)) / peak, 0.0);
    }
  }
  for (std::size_t i = 0; i < state.lights.size(); ++i) {
    const double factor = rank_one.factors.b(static_cast<Eigen::Index>(i)) * peak;
    for (double& coeff : state.lights[i].coeffs) coeff *= factor;
  }
  return state;
}

namespace {

struct SpecularSetup {
  // Per foreground pixel: floored lobe bases and their logs.
  std::vector<std::array<double, sh::kNumCoeffs>> bases;
  std::vector<std::array<double, sh::kNumCoeffs>> logs;
  std::vector<Rgb> target;
};

}  // namespace

SpecularParams fit_specular_params(const RadianceImage& highlight, const NormalMap& normals,
                                   const ShLighting& light, const SpecularFitOptions& opts) {
  normals.validate();
  require_same_shape(normals, highlight, "highlight");
  light.validate();
  const RenderOptions ropts;

  SpecularSetup setup;
  double target_norm = 0.0;
  for (std::size_t p = 0; p < normals.size(); ++p) {
    if (!normals.mask[p]) continue;
    if ((highlight[p] < 0.0).any() || !highlight[p].allFinite()) {
      throw DomainError("highlight must be finite and nonnegative");
    }
    const auto yh = sh::eval_Yhat_raw(normals.normals[p]);
    std::array<double, sh::kNumCoeffs> t{};
    std::array<double, sh::kNumCoeffs> lt{};
    for (int k = 0; k < sh::kNumCoeffs; ++k) {
      t[k] = std::max(sh::ahat(k) * yh[k], ropts.power_floor);
      lt[k] = std::log(t[k]);
    }
    setup.bases.push_back(t);
    setup.logs.push_back(lt);
    setup.target.push_back(highlight[p]);
    target_norm += highlight[p].square().sum();
  }
  if (target_norm == 0.0) return {0.0, 1.0};

  // Unit-reflectance render P(alpha), its alpha derivative, and the optimal s_p.
  struct Eval {
    double value;
    double sp;
    double dalpha;
  };
  const auto evaluate = [&](double alpha, bool want_grad) {
    double pp = 0.0, ph = 0.0, pdp = 0.0, hdp = 0.0;
    for (std::size_t q = 0; q < setup.bases.size(); ++q) {
      double p = 0.0, dp = 0.0;
      for (int k = 0; k < sh::kNumCoeffs; ++k) {
        const double tp = std::exp(alpha * setup.logs[q][k]);
        p += light.coeffs[k] * tp;
        if (want_grad) dp += light.coeffs[k] * tp * setup.logs[q][k];
      }
      for (int ch = 0; ch < 3; ++ch) {
        if (light.color[ch] * p <= 0.0) continue;
        const double v = light.color[ch] * p;
        const double dv = light.color[ch] * dp;
        pp += v * v;
        ph += v * setup.target[q][ch];
        pdp += v * dv;
        hdp += setup.target[q][ch] * dv;
      }
    }
    Eval e{target_norm, 0.0, 0.0};
    if (pp <= 0.0 || ph <= 0.0) return e;
    e.sp = ph / pp;
    e.value = target_norm - ph * ph / pp;
    // Envelope: d/dalpha |s P - H|^2 at the optimal s.
    e.dalpha = 2.0 * e.sp * (e.sp * pdp - hdp);
    return e;
  };

  double best_alpha = 1.0 + std::exp(-6.0);
  double best_value = std::numeric_limits<double>::infinity();
  for (double alpha : {1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0,
                       96.0, 128.0, 192.0, 256.0}) {
    const double v = evaluate(alpha, false).value;
    if (v < best_value) {
      best_value = v;
      best_alpha = alpha;
    }
  }

  optimize::DescentOptions dopts;
  dopts.initial_step = 1e-2;
  dopts.max_iterations = opts.max_iterations;
  dopts.relative_tolerance = 1e-15;
  const auto result = optimize::minimize(
      [&](std::span<const double> x, std::span<double> g) {
        const double ea = std::exp(x[0]);
        const auto e = evaluate(1.0 + ea, true);
        g[0] = e.dalpha * ea / target_norm;
        return e.value / target_norm;
      },
      {std::log(best_alpha - 1.0)}, dopts);

  const double alpha = 1.0 + std::exp(result.x[0]);
  const auto e = evaluate(alpha, false);
  if (e.sp <= 0.0) return {0.0, 1.0};
  return {e.sp, alpha};
}

RadianceImage relight(const FitState& state, const ShLighting& new_light,
                      const std::optional<SpecularParams>& material_override) {
  Material material;
  material.albedo = state.albedo;
  const auto spec = material_override ? material_override : state.spec;
  if (spec) {
    material.spec_reflectance = spec->spec_reflectance;
    material.shininess = spec->shininess;
  }
  return render_composite(state.normals, material, new_light);
}

}  // namespace relight::fit
