#include "relight_tools/ablation.hpp"

#include <limits>
#include <random>

#include "relight/errors.hpp"
#include "relight/lowrank.hpp"
#include "relight/optimize.hpp"
#include "relight/sh_basis.hpp"

namespace relight::tools {

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kLowRank: return "lowrank";
    case LossKind::kSigma2: return "sigma2";
    case LossKind::kSigma2Ratio: return "sigma2_ratio";
  }
  return "unknown";
}

namespace {

constexpr double kShadingFloor = 1e-4;

struct Problem {
  Eigen::MatrixXd basis;    // P x 9, Â_k Y_k per pixel
  Eigen::MatrixXd truth;    // N x 9
  Eigen::MatrixXd images;   // N x P
  Eigen::MatrixXd target;   // N x P reflectance rows
};

Problem make_problem(const AblationConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Eigen::Vector3d> normals;
  for (int y = 0; y < cfg.width; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const double u = (x + 0.5) / cfg.width * 2.0 - 1.0;
      const double v = 1.0 - (y + 0.5) / cfg.width * 2.0;
      if (u * u + v * v < 0.9) normals.emplace_back(u, v, std::sqrt(1.0 - u * u - v * v));
    }
  }
  Problem pr;
  const auto np = static_cast<Eigen::Index>(normals.size());
  pr.basis.resize(np, sh::kNumCoeffs);
  for (Eigen::Index p = 0; p < np; ++p) {
    const auto y = sh::eval_Y_raw(normals[p]);
    for (int k = 0; k < sh::kNumCoeffs; ++k) pr.basis(p, k) = sh::ahat(k) * y[k];
  }
  Eigen::VectorXd albedo(np);
  for (Eigen::Index p = 0; p < np; ++p) albedo(p) = 0.3 + 0.7 * uni(rng);

  pr.truth.resize(cfg.images, sh::kNumCoeffs);
  for (;;) {
    for (int i = 0; i < cfg.images; ++i) {
      pr.truth(i, 0) = 1.0;
      for (int k = 1; k < 4; ++k) pr.truth(i, k) = 1.2 * uni(rng) - 0.6;
      for (int k = 4; k < sh::kNumCoeffs; ++k) pr.truth(i, k) = 0.2 * uni(rng) - 0.1;
    }
    if ((pr.truth * pr.basis.transpose()).minCoeff() > 0.1) break;
  }
  const Eigen::MatrixXd shading = pr.truth * pr.basis.transpose();
  pr.images = cfg.intensity_scale * (shading.array().rowwise() * albedo.transpose().array()).matrix();
  pr.target = cfg.intensity_scale * Eigen::MatrixXd::Ones(cfg.images, 1) * albedo.transpose();
  return pr;
}

lowrank::LossAndGrad<double> loss_of(LossKind kind, const Eigen::MatrixXd& r) {
  switch (kind) {
    case LossKind::kLowRank: return lowrank::lowrank_loss<double>(r);
    case LossKind::kSigma2: return lowrank::sigma2_loss(r);
    case LossKind::kSigma2Ratio: return lowrank::sigma2_ratio_loss(r);
  }
  throw DomainError("unknown loss kind");
}

}  // namespace

AblationRun run_ablation(LossKind kind, double rate, const AblationConfig& cfg) {
  if (!(rate > 0.0)) throw DomainError("learning rate must be positive");
  if (cfg.images < 2 || cfg.width < 4 || cfg.iterations < 1) throw DomainError("bad ablation config");
  const Problem pr = make_problem(cfg);
  const auto n = pr.truth.rows();

  std::mt19937_64 rng(cfg.seed + 1);
  std::normal_distribution<double> gauss;
  std::vector<double> x0(static_cast<std::size_t>(n * sh::kNumCoeffs));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < sh::kNumCoeffs; ++k) {
      x0[i * sh::kNumCoeffs + k] = pr.truth(i, k) * (1.0 + cfg.perturbation * gauss(rng));
    }
  }

  Eigen::MatrixXd last_r;
  bool degenerate_spectrum = false;
  const auto reflectance = [&](std::span<const double> x, Eigen::MatrixXd& shading) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
        x.data(), n, sh::kNumCoeffs);
    shading = c * pr.basis.transpose();
    return Eigen::MatrixXd(pr.images.array() / shading.array().max(kShadingFloor));
  };
  const optimize::Objective f = [&](std::span<const double> x, std::span<double> grad) {
    Eigen::MatrixXd shading;
    const Eigen::MatrixXd r = reflectance(x, shading);
    lowrank::LossAndGrad<double> lg{0.0, {}};
    try {
      lg = loss_of(kind, r);
    } catch (const DegenerateSpectrumError&) {
      degenerate_spectrum = true;
      return std::numeric_limits<double>::quiet_NaN();
    }
    const Eigen::MatrixXd active = (shading.array() > kShadingFloor).cast<double>();
    const Eigen::MatrixXd g_shade =
        (lg.grad.array() * (-pr.images.array() / shading.array().max(kShadingFloor).square()) *
         active.array()).matrix();
    const Eigen::MatrixXd gc = g_shade * pr.basis;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < sh::kNumCoeffs; ++k) grad[i * sh::kNumCoeffs + k] = gc(i, k);
    }
    return lg.loss;
  };

  optimize::DescentOptions opts;
  opts.initial_step = rate;
  opts.grow = 1.0;
  opts.max_iterations = cfg.iterations;
  opts.target = -1.0;
  const auto result = optimize::minimize(f, x0, opts);

  AblationRun run;
  run.kind = kind;
  run.rate = rate;
  run.steps = result.iterations;
  run.initial_loss = result.trajectory.front();
  run.final_loss = result.value;
  Eigen::MatrixXd shading;
  run.norm_ratio = reflectance(result.x, shading).norm() / pr.target.norm();
  run.converged = run.final_loss <= 0.01 * run.initial_loss;
  run.collapsed = run.norm_ratio < 0.01;
  for (std::size_t k = 1; k < result.trajectory.size(); ++k) {
    if (result.trajectory[k] > result.trajectory[k - 1]) run.non_monotone = true;
  }
  run.plateau = !run.converged;
  run.spectrum_degenerate = degenerate_spectrum;
  return run;
}

}  // namespace relight::tools
