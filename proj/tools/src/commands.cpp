#include "relight_tools/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "relight/envlight.hpp"
#include "relight/errors.hpp"
#include "relight/high_precision.hpp"
#include "relight/image_io.hpp"
#include "relight/inverse_fit.hpp"
#include "relight/lowrank.hpp"
#include "relight/serialize.hpp"
#include "relight_tools/ablation.hpp"

namespace relight::tools {

namespace {

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw IoError("no such file: " + p.string());
}

void require_finite(const RadianceImage& img) {
  for (const auto& px : img.pixels) {
    if (!px.allFinite()) throw NumericError("output image has non-finite pixels");
  }
}

std::ofstream open_csv(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

void cmd_shproject(const fs::path& pano, const fs::path& out) {
  require_file(pano);
  envlight::Panorama p{io::read_hdr(pano)};
  io::write_lighting(out, envlight::project_to_sh(p));
}

void cmd_render(const RenderArgs& args) {
  for (const auto* p : {&args.normals, &args.albedo, &args.light}) require_file(*p);
  const NormalMap normals = io::read_normals_png(args.normals);
  normals.validate();
  Material material;
  material.albedo = envlight::gamma_decode(io::read_png(args.albedo));
  material.spec_reflectance = args.spec_reflectance;
  material.shininess = args.shininess;
  const ShLighting light = io::read_lighting(args.light);
  const RadianceImage img = render_composite(normals, material, light);
  require_finite(img);
  io::write_png(args.out, envlight::gamma_encode(img), &normals.mask);
}

std::string cmd_fit(const FitArgs& args) {
  if (!fs::is_directory(args.images_dir)) throw IoError("no such directory: " + args.images_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(args.images_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 2) throw DomainError("need at least 2 aligned images");
  require_file(args.mask);
  require_file(args.normals);

  const NormalMap normals = io::read_normals_png(args.normals);
  normals.validate();
  fit::AlignedBatch batch;
  batch.mask = io::read_mask_png(args.mask);
  if (!batch.mask.same_shape(normals.width, normals.height)) {
    throw ShapeError("mask and normal map differ in size");
  }
  for (std::size_t p = 0; p < batch.mask.size(); ++p) {
    if (!normals.mask[p]) batch.mask.values[p] = 0;
  }
  std::vector<RadianceImage> display;
  for (const auto& f : files) {
    display.push_back(io::read_png(f));
    batch.images.push_back(envlight::gamma_decode(display.back()));
  }
  batch.validate();

  std::size_t specular_votes = 0;
  for (const auto& d : display) specular_votes += fit::detect_specular(d, batch.mask, args.spec_threshold);
  const bool specular = 2 * specular_votes > display.size();

  fit::DiffuseFitOptions opts;
  opts.lambda = args.lambda;
  opts.max_iterations = args.iterations;
  std::optional<fit::Separation> sep;
  fit::AlignedBatch diffuse = batch;
  if (specular) {
    sep = fit::separate_specular(batch);
    diffuse.images = sep->diffuse;
  }
  fit::FitState state = fit::fit_diffuse(diffuse, normals, opts);
  std::ostringstream summary;
  summary << "fitted " << batch.size() << " images, objective " << state.objective << ", "
          << state.iterations << " steps";
  if (sep) {
    // Fit on the image with the most highlight energy.
    std::size_t best = 0;
    double energy = -1.0;
    for (std::size_t i = 0; i < sep->highlight.size(); ++i) {
      double e = 0.0;
      for (const auto& px : sep->highlight[i].pixels) e += px.sum();
      if (e > energy) {
        energy = e;
        best = i;
      }
    }
    state.spec = fit::fit_specular_params(sep->highlight[best], state.normals, state.lights[best]);
    summary << ", specular s_p " << state.spec->spec_reflectance << " alpha " << state.spec->shininess;
    if (sep->warning) summary << " (separation hit its iteration cap)";
  }
  io::write_fit_state(args.out, state);
  return summary.str();
}

void cmd_relight(const RelightArgs& args) {
  require_file(args.state);
  require_file(args.light);
  const fit::FitState state = io::read_fit_state(args.state);
  const ShLighting light = io::read_lighting(args.light);
  std::optional<fit::SpecularParams> override_params;
  if (args.spec_reflectance || args.shininess) {
    fit::SpecularParams sp = state.spec.value_or(fit::SpecularParams{});
    if (args.spec_reflectance) sp.spec_reflectance = *args.spec_reflectance;
    if (args.shininess) sp.shininess = *args.shininess;
    override_params = sp;
  }
  const RadianceImage img = fit::relight(state, light, override_params);
  require_finite(img);
  io::write_png(args.out, envlight::gamma_encode(img), &state.normals.mask);
}

void parse_shape(const std::string& text, int& rows, int& cols) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw DomainError("shape must look like NxD, got " + text);
  try {
    std::size_t used = 0;
    rows = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    cols = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
  } catch (const std::logic_error&) {
    throw DomainError("shape must look like NxD, got " + text);
  }
  if (rows < 2 || cols < rows) throw DomainError("shape needs N >= 2 and D >= N");
}

ConvergenceReport cmd_convergence(const ConvergenceArgs& args) {
  if (args.steps < 0) throw DomainError("steps must be >= 0");
  if (!std::isfinite(args.eta)) throw DomainError("eta must be finite");
  if (args.rows < 2 || args.cols < args.rows) throw DomainError("shape needs N >= 2 and D >= N");
  using HP = HighPrecision;
  std::mt19937_64 rng(args.seed);
  std::normal_distribution<double> gauss;
  lowrank::Matrix<HP> r(args.rows, args.cols);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) r(i, j) = HP(gauss(rng));
  }

  ConvergenceReport report;
  report.outside_guarantee = !(args.eta > 0.0 && args.eta < 0.5);
  const HP factor = HP(1) - HP(2) * HP(args.eta);
  auto csv = open_csv(args.out);
  csv << "step,loss,predicted_loss,rel_err,sigma1,sigma2\n";
  HP loss0 = 0;
  HP previous = 0;
  for (int n = 0; n <= args.steps; ++n) {
    const auto r1 = lowrank::rank_one_approx(r);
    const lowrank::Matrix<HP> diff = r1.approx - r;
    const HP loss = diff.squaredNorm();
    if (n == 0) loss0 = loss;
    using boost::multiprecision::pow;
    const HP predicted = loss0 * pow(factor, 2 * n);
    const HP rel = predicted > 0 ? HP(abs(loss - predicted) / predicted) : HP(abs(loss));
    report.max_rel_err = std::max(report.max_rel_err, rel.convert_to<double>());
    csv << n << ',' << loss.convert_to<double>() << ',' << predicted.convert_to<double>() << ','
        << rel.convert_to<double>() << ',' << r1.factors.sigma(0).convert_to<double>() << ','
        << r1.factors.sigma(1).convert_to<double>() << '\n';
    if (n > 0 && loss > previous) report.diverging = true;
    previous = loss;
    if (n == args.steps) break;
    r += HP(2) * HP(args.eta) * diff;
  }
  // A negative contraction factor flips the residual every step.
  report.oscillating = factor < 0;
  report.diverging = report.diverging || abs(factor) >= 1;
  if (!csv) throw IoError("failed writing " + args.out.string());
  return report;
}

void cmd_compare_losses(const CompareLossesArgs& args) {
  if (args.rates.empty()) throw DomainError("at least one learning rate is required");
  AblationConfig cfg;
  cfg.iterations = args.iterations;
  cfg.seed = args.seed;
  std::vector<AblationRun> runs;
  for (LossKind kind : {LossKind::kLowRank, LossKind::kSigma2, LossKind::kSigma2Ratio}) {
    for (double rate : args.rates) runs.push_back(run_ablation(kind, rate, cfg));
  }
  auto csv = open_csv(args.out);
  csv << "loss,lr,steps,initial_loss,final_loss,norm_ratio,converged,collapsed,non_monotone,plateau,"
         "degenerate\n";
  for (const auto& r : runs) {
    const bool degenerate = r.collapsed || r.non_monotone || r.plateau || r.spectrum_degenerate;
    csv << loss_name(r.kind) << ',' << r.rate << ',' << r.steps << ',' << r.initial_loss << ','
        << r.final_loss << ',' << r.norm_ratio << ',' << r.converged << ',' << r.collapsed << ','
        << r.non_monotone << ',' << r.plateau << ',' << degenerate << '\n';
  }
  if (!csv) throw IoError("failed writing " + args.out.string());
}

}  // namespace relight::tools
