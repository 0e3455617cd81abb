#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "relight_tools/commands.hpp"

namespace rt = relight::tools;

int main(int argc, char** argv) {
  CLI::App app{"relight: SH inverse rendering and relighting tools"};
  app.require_subcommand(1);

  std::string pano, sh_out;
  auto* shproject = app.add_subcommand("shproject", "Project an equirectangular .hdr onto order-2 SH");
  shproject->add_option("pano", pano, "input panorama (.hdr)")->required();
  shproject->add_option("out", sh_out, "output lighting (.json)")->required();

  rt::RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Render normals + albedo under an SH light");
  render->add_option("normals", render_args.normals, "normal map PNG")->required();
  render->add_option("albedo", render_args.albedo, "albedo PNG (gamma 2.2)")->required();
  render->add_option("light", render_args.light, "lighting JSON")->required();
  render->add_option("out", render_args.out, "output PNG")->required();
  render->add_option("--sp", render_args.spec_reflectance, "specular reflectance")->check(CLI::NonNegativeNumber);
  render->add_option("--alpha", render_args.shininess, "shininess, >= 1")->check(CLI::Range(1.0, 1e6));

  rt::FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit lights and albedo to a directory of aligned PNGs");
  fit->add_option("images", fit_args.images_dir, "directory of aligned PNG images")->required();
  fit->add_option("mask", fit_args.mask, "foreground mask PNG")->required();
  fit->add_option("normals", fit_args.normals, "normal map PNG")->required();
  fit->add_option("out", fit_args.out, "output fit state (.json)")->required();
  fit->add_option("--lambda", fit_args.lambda, "low-rank weight")->check(CLI::NonNegativeNumber);
  fit->add_option("--iterations", fit_args.iterations, "descent iterations")->check(CLI::PositiveNumber);
  fit->add_option("--threshold", fit_args.spec_threshold, "saturated fraction that triggers separation")
      ->check(CLI::Range(0.0, 1.0));
  fit->add_option("--seed", fit_args.seed, "seed (the fit itself is deterministic)");

  rt::RelightArgs relight_args;
  double sp_override = 0.0, alpha_override = 1.0;
  auto* relight = app.add_subcommand("relight", "Re-render a fitted state under a new light");
  relight->add_option("state", relight_args.state, "fit state JSON")->required();
  relight->add_option("light", relight_args.light, "lighting JSON")->required();
  relight->add_option("out", relight_args.out, "output PNG")->required();
  auto* sp_opt = relight->add_option("--sp", sp_override, "override specular reflectance")
                     ->check(CLI::NonNegativeNumber);
  auto* alpha_opt = relight->add_option("--alpha", alpha_override, "override shininess")
                        ->check(CLI::Range(1.0, 1e6));

  rt::ConvergenceArgs conv_args;
  std::string shape = "4x16";
  auto* convergence = app.add_subcommand(
      "convergence",
      "Iterate R <- R + 2 eta (Rbar - R) in 50-digit precision.\n"
      "CSV columns: step, loss, predicted_loss (loss0 (1 - 2 eta)^(2 step)), rel_err, sigma1, sigma2");
  convergence->add_option("--eta", conv_args.eta, "step size");
  convergence->add_option("--steps", conv_args.steps, "number of steps")->check(CLI::NonNegativeNumber);
  convergence->add_option("--shape", shape, "matrix shape NxD");
  convergence->add_option("--seed", conv_args.seed, "random seed");
  convergence->add_option("out", conv_args.out, "output CSV")->required();

  rt::CompareLossesArgs cmp_args;
  auto* compare = app.add_subcommand(
      "compare-losses",
      "Fit one synthetic problem with the low-rank, sigma2 and sigma2/sigma1 losses.\n"
      "CSV columns: loss, lr, steps, initial_loss, final_loss, norm_ratio, converged, collapsed,\n"
      "non_monotone, plateau, degenerate");
  compare->add_option("--lr", cmp_args.rates, "learning rates")->delimiter(',');
  compare->add_option("--iterations", cmp_args.iterations, "descent iterations")->check(CLI::PositiveNumber);
  compare->add_option("--seed", cmp_args.seed, "random seed");
  compare->add_option("out", cmp_args.out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*shproject) {
      rt::cmd_shproject(pano, sh_out);
    } else if (*render) {
      rt::cmd_render(render_args);
    } else if (*fit) {
      std::cout << rt::cmd_fit(fit_args) << '\n';
    } else if (*relight) {
      if (*sp_opt) relight_args.spec_reflectance = sp_override;
      if (*alpha_opt) relight_args.shininess = alpha_override;
      rt::cmd_relight(relight_args);
    } else if (*convergence) {
      rt::parse_shape(shape, conv_args.rows, conv_args.cols);
      if (!(conv_args.eta > 0.0 && conv_args.eta < 0.5)) {
        std::cerr << "warning: eta " << conv_args.eta
                  << " is outside (0, 0.5); geometric decay is not guaranteed\n";
      }
      const auto report = rt::cmd_convergence(conv_args);
      if (report.oscillating) std::cerr << "warning: oscillation, the residual flips sign every step\n";
      if (report.diverging) std::cerr << "warning: divergence, the loss grows\n";
      std::cout << "max_rel_err " << report.max_rel_err << (report.oscillating ? " oscillating" : "")
                << (report.diverging ? " diverging" : "") << '\n';
    } else if (*compare) {
      rt::cmd_compare_losses(cmp_args);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
