#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace relight::tools {

namespace fs = std::filesystem;

// Every command throws relight::Error (or std::exception) on failure and writes
// its outputs only after all inputs were read and validated.

void cmd_shproject(const fs::path& pano, const fs::path& out);

struct RenderArgs {
  fs::path normals, albedo, light, out;
  double spec_reflectance = 0.0;
  double shininess = 1.0;
};
void cmd_render(const RenderArgs& args);

struct FitArgs {
  fs::path images_dir, mask, normals, out;
  double lambda = 1.0;
  int iterations = 2000;
  double spec_threshold = 0.05;
  std::uint64_t seed = 0;
};
/// Returns a short summary line.
std::string cmd_fit(const FitArgs& args);

struct RelightArgs {
  fs::path state, light, out;
  std::optional<double> spec_reflectance;
  std::optional<double> shininess;
};
void cmd_relight(const RelightArgs& args);

struct ConvergenceArgs {
  double eta = 0.25;
  int steps = 50;
  int rows = 4;
  int cols = 16;
  std::uint64_t seed = 0;
  fs::path out;
};
struct ConvergenceReport {
  bool outside_guarantee = false;
  bool oscillating = false;
  bool diverging = false;
  double max_rel_err = 0.0;
};
/// CSV columns: step, loss, predicted_loss, rel_err, sigma1, sigma2.
ConvergenceReport cmd_convergence(const ConvergenceArgs& args);

struct CompareLossesArgs {
  std::vector<double> rates{1e-2, 1e-4, 1e-6, 1e-8};
  int iterations = 2000;
  std::uint64_t seed = 0;
  fs::path out;
};
/// CSV columns: loss, lr, steps, initial_loss, final_loss, norm_ratio, converged,
/// collapsed, non_monotone, plateau, degenerate.
void cmd_compare_losses(const CompareLossesArgs& args);

/// Parses "NxD".
void parse_shape(const std::string& text, int& rows, int& cols);

}  // namespace relight::tools
