#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace relight::tools {

enum class LossKind { kLowRank, kSigma2, kSigma2Ratio };

[[nodiscard]] std::string loss_name(LossKind kind);

/// Fixed fitting problem: per-image SH lights of a small sphere are optimized so
/// that the reflectance rows I_i / S_i satisfy one of the low-rank losses.
struct AblationConfig {
  int width = 16;
  int images = 4;
  int iterations = 2000;
  std::uint64_t seed = 0;
  /// Relative Gaussian perturbation of the true lights at the start.
  double perturbation = 0.3;
  /// Images are in 8-bit units.
  double intensity_scale = 255.0;
};

struct AblationRun {
  LossKind kind = LossKind::kLowRank;
  double rate = 0.0;
  int steps = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  /// |R_final| / |R_target| for the reflectance predictions.
  double norm_ratio = 0.0;
  bool converged = false;     // loss fell by at least 99%
  bool collapsed = false;     // norm_ratio below 1%
  bool non_monotone = false;  // some accepted step increased the loss
  bool plateau = false;       // the budget ran out above 1% of the initial loss
  bool spectrum_degenerate = false;
};

/// Backtracking descent whose trial step is always the given rate.
[[nodiscard]] AblationRun run_ablation(LossKind kind, double rate, const AblationConfig& config = {});

}  // namespace relight::tools
