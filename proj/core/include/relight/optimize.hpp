#pragma once

#include <functional>
#include <span>
#include <vector>

namespace relight::optimize {

/// Returns f(x) and writes the gradient into grad (same length as x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;
/// Maps a trial point back onto the feasible set, in place.
using Projection = std::function<void(std::span<double> x)>;

struct DescentOptions {
  /// Trial step at the first iteration.
  double initial_step = 1e-3;
  /// Factor applied to the last accepted step to form the next trial step;
  /// 1 keeps every trial at initial_step.
  double grow = 2.0;
  int max_iterations = 2000;
  int max_halvings = 60;
  /// Stop once the relative decrease of an accepted step falls below this.
  double relative_tolerance = 0.0;
  /// Stop once the objective drops to or below this value.
  double target = 0.0;
};

enum class StopReason { kMaxIterations, kConverged, kTarget, kLineSearchFailed };

struct DescentResult {
  std::vector<double> x;
  double value = 0.0;
  /// Objective value after every accepted step, starting with f(x0).
  std::vector<double> trajectory;
  int iterations = 0;
  StopReason reason = StopReason::kMaxIterations;
};

/// Gradient descent with backtracking: a trial step that does not strictly
/// decrease f is halved, up to max_halvings times. The trajectory is therefore
/// non-increasing.
[[nodiscard]] DescentResult minimize(const Objective& f, std::vector<double> x0,
                                     const DescentOptions& opts,
                                     const Projection& project = nullptr);

}  // namespace relight::optimize
