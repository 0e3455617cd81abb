#include "relight/optimize.hpp"

#include <cmath>

#include "relight/errors.hpp"

namespace relight::optimize {

DescentResult minimize(const Objective& f, std::vector<double> x0, const DescentOptions& opts,
                       const Projection& project) {
  if (!(opts.initial_step > 0.0) || !(opts.grow > 0.0)) {
    throw DomainError("descent needs a positive step and growth factor");
  }
  if (project) project(x0);

  DescentResult out;
  out.x = std::move(x0);
  std::vector<double> grad(out.x.size());
  out.value = f(out.x, grad);
  if (!std::isfinite(out.value)) throw NumericError("objective is not finite at the start point");
  out.trajectory.push_back(out.value);
  if (out.value <= opts.target) {
    out.reason = StopReason::kTarget;
    return out;
  }

  std::vector<double> trial(out.x.size());
  std::vector<double> trial_grad(out.x.size());
  double step = opts.initial_step;
  out.reason = StopReason::kMaxIterations;

  while (out.iterations < opts.max_iterations) {
    double t = step;
    bool accepted = false;
    double trial_value = 0.0;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = out.x[i] - t * grad[i];
      if (project) project(trial);
      trial_value = f(trial, trial_grad);
      if (std::isfinite(trial_value) && trial_value < out.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.reason = StopReason::kLineSearchFailed;
      break;
    }
    const double previous = out.value;
    out.x.swap(trial);
    grad.swap(trial_grad);
    out.value = trial_value;
    out.trajectory.push_back(out.value);
    ++out.iterations;
    step = t * opts.grow;

    if (out.value <= opts.target) {
      out.reason = StopReason::kTarget;
      break;
    }
    const double scale = std::max(std::abs(previous), 1e-300);
    if ((previous - out.value) / scale < opts.relative_tolerance) {
      out.reason = StopReason::kConverged;
      break;
    }
  }
  return out;
}

}  // namespace relight::optimize
