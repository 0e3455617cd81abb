#pragma once

// Extended-precision scalar for the low-rank convergence experiments. Tails that
// decay by (1 - 2 eta)^n drop below double round-off within a few dozen steps;
// 50 decimal digits keep them resolvable for the step counts the tools use.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "relight/lowrank.hpp"

namespace relight {

using HighPrecision = boost::multiprecision::cpp_bin_float_50;
using HighPrecisionMatrix = lowrank::Matrix<HighPrecision>;

}  // namespace relight
