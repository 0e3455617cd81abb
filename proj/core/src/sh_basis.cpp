#include "relight/sh_basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relight/errors.hpp"

namespace relight::sh {

Direction::Direction(double x, double y, double z) : v_(x, y, z) {
  const double n2 = v_.squaredNorm();
  if (!std::isfinite(n2) || std::abs(n2 - 1.0) > kUnitTolerance) {
    throw DomainError("direction is not unit length (|n|^2 = " + std::to_string(n2) + ")");
  }
}

Direction Direction::normalized(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) throw DomainError("cannot normalize a zero or non-finite vector");
  return Direction(v / n);
}

Direction Direction::from_spherical(double theta, double phi) {
  return Direction::normalized(Eigen::Vector3d(std::sin(theta) * std::cos(phi),
                                               std::sin(theta) * std::sin(phi), std::cos(theta)));
}

double Direction::polar() const { return std::acos(std::clamp(v_.z(), -1.0, 1.0)); }

double Direction::azimuth() const { return std::atan2(v_.y(), v_.x()); }

BasisVector9 eval_Y_raw(const Eigen::Vector3d& n) {
  const double x = n.x(), y = n.y(), z = n.z();
  return {kC0,
          kC1 * y,
          kC1 * z,
          kC1 * x,
          kC2 * x * y,
          kC2 * y * z,
          kC3 * (3.0 * z * z - 1.0),
          kC2 * x * z,
          kC5 * (x * x - y * y)};
}

BasisVector9 eval_Yhat_raw(const Eigen::Vector3d& n) {
  const double x = n.x(), y = n.y(), z = n.z();
  const double z2 = z * z;
  return {kC0,
          2.0 * kC1 * y * z,
          kC1 * (2.0 * z2 - 1.0),
          2.0 * kC1 * x * z,
          4.0 * kC2 * x * y * z2,
          kC2 * (4.0 * y * z2 * z - 2.0 * y * z),
          kC3 * (3.0 * (4.0 * z2 * z2 - 4.0 * z2 + 1.0) - 1.0),
          kC2 * (4.0 * x * z2 * z - 2.0 * x * z),
          kC5 * (4.0 * x * x * z2 - 4.0 * y * y * z2)};
}

BasisJacobian jacobian_Y_raw(const Eigen::Vector3d& n) {
  const double x = n.x(), y = n.y(), z = n.z();
  BasisJacobian j;
  // clang-format off
  j << 0.0,           0.0,            0.0,
       0.0,           kC1,            0.0,
       0.0,           0.0,            kC1,
       kC1,           0.0,            0.0,
       kC2 * y,       kC2 * x,        0.0,
       0.0,           kC2 * z,        kC2 * y,
       0.0,           0.0,            6.0 * kC3 * z,
       kC2 * z,       0.0,            kC2 * x,
       2.0 * kC5 * x, -2.0 * kC5 * y, 0.0;
  // clang-format on
  return j;
}

BasisJacobian jacobian_Yhat_raw(const Eigen::Vector3d& n) {
  const double x = n.x(), y = n.y(), z = n.z();
  const double z2 = z * z;
  BasisJacobian j;
  // clang-format off
  j << 0.0, 0.0, 0.0,
       0.0, 2.0 * kC1 * z, 2.0 * kC1 * y,
       0.0, 0.0, 4.0 * kC1 * z,
       2.0 * kC1 * z, 0.0, 2.0 * kC1 * x,
       4.0 * kC2 * y * z2, 4.0 * kC2 * x * z2, 8.0 * kC2 * x * y * z,
       0.0, kC2 * (4.0 * z2 * z - 2.0 * z), kC2 * (12.0 * y * z2 - 2.0 * y),
       0.0, 0.0, kC3 * (48.0 * z2 * z - 24.0 * z),
       kC2 * (4.0 * z2 * z - 2.0 * z), 0.0, kC2 * (12.0 * x * z2 - 2.0 * x),
       8.0 * kC5 * x * z2, -8.0 * kC5 * y * z2, 8.0 * kC5 * z * (x * x - y * y);
  // clang-format on
  return j;
}

BasisVector9 eval_Y(const Direction& n) { return eval_Y_raw(n.vector()); }

BasisVector9 eval_Yhat(const Direction& n) { return eval_Yhat_raw(n.vector()); }

bool double_polar_identity_check(const Direction& n) {
  const double theta = n.polar();
  if (theta > kPi / 2.0 + 1e-12) return false;
  const auto doubled = Direction::from_spherical(2.0 * theta, n.azimuth());
  const auto lhs = eval_Yhat(n);
  const auto rhs = eval_Y(doubled);
  for (int k = 0; k < kNumCoeffs; ++k) {
    if (std::abs(lhs[k] - rhs[k]) > 1e-6) return false;
  }
  return true;
}

}  // namespace relight::sh
