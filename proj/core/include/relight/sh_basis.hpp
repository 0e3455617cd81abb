#pragma once

#include <Eigen/Core>
#include <array>

namespace relight {

/// Real spherical-harmonic bases of order two.
///
/// Coefficient vectors everywhere in the library use this fixed ordering of
/// (l, m): (0,0) (1,-1) (1,0) (1,1) (2,-2) (2,-1) (2,0) (2,1) (2,2).
namespace sh {

inline constexpr int kNumCoeffs = 9;

inline constexpr double kC0 = 0.282095;
inline constexpr double kC1 = 0.488603;
inline constexpr double kC2 = 1.092548;
inline constexpr double kC3 = 0.315392;
inline constexpr double kC5 = 0.546274;

inline constexpr double kPi = 3.14159265358979323846;

/// Clamped-cosine convolution constants per band.
inline constexpr std::array<double, 3> kAhat = {kPi, 2.0 * kPi / 3.0, kPi / 4.0};

inline constexpr std::array<int, kNumCoeffs> kBand = {0, 1, 1, 1, 2, 2, 2, 2, 2};

/// Â_l for the band of coefficient k.
[[nodiscard]] constexpr double ahat(int k) { return kAhat[kBand[k]]; }

using BasisVector9 = std::array<double, kNumCoeffs>;
/// d Y_k / d(x, y, z), one row per coefficient.
using BasisJacobian = Eigen::Matrix<double, kNumCoeffs, 3>;

inline constexpr double kUnitTolerance = 1e-6;

/// Validated unit 3-vector.
class Direction {
 public:
  /// Throws DomainError unless |x^2+y^2+z^2 - 1| <= 1e-6.
  Direction(double x, double y, double z);
  explicit Direction(const Eigen::Vector3d& v) : Direction(v.x(), v.y(), v.z()) {}

  /// Normalizes first; throws DomainError on a zero or non-finite vector.
  [[nodiscard]] static Direction normalized(const Eigen::Vector3d& v);
  /// (sin t cos p, sin t sin p, cos t).
  [[nodiscard]] static Direction from_spherical(double theta, double phi);

  [[nodiscard]] double x() const { return v_.x(); }
  [[nodiscard]] double y() const { return v_.y(); }
  [[nodiscard]] double z() const { return v_.z(); }
  [[nodiscard]] const Eigen::Vector3d& vector() const { return v_; }
  [[nodiscard]] double polar() const;
  [[nodiscard]] double azimuth() const;

 private:
  Eigen::Vector3d v_;
};

/// Standard real SH at n. Y(0,0) is the constant kC0.
[[nodiscard]] BasisVector9 eval_Y(const Direction& n);

/// Half-angle bases: Yhat(theta, phi) = Y(2 theta, phi), written as
/// polynomials in the bisector components.
[[nodiscard]] BasisVector9 eval_Yhat(const Direction& n);

/// Compares eval_Yhat(n) with eval_Y at doubled polar angle, componentwise
/// within 1e-6. Requires polar angle <= pi/2; returns false otherwise.
[[nodiscard]] bool double_polar_identity_check(const Direction& n);

// Unchecked kernels. They evaluate the polynomials for any 3-vector and are used
// by the render layers, where normals were validated up front.
[[nodiscard]] BasisVector9 eval_Y_raw(const Eigen::Vector3d& n);
[[nodiscard]] BasisVector9 eval_Yhat_raw(const Eigen::Vector3d& n);
[[nodiscard]] BasisJacobian jacobian_Y_raw(const Eigen::Vector3d& n);
[[nodiscard]] BasisJacobian jacobian_Yhat_raw(const Eigen::Vector3d& n);

}  // namespace sh
}  // namespace relight
