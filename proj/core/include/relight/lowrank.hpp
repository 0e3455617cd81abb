#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>
#include <cmath>
#include <span>
#include <vector>

#include "relight/errors.hpp"
#include "relight/image.hpp"

namespace relight::lowrank {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// R ≈ b c^T with |b| = 1, plus the full descending spectrum of R.
template <class Scalar>
struct RankOneFactors {
  Vector<Scalar> b;
  Vector<Scalar> c;
  Vector<Scalar> sigma;
};

template <class Scalar>
struct RankOne {
  Matrix<Scalar> approx;
  RankOneFactors<Scalar> factors;
};

template <class Scalar>
struct LossAndGrad {
  Scalar loss;
  Matrix<Scalar> grad;
};

template <class Scalar>
struct Trajectory {
  Matrix<Scalar> final;
  /// losses[i] is the low-rank loss of the i-th iterate, i = 0..steps.
  std::vector<Scalar> losses;
};

namespace detail {

template <class Scalar>
void require_finite(const Matrix<Scalar>& r) {
  if (!r.allFinite()) throw NumericError("matrix has non-finite entries");
}

template <class Scalar>
Eigen::JacobiSVD<Matrix<Scalar>> thin_svd(const Matrix<Scalar>& r) {
  require_finite(r);
  return Eigen::JacobiSVD<Matrix<Scalar>>(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

/// Leading pair flipped so the largest-magnitude entry of u1 is positive.
template <class Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> leading_pair(const Eigen::JacobiSVD<Matrix<Scalar>>& svd) {
  Vector<Scalar> u = svd.matrixU().col(0);
  Vector<Scalar> v = svd.matrixV().col(0);
  Eigen::Index idx = 0;
  Scalar best = Scalar(-1);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    using std::abs;
    const Scalar a = abs(u(i));
    if (a > best) {
      best = a;
      idx = i;
    }
  }
  if (u(idx) < Scalar(0)) {
    u = -u;
    v = -v;
  }
  return {u, v};
}

}  // namespace detail

/// Optimal rank-one approximation sigma1 u1 v1^T with b = u1 and c = sigma1 v1.
template <class Scalar>
[[nodiscard]] RankOne<Scalar> rank_one_approx(const Matrix<Scalar>& r) {
  const auto svd = detail::thin_svd(r);
  auto [u, v] = detail::leading_pair(svd);
  const Scalar s1 = svd.singularValues()(0);
  RankOne<Scalar> out;
  out.factors.b = u;
  out.factors.c = s1 * v;
  out.factors.sigma = svd.singularValues();
  out.approx = out.factors.b * out.factors.c.transpose();
  return out;
}

/// f(R) = |Rbar - R|_F^2 with gradient -2 (Rbar - R), Rbar held constant.
template <class Scalar>
[[nodiscard]] LossAndGrad<Scalar> lowrank_loss(const Matrix<Scalar>& r) {
  const auto r1 = rank_one_approx(r);
  const Matrix<Scalar> diff = r1.approx - r;
  return {diff.squaredNorm(), Scalar(-2) * diff};
}

/// R + 2 eta (Rbar - R) with Rbar taken from the current R.
template <class Scalar>
[[nodiscard]] Matrix<Scalar> descent_step(const Matrix<Scalar>& r, const Scalar& eta) {
  const auto r1 = rank_one_approx(r);
  return r + Scalar(2) * eta * (r1.approx - r);
}

template <class Scalar>
[[nodiscard]] Trajectory<Scalar> iterate_to_convergence(const Matrix<Scalar>& r0,
                                                        const Scalar& eta, int steps) {
  Trajectory<Scalar> out;
  out.final = r0;
  out.losses.reserve(static_cast<std::size_t>(steps) + 1);
  for (int n = 0; n <= steps; ++n) {
    const auto r1 = rank_one_approx(out.final);
    const Matrix<Scalar> diff = r1.approx - out.final;
    out.losses.push_back(diff.squaredNorm());
    if (n == steps) break;
    out.final += Scalar(2) * eta * diff;
  }
  return out;
}

/// sigma2 with gradient u2 v2^T. Throws DegenerateSpectrumError when sigma1 = sigma2
/// and ShapeError when R has fewer than two singular values.
[[nodiscard]] LossAndGrad<double> sigma2_loss(const Eigen::MatrixXd& r);

/// sigma2 / sigma1 with gradient (sigma1 u2 v2^T - sigma2 u1 v1^T) / sigma1^2.
/// Throws DomainError when sigma1 = 0, DegenerateSpectrumError when sigma1 = sigma2.
[[nodiscard]] LossAndGrad<double> sigma2_ratio_loss(const Eigen::MatrixXd& r);

/// N x d matrix whose i-th row is the i-th map's foreground pixels, channel
/// interleaved in scanline order. Requires N >= 2 and d >= N.
class ReflectanceMatrix {
 public:
  explicit ReflectanceMatrix(Eigen::MatrixXd data);

  [[nodiscard]] const Eigen::MatrixXd& data() const { return data_; }
  [[nodiscard]] Eigen::Index rows() const { return data_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return data_.cols(); }

 private:
  Eigen::MatrixXd data_;
};

[[nodiscard]] ReflectanceMatrix build_reflectance_matrix(std::span<const RadianceImage> maps,
                                                         const Mask& mask);

/// Foreground pixels of one map, flattened the same way as a matrix row.
[[nodiscard]] Eigen::VectorXd flatten_masked(const RadianceImage& map, const Mask& mask);
/// Inverse of flatten_masked; background pixels are zero.
[[nodiscard]] RadianceImage unflatten_masked(const Eigen::Ref<const Eigen::VectorXd>& row,
                                             const Mask& mask);

/// Two-channel (r, g) map.
struct ChromaticityImage {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Array2d> pixels;
};

inline constexpr double kChromaFloor = 1e-6;

/// (R, G) / (R + G + B); pixels whose sum is below 1e-6 map to (1/3, 1/3).
[[nodiscard]] ChromaticityImage rg_chromaticity(const RadianceImage& image);

}  // namespace relight::lowrank
