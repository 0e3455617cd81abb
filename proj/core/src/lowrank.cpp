#include "relight/lowrank.hpp"

#include <string>

namespace relight::lowrank {

namespace {

constexpr double kSpectralGap = 1e-12;

struct LeadingTriplets {
  double s1, s2;
  Eigen::VectorXd u1, v1, u2, v2;
};

LeadingTriplets leading_two(const Eigen::MatrixXd& r) {
  if (std::min(r.rows(), r.cols()) < 2) throw ShapeError("need at least two singular values");
  const auto svd = detail::thin_svd(r);
  const auto& s = svd.singularValues();
  return {s(0), s(1), svd.matrixU().col(0), svd.matrixV().col(0), svd.matrixU().col(1),
          svd.matrixV().col(1)};
}

void require_gap(const LeadingTriplets& t) {
  if (t.s1 - t.s2 <= kSpectralGap * std::max(t.s1, 1.0e-300)) {
    throw DegenerateSpectrumError("sigma1 == sigma2; singular-value gradient is undefined");
  }
}

}  // namespace

LossAndGrad<double> sigma2_loss(const Eigen::MatrixXd& r) {
  const auto t = leading_two(r);
  require_gap(t);
  return {t.s2, t.u2 * t.v2.transpose()};
}

LossAndGrad<double> sigma2_ratio_loss(const Eigen::MatrixXd& r) {
  const auto t = leading_two(r);
  if (!(t.s1 > 0.0)) throw DomainError("sigma2/sigma1 needs sigma1 > 0");
  require_gap(t);
  const Eigen::MatrixXd grad =
      (t.s1 * t.u2 * t.v2.transpose() - t.s2 * t.u1 * t.v1.transpose()) / (t.s1 * t.s1);
  return {t.s2 / t.s1, grad};
}

ReflectanceMatrix::ReflectanceMatrix(Eigen::MatrixXd data) : data_(std::move(data)) {
  if (data_.rows() < 2) throw ShapeError("reflectance matrix needs at least two rows");
  if (data_.cols() < data_.rows()) {
    throw ShapeError("reflectance matrix needs at least as many columns as rows");
  }
}

Eigen::VectorXd flatten_masked(const RadianceImage& map, const Mask& mask) {
  require_same_shape(mask, map, "reflectance map");
  Eigen::VectorXd row(static_cast<Eigen::Index>(mask.count()) * 3);
  Eigen::Index j = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    for (int ch = 0; ch < 3; ++ch) row(j++) = map[i][ch];
  }
  return row;
}

RadianceImage unflatten_masked(const Eigen::Ref<const Eigen::VectorXd>& row, const Mask& mask) {
  if (row.size() != static_cast<Eigen::Index>(mask.count()) * 3) {
    throw ShapeError("row length does not match the mask");
  }
  RadianceImage out(mask.width, mask.height);
  Eigen::Index j = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    for (int ch = 0; ch < 3; ++ch) out[i][ch] = row(j++);
  }
  return out;
}

ReflectanceMatrix build_reflectance_matrix(std::span<const RadianceImage> maps, const Mask& mask) {
  if (maps.size() < 2) throw ShapeError("need at least two maps");
  const auto d = static_cast<Eigen::Index>(mask.count()) * 3;
  Eigen::MatrixXd data(static_cast<Eigen::Index>(maps.size()), d);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    data.row(static_cast<Eigen::Index>(i)) = flatten_masked(maps[i], mask).transpose();
  }
  return ReflectanceMatrix(std::move(data));
}

ChromaticityImage rg_chromaticity(const RadianceImage& image) {
  ChromaticityImage out{image.width, image.height, {}};
  out.pixels.resize(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const Rgb& p = image[i];
    const double sum = p.sum();
    if (sum < kChromaFloor) {
      out.pixels[i] = Eigen::Array2d(1.0 / 3.0, 1.0 / 3.0);
    } else {
      out.pixels[i] = Eigen::Array2d(p[0] / sum, p[1] / sum);
    }
  }
  return out;
}

}  // namespace relight::lowrank
