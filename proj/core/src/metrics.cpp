#include "relight/metrics.hpp"

#include <cmath>
#include <vector>

#include "relight/errors.hpp"

namespace relight::metrics {

namespace {

void check_inputs(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask) {
  require_same_shape(mask, pred, "prediction");
  require_same_shape(mask, gt, "ground truth");
}

struct Moments {
  double pp = 0.0, pg = 0.0, gg = 0.0;
  std::size_t n = 0;
};

template <class Pred>
Moments moments(const RadianceImage& pred, const RadianceImage& gt, Pred include) {
  Moments m;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!include(i)) continue;
    m.pp += (pred[i] * pred[i]).sum();
    m.pg += (pred[i] * gt[i]).sum();
    m.gg += (gt[i] * gt[i]).sum();
    m.n += 3;
  }
  return m;
}

// mean of (w p - g)^2 expanded in moments: w^2 pp - 2 w pg + gg
double scaled_error(const Moments& m) {
  const double w = m.pp > 0.0 ? m.pg / m.pp : 0.0;
  const double sse = w * w * m.pp - 2.0 * w * m.pg + m.gg;
  return std::max(sse, 0.0) / static_cast<double>(m.n);
}

}  // namespace

double mse(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask) {
  check_inputs(pred, gt, mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    sum += (pred[i] - gt[i]).square().sum();
    n += 3;
  }
  if (n == 0) throw DomainError("mse over an empty mask");
  return sum / static_cast<double>(n);
}

double optimal_scale(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask) {
  check_inputs(pred, gt, mask);
  const auto m = moments(pred, gt, [&](std::size_t i) { return mask[i]; });
  if (m.n == 0) throw DomainError("scale over an empty mask");
  return m.pp > 0.0 ? m.pg / m.pp : 0.0;
}

double smse(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask) {
  const double w = optimal_scale(pred, gt, mask);
  // Recomputing with the scaled prediction avoids cancellation in the moment form.
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    sum += (w * pred[i] - gt[i]).square().sum();
    n += 3;
  }
  return sum / static_cast<double>(n);
}

double lmse(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask) {
  check_inputs(pred, gt, mask);
  if (mask.width < kLmseWindow || mask.height < kLmseWindow) {
    throw DomainError("lmse needs an image at least one window wide");
  }
  double total = 0.0;
  int windows = 0;
  for (int y0 = 0; y0 + kLmseWindow <= mask.height; y0 += kLmseStride) {
    for (int x0 = 0; x0 + kLmseWindow <= mask.width; x0 += kLmseStride) {
      int inside = 0;
      for (int y = y0; y < y0 + kLmseWindow; ++y) {
        for (int x = x0; x < x0 + kLmseWindow; ++x) inside += mask.at(x, y) ? 1 : 0;
      }
      if (2 * inside < kLmseWindow * kLmseWindow) continue;
      const auto m = moments(pred, gt, [&](std::size_t i) {
        const int x = static_cast<int>(i % mask.width);
        const int y = static_cast<int>(i / mask.width);
        return mask[i] && x >= x0 && x < x0 + kLmseWindow && y >= y0 && y < y0 + kLmseWindow;
      });
      total += scaled_error(m);
      ++windows;
    }
  }
  if (windows == 0) throw DomainError("lmse found no window with enough foreground");
  return total / windows;
}

namespace {

constexpr double kGaussianSigma = 1.5;
constexpr int kSsimRadius = 5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::vector<double> grayscale(const RadianceImage& img) {
  std::vector<double> g(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    g[i] = 0.299 * img[i][0] + 0.587 * img[i][1] + 0.114 * img[i][2];
  }
  return g;
}

// 'valid' separable filtering: output is (w - 2r) x (h - 2r).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size() / 2);
  const int ow = w - 2 * r;
  const int oh = h - 2 * r;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t <= 2 * r; ++t) acc += taps[t] * src[static_cast<std::size_t>(y) * w + x + t];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t <= 2 * r; ++t) acc += taps[t] * tmp[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const RadianceImage& pred, const RadianceImage& gt) {
  if (!pred.same_shape(gt.width, gt.height)) throw ShapeError("ssim inputs differ in size");
  if (pred.width < 1 || pred.height < 1) throw ShapeError("ssim of an empty image");
  const int radius = std::min(kSsimRadius, (std::min(pred.width, pred.height) - 1) / 2);
  std::vector<double> taps(2 * radius + 1);
  double norm = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    taps[t + radius] = std::exp(-0.5 * t * t / (kGaussianSigma * kGaussianSigma));
    norm += taps[t + radius];
  }
  for (auto& t : taps) t /= norm;

  const auto a = grayscale(pred);
  const auto b = grayscale(gt);
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const int w = pred.width, h = pred.height;
  const auto mu_a = filter_valid(a, w, h, taps);
  const auto mu_b = filter_valid(b, w, h, taps);
  const auto e_aa = filter_valid(aa, w, h, taps);
  const auto e_bb = filter_valid(bb, w, h, taps);
  const auto e_ab = filter_valid(ab, w, h, taps);

  const double c1 = (kK1 * 1.0) * (kK1 * 1.0);
  const double c2 = (kK2 * 1.0) * (kK2 * 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = e_aa[i] - mu_a[i] * mu_a[i];
    const double vb = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    sum += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
           ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

double dssim(const RadianceImage& pred, const RadianceImage& gt) {
  return (1.0 - ssim(pred, gt)) / 2.0;
}

MetricReport report(const RadianceImage& pred, const RadianceImage& gt, const Mask& mask) {
  MetricReport r;
  r.mse = mse(pred, gt, mask);
  r.smse = smse(pred, gt, mask);
  r.lmse = (mask.width >= kLmseWindow && mask.height >= kLmseWindow) ? lmse(pred, gt, mask) : r.smse;
  r.dssim = dssim(pred, gt);
  return r;
}

}  // namespace relight::metrics
