#include <gtest/gtest.h>

#include "relight/envlight.hpp"
#include "relight/errors.hpp"
#include "relight/inverse_fit.hpp"
#include "relight/lowrank.hpp"
#include "relight/metrics.hpp"
#include "relight/oracle.hpp"
#include "synthetic.hpp"

using namespace relight;
using namespace relight::fit;
using relight::synth::Rng;

namespace {

AlignedBatch render_batch(const NormalMap& nm, const RadianceImage& albedo,
                          const std::vector<ShLighting>& lights) {
  AlignedBatch b;
  b.mask = nm.mask;
  for (const auto& l : lights) b.images.push_back(render_diffuse(nm, {albedo, 0, 1}, l));
  return b;
}

RadianceImage ratio(const RadianceImage& num, const RadianceImage& den, const Mask& mask) {
  RadianceImage out(num.width, num.height);
  for (std::size_t p = 0; p < out.size(); ++p)
    if (mask[p]) out[p] = num[p] / den[p];
  return out;
}

}  // namespace

TEST(AlignedBatch, Validation) {
  AlignedBatch b;
  b.mask = Mask(4, 4, true);
  b.images = {RadianceImage(4, 4)};
  try {
    b.validate();
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "need at least 2 aligned images");
  }
  b.images.push_back(RadianceImage(3, 4));
  EXPECT_THROW(b.validate(), ShapeError);
  b.images[1] = RadianceImage(4, 4);
  b.images[1][5][1] = NAN;
  EXPECT_THROW(b.validate(), DomainError);
}

TEST(DetectSpecular, Examples) {
  const Mask all(10, 10, true);
  EXPECT_TRUE(detect_specular(RadianceImage(10, 10, Rgb::Ones()), all));
  EXPECT_FALSE(detect_specular(RadianceImage(10, 10), all));
  RadianceImage five(10, 10, Rgb::Constant(0.3));
  for (int i = 0; i < 5; ++i) five[i] = Rgb::Constant(0.97);
  EXPECT_FALSE(detect_specular(five, all));
  five[5] = Rgb::Constant(0.95);
  EXPECT_TRUE(detect_specular(five, all));
  EXPECT_THROW((void)detect_specular(five, Mask(10, 10, false)), DomainError);
}

TEST(DetectSpecular, CountsWithinMaskAndNeedsAllChannels) {
  Mask half(10, 10);
  for (int i = 0; i < 50; ++i) half.values[i] = 1;
  RadianceImage img(10, 10, Rgb::Constant(0.2));
  for (int i = 50; i < 100; ++i) img[i] = Rgb::Ones();  // outside the mask
  EXPECT_FALSE(detect_specular(img, half));
  for (int i = 0; i < 10; ++i) img[i] = Rgb(1.0, 1.0, 0.5);  // not near-white
  EXPECT_FALSE(detect_specular(img, half));
}

TEST(DetectSpecular, MonotoneInSaturatedCount) {
  const Mask all(20, 20, true);
  RadianceImage img(20, 20, Rgb::Constant(0.1));
  bool previous = false;
  for (int i = 0; i < 400; ++i) {
    img[i] = Rgb::Ones();
    const bool now = detect_specular(img, all);
    EXPECT_TRUE(now || !previous);
    previous = now;
  }
}

TEST(SeparateSpecular, NoHighlightsStaysAtZero) {
  const auto nm = sphere_normal_map(24, 24);
  Rng rng(1);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  std::vector<ShLighting> lights;
  for (int i = 0; i < 3; ++i) {
    lights.push_back(synth::random_positive_light(rng));
    lights.back().color = {1.0, 0.8, 0.6};
  }
  const auto sep = separate_specular(render_batch(nm, albedo, lights));
  EXPECT_LT(sep.initial_loss, 1e-12);
  double worst = 0.0;
  for (const auto& h : sep.highlight)
    for (const auto& px : h.pixels) worst = std::max(worst, px.maxCoeff());
  EXPECT_LT(worst, 1e-6);
}

TEST(SeparateSpecular, RecoversOracleHighlight) {
  const auto nm = sphere_normal_map(48, 48);
  Rng rng(3);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  const Eigen::Vector3d dirs[4] = {{0.5, 0.3, 0.8}, {-0.5, 0.4, 0.75}, {0.2, -0.6, 0.77}, {-0.4, -0.4, 0.82}};
  AlignedBatch batch;
  batch.mask = nm.mask;
  std::vector<RadianceImage> truth;
  const auto ambient = render_diffuse(nm, {albedo, 0, 1}, ShLighting::dc(0.5));
  for (const auto& d : dirs) {
    oracle::PointLightSet set;
    set.directions = {d.normalized()};
    set.intensities = {Rgb::Constant(2.0)};
    const auto mc = oracle::mc_render(nm, {albedo, 0.3, 32.0}, set);
    batch.images.push_back(mc.total + ambient);
    truth.push_back(mc.specular);
  }
  const auto sep = separate_specular(batch);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    double peak = 0.0;
    for (const auto& px : truth[i].pixels) peak = std::max(peak, px.maxCoeff());
    double err = 0.0, mass = 0.0;
    for (std::size_t p = 0; p < truth[i].size(); ++p) {
      if (!nm.mask[p] || truth[i][p][0] <= 0.05 * peak) continue;
      err += (sep.highlight[i][p] - truth[i][p]).abs().sum();
      mass += truth[i][p].sum();
    }
    EXPECT_LT(err / mass, 0.10) << "image " << i;
  }
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t p = 0; p < truth[i].size(); ++p) {
      EXPECT_TRUE((sep.highlight[i][p] >= 0.0).all());
      EXPECT_TRUE((sep.highlight[i][p] <= batch.images[i][p] + 1e-15).all());
    }
}

TEST(SeparateSpecular, SaturatedBlobOnGrayObject) {
  const auto nm = sphere_normal_map(32, 32);
  const RadianceImage gray(32, 32, Rgb::Constant(0.5));
  AlignedBatch batch;
  batch.mask = nm.mask;
  Mask blob(32, 32);
  for (int i = 0; i < 3; ++i) {
    auto img = render_diffuse(nm, {gray, 0, 1}, synth::directional_light({0.3 * i - 0.3, 0.2, 0.9}, 0.5));
    if (i == 1) {
      for (int y = 10; y < 16; ++y)
        for (int x = 12; x < 19; ++x) {
          img.at(x, y) = Rgb::Ones();
          blob.values[blob.index(x, y)] = 1;
        }
    }
    batch.images.push_back(img);
  }
  const auto sep = separate_specular(batch);
  int inter = 0, uni = 0;
  for (std::size_t p = 0; p < blob.size(); ++p) {
    const bool found = sep.highlight[1][p][0] > 1e-6;
    inter += found && blob[p];
    uni += found || blob[p];
  }
  EXPECT_GT(static_cast<double>(inter) / uni, 0.5);
}

TEST(FitDiffuse, RecoversSyntheticAlbedoAndShading) {
  const auto nm = sphere_normal_map(24, 24);
  Rng rng(5);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  std::vector<ShLighting> lights;
  for (int i = 0; i < 6; ++i) lights.push_back(synth::random_positive_light(rng));
  const auto batch = render_batch(nm, albedo, lights);
  const auto state = fit_diffuse(batch, nm);
  EXPECT_LT(metrics::smse(state.albedo, albedo, nm.mask), 0.01);
  for (std::size_t i = 0; i < lights.size(); ++i) {
    EXPECT_LT(metrics::smse(render_shading(nm, state.lights[i]), render_shading(nm, lights[i]), nm.mask), 0.01);
  }
  // Albedo gauge: largest foreground channel is 1, never negative.
  double peak = 0.0;
  for (std::size_t p = 0; p < state.albedo.size(); ++p) {
    EXPECT_TRUE((state.albedo[p] >= 0.0).all());
    if (nm.mask[p]) peak = std::max(peak, state.albedo[p].maxCoeff());
  }
  EXPECT_NEAR(peak, 1.0, 1e-12);
}

TEST(FitDiffuse, AlbedoIsLeadingSingularRow) {
  const auto nm = sphere_normal_map(16, 16);
  Rng rng(6);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  std::vector<ShLighting> lights;
  for (int i = 0; i < 3; ++i) lights.push_back(synth::random_positive_light(rng));
  const auto batch = render_batch(nm, albedo, lights);
  DiffuseFitOptions opts;
  opts.max_iterations = 50;
  const auto state = fit_diffuse(batch, nm, opts);
  // Rebuild the reflectance rows at the fitted lights and compare directions.
  std::vector<RadianceImage> rows;
  for (std::size_t i = 0; i < lights.size(); ++i) {
    rows.push_back(ratio(batch.images[i], render_shading(nm, state.lights[i]), nm.mask));
  }
  const auto r = lowrank::build_reflectance_matrix(rows, nm.mask);
  const auto r1 = lowrank::rank_one_approx<double>(r.data());
  const Eigen::VectorXd fitted = lowrank::flatten_masked(state.albedo, nm.mask);
  const double cosine = fitted.normalized().dot(r1.factors.c.normalized());
  EXPECT_NEAR(cosine, 1.0, 1e-9);
  // The lights absorb b_i so that albedo * S_i is the rank-one reconstruction.
  for (std::size_t i = 0; i < lights.size(); ++i) {
    const auto recon = render_diffuse(nm, {state.albedo, 0, 1}, state.lights[i]);
    const Eigen::VectorXd want = (r1.approx.row(static_cast<Eigen::Index>(i)).transpose().array() *
                                  lowrank::flatten_masked(render_shading(nm, state.lights[i]), nm.mask).array()).matrix();
    EXPECT_LT((lowrank::flatten_masked(recon, nm.mask) - want).norm(), 1e-4 * want.norm());
  }
}

TEST(FitDiffuse, IdenticalImages) {
  const auto nm = sphere_normal_map(16, 16);
  Rng rng(7);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  const auto light = synth::random_positive_light(rng);
  const auto batch = render_batch(nm, albedo, {light, light, light});
  const auto state = fit_diffuse(batch, nm);
  const auto expected = ratio(batch.images[0], render_shading(nm, state.lights[0]), nm.mask);
  EXPECT_LT(metrics::smse(state.albedo, expected, nm.mask), 1e-12);
}

TEST(FitDiffuse, ObjectiveScaleInvariance) {
  const auto nm = sphere_normal_map(16, 16);
  Rng rng(8);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  std::vector<ShLighting> lights;
  for (int i = 0; i < 3; ++i) lights.push_back(synth::random_positive_light(rng));
  const auto batch = render_batch(nm, albedo, lights);
  std::vector<ShLighting> start(3, ShLighting::dc(1.0)), scaled = start;
  for (auto& l : scaled)
    for (double& c : l.coeffs) c /= 3.5;
  const auto a = diffuse_objective(batch, nm, start), b = diffuse_objective(batch, nm, scaled);
  EXPECT_NEAR(a.total, b.total, 1e-12 * a.total);

  DiffuseFitOptions oa, ob;
  oa.initial_lights = start;
  ob.initial_lights = scaled;
  oa.max_iterations = ob.max_iterations = 1500;
  const double fa = fit_diffuse(batch, nm, oa).objective, fb = fit_diffuse(batch, nm, ob).objective;
  // Both starts descend to the same level relative to where they began.
  EXPECT_NEAR(fa, fb, 0.01 * a.total);
}

TEST(FitDiffuse, TrajectoryNeverIncreasesAndColorCanBeFitted) {
  const auto nm = sphere_normal_map(16, 16);
  Rng rng(9);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  std::vector<ShLighting> lights;
  for (int i = 0; i < 3; ++i) lights.push_back(synth::random_positive_light(rng, 0.05, true));
  const auto batch = render_batch(nm, albedo, lights);
  DiffuseFitOptions opts;
  opts.fit_color = true;
  opts.max_iterations = 300;
  const auto start = diffuse_objective(batch, nm, std::vector<ShLighting>(3, ShLighting::dc(1.0)), opts);
  const auto state = fit_diffuse(batch, nm, opts);
  EXPECT_LT(state.objective, start.total);
  EXPECT_GT(state.iterations, 0);
}

TEST(FitDiffuse, Preconditions) {
  const auto nm = sphere_normal_map(8, 8);
  AlignedBatch b;
  b.mask = nm.mask;
  b.images = {RadianceImage(8, 8)};
  EXPECT_THROW((void)fit_diffuse(b, nm), DomainError);
  b.images.push_back(RadianceImage(8, 8));
  EXPECT_THROW((void)fit_diffuse(b, sphere_normal_map(9, 8)), ShapeError);
}

TEST(FitSpecular, SelfInversion) {
  const auto nm = sphere_normal_map(48, 48);
  auto light = synth::directional_light({0.3, 0.4, 0.8}, 0.8);
  light.coeffs[4] = 0.1;
  const RadianceImage zero(48, 48);
  for (double sp : {0.8, 0.35}) {
    for (double alpha : {8.0, 5.3}) {
      const auto h = render_specular(nm, {zero, sp, alpha}, light);
      const auto got = fit_specular_params(h, nm, light);
      EXPECT_NEAR(got.spec_reflectance, sp, 0.05 * sp);
      EXPECT_NEAR(got.shininess, alpha, 0.10 * alpha);
    }
  }
}

TEST(FitSpecular, ZeroHighlight) {
  const auto nm = sphere_normal_map(16, 16);
  const auto got = fit_specular_params(RadianceImage(16, 16), nm, ShLighting::dc(1.0));
  EXPECT_EQ(got.spec_reflectance, 0.0);
  EXPECT_EQ(got.shininess, 1.0);
  RadianceImage neg(16, 16);
  neg[100] = Rgb::Constant(-1.0);
  EXPECT_THROW((void)fit_specular_params(neg, nm, ShLighting::dc(1.0)), DomainError);
}

TEST(FitSpecular, BeatsDcOnlyBaselineOnOracleHighlight) {
  const auto nm = sphere_normal_map(48, 48);
  ShLighting light;
  light.coeffs[0] = 0.3;
  light.coeffs[2] = 1.0;
  const RadianceImage ones(48, 48, Rgb::Ones());
  const auto mc = oracle::mc_render(nm, {ones, 1.0, 8.0}, oracle::sample_env_to_lights(light, 10000, 2)).specular;
  const auto fitted = fit_specular_params(mc, nm, light);
  const auto approx = render_specular(nm, {ones, fitted.spec_reflectance, fitted.shininess}, light);
  // Baseline: the best constant highlight (DC-only lobe).
  double mean = 0.0;
  for (std::size_t p = 0; p < mc.size(); ++p)
    if (nm.mask[p]) mean += mc[p][0];
  mean /= static_cast<double>(nm.mask.count());
  RadianceImage baseline(48, 48);
  for (std::size_t p = 0; p < mc.size(); ++p)
    if (nm.mask[p]) baseline[p] = Rgb::Constant(mean);
  const double residual = metrics::mse(approx, mc, nm.mask);
  const double base = metrics::mse(baseline, mc, nm.mask);
  RecordProperty("residual", std::to_string(residual));
  EXPECT_LT(residual, base);
}

TEST(Relight, ConsistencyAndOverride) {
  const auto nm = sphere_normal_map(20, 20);
  Rng rng(10);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  std::vector<ShLighting> lights;
  for (int i = 0; i < 4; ++i) lights.push_back(synth::random_positive_light(rng));
  const auto batch = render_batch(nm, albedo, lights);
  auto state = fit_diffuse(batch, nm);
  for (std::size_t i = 0; i < lights.size(); ++i) {
    EXPECT_LT(metrics::smse(fit::relight(state, state.lights[i]), batch.images[i], nm.mask), 1e-3);
  }
  state.spec = SpecularParams{0.5, 10.0};
  const auto glossy = fit::relight(state, lights[0]);
  const auto diffuse_only = fit::relight(state, lights[0], SpecularParams{0.0, 10.0});
  const auto plain = render_diffuse(nm, {state.albedo, 0, 1}, lights[0]);
  for (std::size_t p = 0; p < plain.size(); ++p) EXPECT_TRUE((diffuse_only[p] == plain[p]).all());
  double extra = 0.0;
  for (std::size_t p = 0; p < plain.size(); ++p) extra += (glossy[p] - plain[p]).sum();
  EXPECT_GT(extra, 0.0);
}

TEST(Relight, HeldOutLightingsBeatNoRelightBaseline) {
  const auto nm = synth::object_normal_map(1, 24, 24);
  Rng rng(11);
  const auto albedo = synth::textured_albedo(nm.mask, rng);
  std::vector<ShLighting> train;
  for (int i = 0; i < 4; ++i) train.push_back(synth::random_positive_light(rng));
  const auto batch = render_batch(nm, albedo, train);
  const auto state = fit_diffuse(batch, nm);
  int wins = 0;
  for (int k = 0; k < 6; ++k) {
    const auto light = synth::random_positive_light(rng);
    const auto gt = render_diffuse(nm, {albedo, 0, 1}, light);
    const auto relit = fit::relight(state, light);
    const double m = metrics::mse(relit, gt, nm.mask);
    const double d = metrics::dssim(envlight::gamma_encode(relit), envlight::gamma_encode(gt));
    EXPECT_TRUE(std::isfinite(d));
    wins += m < metrics::mse(batch.images[0], gt, nm.mask);
  }
  EXPECT_GE(wins, 5);
}
