#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "hlsynth/shading.hpp"
#include "hlsynth/testkit.hpp"

using namespace hlsynth;

TEST(Fresnel, FixedPoints) {
  EXPECT_EQ(static_cast<float>(fresnel_schlick(1.0, 0.04)), 0.04f);
  EXPECT_EQ(fresnel_schlick(0.0, 0.04), 1.0);
  EXPECT_EQ(fresnel_schlick(0.0, 0.7), 1.0);
  EXPECT_NEAR(fresnel_schlick(0.5, 0.04), 0.07, 1e-15);
}

TEST(Fresnel, MonotoneAndBounded) {
  for (double r0 : {0.0, 0.04, 0.5, 1.0}) {
    double prev = 2.0;
    for (int i = 0; i <= 1000; ++i) {
      const double r = fresnel_schlick(i / 1000.0, r0);
      EXPECT_LE(r, prev);
      EXPECT_GE(r, r0 - 1e-15);
      EXPECT_LE(r, 1.0);
      prev = r;
    }
  }
}

TEST(Specular, ScalarExamples) {
  ShadingParams p;
  p.k_h = 1.0;
  p.shininess = 10.0;
  EXPECT_NEAR(specular_intensity(1.0, 1.0, p), 0.04, 1e-15);
  EXPECT_EQ(specular_intensity(0.0, 1.0, p), 0.0);
  EXPECT_EQ(specular_intensity(-0.3, 0.5, p), 0.0);
  EXPECT_NEAR(specular_intensity(0.9, 1.0, p), 0.04 * std::pow(0.9, 10), 1e-15);
  EXPECT_NEAR(specular_intensity(0.9, 1.0, p), 0.013947, 1e-6);
}

TEST(Params, Validation) {
  ShadingParams p;
  EXPECT_NO_THROW(p.validate());
  p.k_h = 0.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.shininess = -1.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.r0 = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.light = Vec3(NAN, 0, 0);
  EXPECT_THROW(p.validate(), Error);

  SamplingRanges r;
  EXPECT_NO_THROW(r.validate());
  r.k_h = {0.8, 0.2};
  EXPECT_THROW(r.validate(), Error);
  r = {};
  r.light_min = Vec3(0, 0, 1);
  EXPECT_THROW(r.validate(), Error);
}

TEST(Render, AgreesWithOracle) {
  std::mt19937_64 rng(99);
  SamplingRanges ranges;
  ranges.seed = 99;
  for (ViewConvention conv : {ViewConvention::kTowardCamera, ViewConvention::kAwayFromCamera}) {
    double worst = 0.0;
    for (int t = 0; t < 60; ++t) {
      const auto scene = testkit::random_scene(rng, 32, 24);
      const ShadingParams p = sample_params(ranges, t);
      const ScalarMap h =
          blinn_phong_highlight(direction_field(scene.geometry, p.light, conv), scene.geometry, p);
      for (int y = 0; y < 24; ++y) {
        for (int x = 0; x < 32; ++x) {
          worst = std::max(worst, std::abs(testkit::brute_force_highlight(scene, p, x, y, conv) -
                                           h(x, y)));
        }
      }
    }
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(Render, PaperConventionIsDarkOnCameraFacingSurfaces) {
  const auto scene = testkit::make_plane_scene({0, 0, 1}, {0, 0, -1}, {16, 16, 8, 8}, 16, 16);
  ShadingParams p;
  p.light = Vec3(0, 0, 0);
  const ScalarMap h = blinn_phong_highlight(
      direction_field(scene.geometry, p.light, ViewConvention::kAwayFromCamera), scene.geometry, p);
  for (float v : h.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Render, LightBehindSurfaceGivesZero) {
  const auto scene = testkit::make_plane_scene({0, 0, 1}, {0, 0, -1}, {8, 8, 4, 4}, 8, 8);
  ShadingParams p;
  p.light = Vec3(0, 0, 3);
  const ScalarMap h = blinn_phong_highlight(direction_field(scene.geometry, p.light),
                                            scene.geometry, p);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      EXPECT_EQ(h(x, y), 0.0f);
      EXPECT_EQ(testkit::brute_force_highlight(scene, p, x, y), 0.0);
    }
  }
}

TEST(Render, ZeroOnInvalidPixels) {
  const auto scene = testkit::make_sphere_scene(0.3, {0, 0, 2}, {32, 32, 16, 16}, 32, 32);
  ShadingParams p;
  p.light = Vec3(0.1, 0.1, 0);
  const ScalarMap h = blinn_phong_highlight(direction_field(scene.geometry, p.light),
                                            scene.geometry, p);
  int invalid = 0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (scene.geometry.valid(x, y)) continue;
      ++invalid;
      EXPECT_EQ(h(x, y), 0.0f);
    }
  }
  EXPECT_GT(invalid, 0);
}

TEST(Render, DoublingKhDoublesH) {
  const auto scene = testkit::make_sphere_scene(0.5, {0, 0, 2}, {48, 48, 24, 24}, 48, 48);
  ShadingParams p;
  p.k_h = 0.8;
  p.shininess = 30;
  p.light = Vec3(0.2, -0.1, 0.1);
  const DirectionField dirs = direction_field(scene.geometry, p.light);
  const ScalarMap h1 = blinn_phong_highlight(dirs, scene.geometry, p, false);
  p.k_h *= 2.0;
  const ScalarMap h2 = blinn_phong_highlight(dirs, scene.geometry, p, false);
  for (std::size_t i = 0; i < h1.pixel_count(); ++i) {
    EXPECT_FLOAT_EQ(h2.values()[i], 2.0f * h1.values()[i]);
  }
}

TEST(Render, MirrorConfigurationMaximizesH) {
  // One surface point with a tilted normal; the light sweeps a unit sphere
  // around it.
  const auto scene = testkit::make_plane_scene({0, 0, 2}, {0.3, 0, -1}, {1, 1, 0, 0}, 1, 1);
  const Vec3 X = scene.geometry.points(0, 0);
  const Vec3 n = scene.geometry.normals(0, 0);
  const Vec3 v = -X.normalized();
  const Vec3 mirror = (2.0 * n.dot(v) * n - v).normalized();
  ShadingParams p;
  p.shininess = 400;
  double best = -1.0;
  Vec3 best_dir;
  for (int i = 0; i <= 180; ++i) {
    for (int j = 0; j < 360; ++j) {
      const double th = i * M_PI / 180.0, ph = j * M_PI / 180.0;
      const Vec3 dir(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      p.light = X + dir;
      const double h = blinn_phong_highlight(direction_field(scene.geometry, p.light),
                                             scene.geometry, p)(0, 0);
      if (h > best) {
        best = h;
        best_dir = dir;
      }
    }
  }
  const double err = std::acos(std::min(1.0, best_dir.dot(mirror))) * 180.0 / M_PI;
  EXPECT_LT(err, 2.0);
  p.light = X + mirror;
  const double at_mirror = blinn_phong_highlight(direction_field(scene.geometry, p.light),
                                                 scene.geometry, p)(0, 0);
  EXPECT_GE(at_mirror, best * (1.0 - 1e-3));
}

TEST(Render, HigherShininessShrinksHighlightArea) {
  const auto scene = testkit::make_sphere_scene(0.5, {0, 0, 2}, {96, 96, 48, 48}, 96, 96);
  ShadingParams p;
  p.k_h = 1.0;
  p.light = Vec3(0.1, -0.1, 0.0);
  const DirectionField dirs = direction_field(scene.geometry, p.light);
  const double theta = 0.01;
  long prev = std::numeric_limits<long>::max();
  for (double s : {5.0, 20.0, 50.0, 100.0, 200.0, 400.0}) {
    p.shininess = s;
    const ScalarMap h = blinn_phong_highlight(dirs, scene.geometry, p);
    long area = 0;
    for (float v : h.values()) area += v > theta;
    EXPECT_LT(area, prev) << s;
    EXPECT_GT(area, 0) << s;
    prev = area;
  }
}

TEST(Sampling, DegenerateRangesGiveTheUniquePoint) {
  SamplingRanges r;
  r.k_h = {0.5, 0.5};
  r.shininess = {42, 42};
  r.light_min = r.light_max = Vec3(0.1, -0.2, 0.3);
  for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
    r.seed = seed;
    const ShadingParams p = sample_params(r, seed * 3);
    EXPECT_EQ(p.k_h, 0.5);
    EXPECT_EQ(p.shininess, 42);
    EXPECT_EQ(p.light, Vec3(0.1, -0.2, 0.3));
  }
}

TEST(Sampling, DeterministicAndDistinct) {
  SamplingRanges r;
  r.seed = 2024;
  std::set<double> seen;
  const double first = sample_params(r, 0).k_h;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const ShadingParams a = sample_params(r, i);
    const ShadingParams b = sample_params(r, i);
    EXPECT_EQ(a.k_h, b.k_h);
    EXPECT_EQ(a.shininess, b.shininess);
    EXPECT_EQ(a.light, b.light);
    EXPECT_GE(a.k_h, 0.2);
    EXPECT_LE(a.k_h, 1.0);
    EXPECT_GE(a.shininess, 20.0);
    EXPECT_LE(a.shininess, 400.0);
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(a.light[c], r.light_min[c]);
      EXPECT_LE(a.light[c], r.light_max[c]);
    }
    EXPECT_EQ(a.r0, 0.04);
    seen.insert(a.k_h);
  }
  EXPECT_EQ(seen.size(), 100u);
  r.seed = 2025;
  EXPECT_NE(sample_params(r, 0).k_h, first);
}

TEST(Sampling, KhMeanOverManyDraws) {
  SamplingRanges r;
  r.seed = 1;
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) sum += sample_params(r, i).k_h;
  EXPECT_NEAR(sum / 1e5, 0.6, 0.01);
}
