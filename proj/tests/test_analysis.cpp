#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "latent/analysis.hpp"
#include "latent/error.hpp"

using namespace latent;

namespace {

const ToyGenerator& gen() {
  static const ToyGenerator g;
  return g;
}

Image face(std::size_t i = 0) { return gen().render(sample_codes(gen(), LatentSpace::style, 0, "analysis", i + 1)[i]); }

/// Content moved by (dx, dy) pixels; uncovered pixels copy the nearest edge.
Image shifted(const Image& img, int dx, int dy) {
  Image out(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      const int sr = std::clamp(r - dy, 0, img.height - 1), sc = std::clamp(c - dx, 0, img.width - 1);
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = img.at(sr, sc, ch);
    }
  return out;
}

}  // namespace

TEST_CASE("parse labels partition the image") {
  const AnalysisModels models;
  const ParseResult p = models.parse(face());
  CHECK(p.labels.size() == 64u * 64u);
  std::size_t total = 0;
  for (const char* label : {"skin", "left_eye", "right_eye", "nose", "inner_mouth", "lip", "hair", "background"})
    total += p.mask(label).count();
  CHECK(total == 64u * 64u);
  CHECK(p.mask("mouth").count() == p.mask("lip").count() + p.mask("inner_mouth").count());
  CHECK(p.mask("eye").count() == p.mask("left_eye").count() + p.mask("right_eye").count());
  CHECK(p.mask("all").count() == 64u * 64u);
  CHECK(p.mask("lip").count() > 0);
  CHECK(p.mask("face").count() + p.mask("hair").count() + p.mask("background").count() == 64u * 64u);
  CHECK_THROWS_AS(p.mask("ears"), ConfigError);
}

TEST_CASE("landmark groups") {
  CHECK(landmark_group("all").count() == kLandmarkCount);
  CHECK(landmark_group("mouth").count() == kPointsPerRegion);
  CHECK(landmark_group("eye").count() == 2 * kPointsPerRegion);
  CHECK(landmark_group("mouth").complement().count() == kLandmarkCount - kPointsPerRegion);
}

TEST_CASE("landmarks follow integer shifts of the image") {
  const AnalysisModels models;
  const DiffMap det = models.landmark_detector();
  const Image img = face();
  const Vector base = det.evaluate(img.values);
  for (int s = 1; s <= 3; ++s) {
    const Vector moved = det.evaluate(shifted(img, s, -s).values);
    double worst = 0.0;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      worst = std::max(worst, std::abs(moved[2 * i] - base[2 * i] - s));
      worst = std::max(worst, std::abs(moved[2 * i + 1] - base[2 * i + 1] + s));
    }
    CHECK_MESSAGE(worst < 0.1, "shift " << s << " error " << worst);
  }
}

TEST_CASE("landmark centroids lie inside their parsed regions") {
  const AnalysisModels models;
  const Image img = face(1);
  const Vector lm = models.landmark_detector().evaluate(img.values);
  const ParseResult p = models.parse(img);
  const std::size_t mouth = static_cast<std::size_t>(LandmarkRegion::mouth) * kPointsPerRegion;
  const int col = static_cast<int>(std::lround(lm[2 * mouth])), row = static_cast<int>(std::lround(lm[2 * mouth + 1]));
  CHECK(p.mask("mouth").test(static_cast<std::size_t>(row) * 64 + col));
}

TEST_CASE("degenerate landmark region is reported") {
  const AnalysisModels models;
  Image bg(64, 64);
  const Palette& pal = template_palette();
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c)
      for (int ch = 0; ch < 3; ++ch) bg.at(r, c, ch) = pal.background[ch];
  CHECK_THROWS_AS(models.landmark_detector().evaluate(bg.values), DegenerateLandmarkError);
}

TEST_CASE("identity embedding is a unit vector and tells faces apart") {
  const AnalysisModels models;
  const DiffMap id = models.identity_embedder();
  const Image a = face(0), b = face(2);
  const Vector ea = id.evaluate(a.values), eb = id.evaluate(b.values);
  CHECK(ea.size() == kIdentityDim);
  CHECK(norm(ea) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dot(ea, eb) < 0.99);

  Image noisy = a;
  const Vector n = testing::random_vector(noisy.values.size(), 5, 0.002);
  for (std::size_t i = 0; i < n.size(); ++i) noisy.values[i] += n[i];
  CHECK(dot(ea, id.evaluate(noisy.values)) > 0.99);
  CHECK_THROWS_AS(id.evaluate(Image(64, 64, 0.5).values), NumericError);
}

TEST_CASE("lip_redness is affine in the window and zero-mean on gray") {
  const AnalysisModels models;
  const DiffMap f = models.classifier("lip_redness");
  CHECK(f.evaluate(Image(64, 64, 0.3).values)[0] == doctest::Approx(-8.0));
  const auto win = models.lip_window();
  CHECK(win == std::array<int, 4>{42, 50, 23, 41});
  Image red(64, 64, 0.0);
  for (int r = win[0]; r < win[1]; ++r)
    for (int c = win[2]; c < win[3]; ++c) red.at(r, c, 0) = 1.0;
  CHECK(f.evaluate(red.values)[0] == doctest::Approx(12.0));
  red.at(0, 0, 0) = 1.0;
  CHECK(f.evaluate(red.values)[0] == doctest::Approx(12.0));
  CHECK_THROWS_AS(models.classifier("smile"), ConfigError);
}

TEST_CASE("analysis models match finite differences") {
  const AnalysisModels models;
  const Vector x = face(3).values;
  CHECK(testing::directional_error(models.landmark_detector(), x, 1) < 1e-5);
  CHECK(testing::directional_error(models.identity_embedder(), x, 2) < 1e-5);
  for (const auto& name : AnalysisModels::classifier_names())
    CHECK_MESSAGE(testing::directional_error(models.classifier(name), x, 3) < 1e-5, name);
}

TEST_CASE("wrong image length is rejected") {
  const AnalysisModels models;
  CHECK_THROWS_AS(models.landmark_detector().evaluate(Vector(10, 0.0)), DimensionError);
}
