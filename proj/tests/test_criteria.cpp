#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "latent/criteria.hpp"
#include "latent/error.hpp"

using namespace latent;

namespace {

const ToyGenerator& gen() {
  static const ToyGenerator g;
  return g;
}
const AnalysisModels& models() {
  static const AnalysisModels m;
  return m;
}
CriterionContext context() { return {&gen(), &models(), LatentSpace::style, 0, 4}; }
Vector code(std::size_t i = 0) { return sample_codes(gen(), LatentSpace::style, 0, "criteria", i + 1)[i]; }

double orient(std::span<const double> p, std::size_t a, std::size_t b, std::size_t c) {
  return (p[2 * b] - p[2 * a]) * (p[2 * c + 1] - p[2 * a + 1]) - (p[2 * b + 1] - p[2 * a + 1]) * (p[2 * c] - p[2 * a]);
}

Image shifted(const Image& img, int dx, int dy) {
  Image out(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      const int sr = std::clamp(r - dy, 0, img.height - 1), sc = std::clamp(c - dx, 0, img.width - 1);
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = img.at(sr, sc, ch);
    }
  return out;
}

DiffMap constant_detector(const Vector& q, std::size_t in) {
  return DiffMap(
      in, q.size(), [q](std::span<const double>) { return q; },
      [q, in](std::span<const double>) {
        return Linearization{q, [in](std::span<const double>) { return Vector(in, 0.0); }};
      },
      "frozen");
}

}  // namespace

TEST_CASE("masked photometry with full and empty masks") {
  const DiffMap g = gen().image_map(LatentSpace::style);
  const Vector u = code();
  CHECK(masked_photometry(g, PixelMask(64, 64, true)).evaluate(u) == g.evaluate(u));
  const Vector zero = masked_photometry(g, PixelMask(64, 64, false)).evaluate(u);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));
  CHECK_THROWS_AS(masked_photometry(g, PixelMask(32, 32, true)), DimensionError);
}

TEST_CASE("mouth photometry is supported on the mouth mask") {
  const ReferenceFrame ref = reference_frame(context(), code());
  const DiffMap h = build_criterion({CriterionKind::mp, "mouth", false}, context(), ref);
  const PixelMask m = ref.parse.mask("mouth");
  const Vector y = h.evaluate(code());
  for (std::size_t p = 0; p < m.bits.size(); ++p)
    if (!m.test(p))
      for (int c = 0; c < 3; ++c) REQUIRE(y[3 * p + c] == 0.0);
  CHECK(region_mask(ref, {CriterionKind::mp, "mouth", true}) == m.complement());
}

TEST_CASE("triangulate small point sets") {
  const Vector tri = {0, 0, 4, 0, 0, 3};
  const DelaunayMesh one = triangulate(tri);
  REQUIRE(one.facets.size() == 1);
  CHECK(orient(tri, one.facets[0][0], one.facets[0][1], one.facets[0][2]) > 0.0);
  CHECK(facet_area(tri, one, 0) == doctest::Approx(6.0));

  const Vector quad = {0, 0, 4, 0, 4, 3.5, 0, 3};
  CHECK(triangulate(quad).facets.size() == 2);
  CHECK_THROWS_AS(triangulate(Vector{0, 0, 1, 1, 2, 2}), NumericError);
  CHECK_THROWS_AS(triangulate(Vector{0, 0, 1, 1}), NumericError);
}

TEST_CASE("triangulation has empty circumcircles") {
  const Vector pts = testing::random_vector(50, 3, 10.0);
  const DelaunayMesh mesh = triangulate(pts);
  CHECK(mesh.facets.size() >= 25);
  for (const auto& f : mesh.facets) {
    REQUIRE(orient(pts, f[0], f[1], f[2]) > 0.0);
    const double ax = pts[2 * f[0]], ay = pts[2 * f[0] + 1];
    const double bx = pts[2 * f[1]], by = pts[2 * f[1] + 1];
    const double cx = pts[2 * f[2]], cy = pts[2 * f[2] + 1];
    const double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    const double ox = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d;
    const double oy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d;
    const double r2 = (ax - ox) * (ax - ox) + (ay - oy) * (ay - oy);
    for (std::size_t k = 0; k < 25; ++k) {
      if (k == f[0] || k == f[1] || k == f[2]) continue;
      const double dx = pts[2 * k] - ox, dy = pts[2 * k + 1] - oy;
      REQUIRE(dx * dx + dy * dy >= r2 * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("bary_point is the convex combination of the facet corners") {
  const Vector tri = {0, 0, 4, 0, 0, 3};
  const DelaunayMesh mesh = triangulate(tri);
  const auto& f = mesh.facets[0];
  const std::array<double, 3> c = {0.2, 0.3, 0.5};
  const auto p = bary_point(tri, mesh, 0, c);
  double x = 0, y = 0;
  for (int k = 0; k < 3; ++k) {
    x += c[k] * tri[2 * f[k]];
    y += c[k] * tri[2 * f[k] + 1];
  }
  CHECK(p[0] == doctest::Approx(x));
  CHECK(p[1] == doctest::Approx(y));
  CHECK_THROWS_AS(bary_point(tri, mesh, 1, c), DimensionError);
}

TEST_CASE("bary samples lie in the simplex and scale with area") {
  const Vector tri = {0, 0, 20, 0, 0, 20};
  const DelaunayMesh mesh = triangulate(tri);
  const BarySampleSet s = bary_samples(mesh, tri, 1);
  CHECK(s.size() == 100);
  for (const auto& b : s) {
    for (double c : b.c) REQUIRE(c >= -1e-12);
    REQUIRE(b.c[0] + b.c[1] + b.c[2] == doctest::Approx(1.0));
  }
  CHECK(bary_samples(mesh, tri, 1).front().c == s.front().c);
  CHECK(bary_samples(mesh, tri, 2).front().c != s.front().c);
}

TEST_CASE("aligned photometry is nearly invariant to integer shifts") {
  const Image img = gen().render(code(1));
  const Vector q = models().landmark_detector().evaluate(img.values);
  const DelaunayMesh mesh = triangulate(q);
  const BarySampleSet samples = filter_samples(bary_samples(mesh, q, 0), mesh, q, models().parse(img).mask("face"));
  REQUIRE(!samples.empty());
  const DiffMap ap = aligned_photometry_image(models().landmark_detector(), mesh, samples, 64, 64);
  const DiffMap fixed = aligned_photometry_image(constant_detector(q, img.values.size()), mesh, samples, 64, 64);
  const Vector base = ap.evaluate(img.values);
  CHECK(base == fixed.evaluate(img.values));
  for (int s = 1; s <= 3; ++s) {
    const Image moved = shifted(img, s, s);
    const double aligned = norm(sub(ap.evaluate(moved.values), base));
    const double unaligned = norm(sub(fixed.evaluate(moved.values), base));
    CHECK_MESSAGE(aligned <= 0.05 * unaligned, "shift " << s << ": " << aligned << " vs " << unaligned);
  }
}

TEST_CASE("bilinear sampling at pixel centers and midpoints") {
  Image img(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) img.at(r, c, 0) = r * 4 + c;
  CHECK(bilinear_sample(img.values, 4, 4, 1.0, 2.0)[0] == 9.0);
  CHECK(bilinear_sample(img.values, 4, 4, 1.5, 1.5)[0] == doctest::Approx(7.5));
  CHECK(bilinear_sample(img.values, 4, 4, -3.0, 1.0)[0] == bilinear_sample(img.values, 4, 4, 0.5, 1.0)[0]);
}

TEST_CASE("masked average color and residual invariances") {
  const Image img = gen().render(code(2));
  const PixelMask mask = models().parse(img).mask("skin");
  const DiffMap id = identity_map(img.values.size());
  const DiffMap mac = masked_avg_color(id, mask), res = masked_residual(id, mask);
  Image lifted = img;
  const double shift[3] = {0.125, -0.0625, 0.25};
  for (std::size_t p = 0; p < mask.bits.size(); ++p)
    if (mask.test(p))
      for (int c = 0; c < 3; ++c) lifted.values[3 * p + c] += shift[c];
  const Vector a = mac.evaluate(img.values), b = mac.evaluate(lifted.values);
  for (int c = 0; c < 3; ++c) CHECK(b[c] - a[c] == doctest::Approx(shift[c]).epsilon(1e-12));
  CHECK(relative_error(res.evaluate(lifted.values), res.evaluate(img.values)) < 1e-12);
  CHECK(res.out_dim() == 3 * mask.count());
  CHECK_THROWS_AS(masked_avg_color(id, PixelMask(64, 64, false)), ConfigError);
}

TEST_CASE("frequency split sums back to the image bitwise") {
  const DiffMap g = gen().image_map(LatentSpace::style);
  const FrequencySplit split = frequency_split(g, 64, 64, 4);
  for (std::size_t i = 0; i < 3; ++i) {
    const Vector u = code(i);
    const Vector x = g.evaluate(u), lo = split.low.evaluate(u), hi = split.high.evaluate(u);
    for (std::size_t k = 0; k < x.size(); ++k) REQUIRE(lo[k] + hi[k] == x[k]);
  }
  CHECK_THROWS_AS(frequency_split(g, 64, 64, 5), ConfigError);
}

TEST_CASE("low pass of a constant image is constant") {
  const Vector flat(64 * 64 * 3, 0.375);
  const Vector lo = low_pass(flat, 64, 64, 4);
  for (double v : lo) REQUIRE(v == 0.375);
}

TEST_CASE("low pass of an impulse") {
  Vector x(64 * 64 * 3, 0.0);
  const int row = 21, col = 37;  // inside block (5, 9)
  x[(row * 64 + col) * 3 + 1] = 1.0;
  const Vector lo = low_pass(x, 64, 64, 4);
  double total = 0.0;
  for (std::size_t i = 1; i < lo.size(); i += 3) total += lo[i];
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  const double center = 0.875 * 0.875 / 16.0;
  for (int r : {21, 22})
    for (int c : {37, 38}) CHECK(lo[(r * 64 + c) * 3 + 1] == doctest::Approx(center).epsilon(1e-12));
  CHECK(lo[(row * 64 + col) * 3] == 0.0);
  CHECK(lo[(2 * 64 + 2) * 3 + 1] == 0.0);
}

TEST_CASE("low pass adjoint") {
  const Vector x = testing::random_vector(32 * 32 * 3, 1), y = testing::random_vector(32 * 32 * 3, 2);
  CHECK(dot(low_pass(x, 32, 32, 4), y) == doctest::Approx(dot(x, low_pass_adjoint(y, 32, 32, 4))).epsilon(1e-10));
}

TEST_CASE("criterion labels and kinds") {
  CHECK(CriterionRef{CriterionKind::mp, "mouth", true}.label() == "mp[~mouth]");
  CHECK(CriterionRef{CriterionKind::id, "", false}.label() == "id");
  for (auto k : {CriterionKind::mp, CriterionKind::fl, CriterionKind::ap, CriterionKind::id, CriterionKind::mac,
                 CriterionKind::res, CriterionKind::low, CriterionKind::high})
    CHECK(parse_criterion_kind(to_string(k)) == k);
  CHECK_FALSE(parse_criterion_kind("xyz").has_value());
  CHECK_THROWS_AS(build_criterion({CriterionKind::mp, "", false}, context(), code()), ConfigError);
}

TEST_CASE("built criteria match finite differences") {
  const Vector u = code(4);
  const ReferenceFrame ref = reference_frame(context(), u);
  const CriterionRef crits[] = {{CriterionKind::mp, "mouth", false}, {CriterionKind::fl, "mouth", false},
                                {CriterionKind::ap, "face", false},  {CriterionKind::id, "", false},
                                {CriterionKind::mac, "lip", false},  {CriterionKind::res, "lip", true},
                                {CriterionKind::low, "", false},     {CriterionKind::high, "", false}};
  std::uint64_t seed = 0;
  for (const auto& c : crits) {
    const DiffMap h = build_criterion(c, context(), ref);
    CHECK_MESSAGE(testing::vjp_error(h, u, ++seed) < 1e-4, c.label());
  }
}
