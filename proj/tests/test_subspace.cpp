#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "latent/error.hpp"
#include "latent/subspace.hpp"

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
SubspaceContext context(LatentSpace space = LatentSpace::style) {
  SubspaceContext ctx;
  ctx.criteria = {&gen(), &models(), space, 0, 4};
  ctx.codes = sample_codes(gen(), space, 0, "train", 1);
  return ctx;
}

Matrix frame(std::uint64_t seed) { return orthonormalize(testing::random_matrix(8, 8, seed)).basis; }

Matrix columns(const Matrix& q, std::vector<std::size_t> idx) {
  Matrix m(q.rows(), idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) m.set_col(k, q.col(idx[k]));
  return m;
}

double quad(const Matrix& g, const Vector& v) { return dot(v, g * v); }

}  // namespace

TEST_CASE("gram of a linear map is exact for both methods") {
  const Matrix a = testing::random_matrix(30, 5, 1);
  const DiffMap h = linear_map(a);
  const Vector u = testing::random_vector(5, 2);
  CHECK(gram_direct(h, u).matrix == gram(a));
  for (double alpha : {1e-1, 1e-3})
    CHECK((gram_trick(h, u, alpha).matrix - gram(a)).max_abs() < 1e-10 * gram(a).max_abs());
  CHECK(resolve_method(GramMethod::automatic, h) == GramMethod::trick);
  CHECK(resolve_method(GramMethod::automatic, linear_map(testing::random_matrix(3, 5, 1))) == GramMethod::direct);
  CHECK(resolve_method(GramMethod::direct, h) == GramMethod::direct);
}

TEST_CASE("gram trick on x squared") {
  const double alpha = 1e-3;
  const Gram g = gram_trick(power_map(1, 2), Vector{1.0}, alpha);
  CHECK(g.matrix(0, 0) == doctest::Approx(2.0 * (1.0 + alpha) * (2.0 + alpha)).epsilon(1e-10));
  CHECK(std::abs(g.matrix(0, 0) - 4.0) < 10.0 * alpha);
  CHECK_THROWS_AS(gram_trick(power_map(1, 2), Vector{1.0}, 0.0), ConfigError);
}

TEST_CASE("zero-masked photometry has a zero Gram") {
  const DiffMap h = masked_photometry(gen().image_map(LatentSpace::style), PixelMask(64, 64, false));
  CHECK(gram_direct(h, Vector(60, 0.0)).matrix.max_abs() == 0.0);
}

TEST_CASE("gram trick agrees with direct on a toy criterion") {
  const SubspaceContext ctx = context();
  const DiffMap h = build_criterion({CriterionKind::mp, "mouth", false}, ctx.criteria, ctx.codes[0]);
  const Gram d = gram_direct(h, ctx.codes[0]);
  const Gram t = gram_trick(h, ctx.codes[0], 1e-3);
  CHECK(asymmetry(t.matrix) == 0.0);
  CHECK(sym_eig(d.matrix).values.front() > 0.0);
  CHECK(sym_eig(d.matrix).values.back() > -1e-9 * (1.0 + sym_eig(d.matrix).values.front()));
  CHECK((t.matrix - d.matrix).frobenius() / d.matrix.frobenius() <= 1e-2);
}

TEST_CASE("gram batch sums per-code Grams") {
  const Matrix a = testing::random_matrix(8, 8, 3, "a"), b = testing::random_matrix(8, 8, 4, "b");
  const CriterionBuilder builder = [&](std::span<const double> u) { return u[0] > 0 ? linear_map(a) : linear_map(b); };
  const Vector up(8, 1.0), down(8, -1.0);
  CHECK(gram_batch(builder, {up}, GramMethod::direct).matrix == gram(a));
  CHECK(gram_batch(builder, {up, up}, GramMethod::direct).matrix == 2.0 * gram(a));
  const Gram both = gram_batch(builder, {up, down}, GramMethod::direct);
  CHECK(both.code_count == 2);
  const Vector sum = sym_eig(both.matrix).values, ea = sym_eig(gram(a)).values, eb = sym_eig(gram(b)).values;
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(sum[i] >= ea[i] + eb.back() - 1e-9);
    CHECK(sum[i] >= eb[i] + ea.back() - 1e-9);
  }
  CHECK_THROWS_AS(gram_batch(builder, {}, GramMethod::direct), ConfigError);
}

TEST_CASE("eigen_split thresholds relative to the top eigenvalue") {
  const EigenSplit id = eigen_split(Matrix::identity(3), 0.5);
  CHECK(id.V.cols() == 3);
  CHECK(id.W.cols() == 0);
  const EigenSplit d = eigen_split(Matrix(2, 2, {1.0, 0.0, 0.0, 1e-6}), 1e-3);
  REQUIRE(d.V.cols() == 1);
  CHECK(std::abs(d.V(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(d.W(1, 0)) == doctest::Approx(1.0));
  const EigenSplit z = eigen_split(Matrix(4, 4), 1e-3);
  CHECK(z.V.cols() == 0);
  CHECK(z.W.cols() == 4);
  CHECK_THROWS_AS(eigen_split(Matrix::identity(2), 1.0), ConfigError);
}

TEST_CASE("intersect_suppress edge cases") {
  const Matrix b = frame(1).col_range(0, 5);
  CHECK(max_principal_angle_sin(intersect_suppress(b, Matrix(8, 8), 1e-3), b) < 1e-12);
  Matrix g(8, 8);
  g(0, 0) = 2.0;
  g(1, 1) = 1.0;
  const Matrix rest = intersect_suppress(Matrix::identity(8), g, 1e-3);
  Matrix expected(8, 6);
  for (std::size_t k = 0; k < 6; ++k) expected(k + 2, k) = 1.0;
  CHECK(max_principal_angle_sin(rest, expected) < 1e-12);
  CHECK_THROWS_AS(intersect_suppress(Matrix::identity(8), Matrix::identity(8), 1e-3, "suppress x"),
                  EmptyIntersectionError);
}

TEST_CASE("intersection of known invariant subspaces") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix q = frame(seed);
    const Matrix g0 = testing::gram_from_frame(q, {5.0, 3.0, 2.0});
    const Matrix q1 = columns(q, {2, 3, 4, 5, 0, 1, 6, 7});
    const Matrix g1 = testing::gram_from_frame(q1, {4.0, 3.0, 2.0, 1.0});
    const Matrix b = intersect_suppress(Matrix::identity(8), g1, 3e-3);
    CHECK(orthonormality_defect(b) < 1e-12);
    const SortedBasis s = sort_by_activation(b, g0, 3e-3);
    REQUIRE(s.basis.cols() == 2);
    CHECK(max_principal_angle_sin(s.basis, columns(q, {0, 1})) < 1e-8);
    CHECK(std::abs(dot(s.basis.col(0), q.col(0))) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.activation[0] == doctest::Approx(5.0));
    CHECK(s.activation[1] == doctest::Approx(3.0));

    const Matrix v0 = eigen_split(g0, 3e-3).V, w1 = eigen_split(g1, 3e-3).W;
    const OrthoBasis prior = orthonormalize(w1 * (w1.transpose() * v0));
    CHECK(max_principal_angle_sin(s.basis, prior.basis) < 1e-8);
  }
}

TEST_CASE("sorted basis matches the prior-work formula on full-rank Grams") {
  const Matrix q = frame(11), p = frame(12);
  const Matrix g0 = testing::gram_from_frame(q, {10, 8, 6, 5, 4, 3, 2, 1});
  const Matrix g1 = testing::gram_from_frame(p, {9, 7, 5, 3, 1});
  const Matrix w1 = eigen_split(g1, 1e-3).W;
  REQUIRE(w1.cols() == 3);
  const SortedBasis s = sort_by_activation(w1, g0, 1e-3);
  const OrthoBasis prior = orthonormalize(w1 * (w1.transpose() * eigen_split(g0, 1e-3).V));
  CHECK(max_principal_angle_sin(s.basis, prior.basis) < 1e-8);
}

TEST_CASE("sort_by_activation with the identity basis recovers V") {
  const Matrix g0 = testing::gram_from_frame(frame(3), {4.0, 2.0, 1.0, 1e-5});
  const SortedBasis s = sort_by_activation(Matrix::identity(8), g0, 1e-3);
  CHECK(max_principal_angle_sin(s.basis, eigen_split(g0, 1e-3).V) < 1e-10);
  CHECK_THROWS_AS(sort_by_activation(Matrix::identity(8), Matrix(8, 8), 1e-3), EmptyIntersectionError);
}

TEST_CASE("first sorted column maximizes the activation quadratic form") {
  const Matrix q = frame(21);
  const Matrix g0 = testing::gram_from_frame(q, {9, 7, 5, 4, 3, 2, 1.5, 1});
  const Matrix b = q.col_range(2, 5);
  const SortedBasis s = sort_by_activation(b, g0, 1e-3);
  const double top = quad(g0, s.basis.col(0));
  for (std::size_t i = 0; i < s.activation.size(); ++i)
    CHECK(quad(g0, s.basis.col(i)) == doctest::Approx(s.activation[i]).epsilon(1e-10));
  CHECK(top == doctest::Approx(s.activation.front()));
  CHECK(std::is_sorted(s.activation.rbegin(), s.activation.rend()));
  CounterRng rng(7, "argmax");
  for (int t = 0; t < 1000; ++t) {
    Vector v = b * rng.normal_vector(b.cols());
    v = scaled(v, 1.0 / norm(v));
    REQUIRE(quad(g0, v) <= (1.0 + 1e-9) * top);
  }
}

TEST_CASE("suppress order does not change a well-conditioned intersection") {
  const Matrix q = frame(31);
  const Matrix g1 = testing::gram_from_frame(columns(q, {0, 1, 2, 3, 4, 5, 6, 7}), {3.0, 2.0});
  const Matrix g2 = testing::gram_from_frame(columns(q, {2, 3, 0, 1, 4, 5, 6, 7}), {5.0, 1.0});
  const Matrix g0 = testing::gram_from_frame(frame(32), {8, 7, 6, 5, 4, 3, 2, 1});
  const Matrix a = sort_by_activation(intersect_suppress(intersect_suppress(Matrix::identity(8), g1, 3e-3), g2, 3e-3), g0, 3e-3).basis;
  const Matrix b = sort_by_activation(intersect_suppress(intersect_suppress(Matrix::identity(8), g2, 3e-3), g1, 3e-3), g0, 3e-3).basis;
  CHECK(a.cols() == 4);
  CHECK(max_principal_angle_sin(a, b) < 1e-6);
}

TEST_CASE("mouth photometry subspace satisfies the suppression guarantee") {
  const SubspaceContext ctx = context();
  const FormulationPlan plan = resolve_plan("mouth_photometry");
  const std::vector<Gram> grams = stage_grams(plan, ctx);
  const Subspace s = assemble_subspace(plan, grams, gen().spec(LatentSpace::style));
  REQUIRE(s.dim() >= 1);
  CHECK(orthonormality_defect(s.basis) < 1e-10);
  CHECK(s.formulation == print_plan(plan));
  REQUIRE(s.provenance.size() == 2);
  CHECK(s.provenance[1].role == Role::suppress);
  const double lambda0 = sym_eig(grams[1].matrix).values.front();
  CHECK(s.provenance[1].lambda0 == lambda0);
  double prev = INFINITY;
  for (std::size_t k = 0; k < s.dim(); ++k) {
    const Vector v = s.basis.col(k);
    CHECK(quad(grams[1].matrix, v) < 3e-3 * lambda0);
    const double act = quad(grams[0].matrix, v);
    CHECK(act <= prev * (1.0 + 1e-9));
    prev = act;
  }
}

TEST_CASE("activate-only plan equals the eigen split") {
  const SubspaceContext ctx = context();
  const FormulationPlan plan = parse_plan("activate: mp[lip]");
  const std::vector<Gram> grams = stage_grams(plan, ctx);
  const Subspace s = assemble_subspace(plan, grams, gen().spec(LatentSpace::style));
  CHECK(max_principal_angle_sin(s.basis, eigen_split(grams[0].matrix, 3e-3).V) < 1e-10);
}

TEST_CASE("adding an identity stage never grows the subspace") {
  for (auto [plain, with_id, space] : {std::tuple{"mouth_photometry", "mouth_photometry_id", LatentSpace::style},
                                       std::tuple{"mouth_shape", "mouth_shape_id", LatentSpace::style},
                                       std::tuple{"face_boundary", "face_boundary_id", LatentSpace::style}}) {
    const SubspaceContext ctx = context(space);
    const Subspace a = build_subspace(resolve_plan(plain), ctx);
    const Subspace b = build_subspace(resolve_plan(with_id), ctx);
    CHECK_MESSAGE(b.dim() <= a.dim(), plain << " " << a.dim() << " vs " << b.dim());
  }
}

TEST_CASE("identical activate and suppress criteria leave nothing") {
  const SubspaceContext ctx = context();
  try {
    build_subspace(parse_plan("activate: mp[mouth]; suppress: mp[mouth]"), ctx);
    FAIL("expected an empty intersection");
  } catch (const EmptyIntersectionError& e) {
    CHECK(std::string(e.what()).find("activate mp[mouth]") != std::string::npos);
    CHECK(e.stage_epsilon() == 3e-3);
  }
}

TEST_CASE("perturb and projector") {
  const Matrix s = frame(41).col_range(0, 3);
  const Vector u = testing::random_vector(8, 1);
  CHECK(perturb(u, s, 1, 0.0) == u);
  const Vector plus = perturb(u, s, 2, 2.5), minus = perturb(u, s, 2, -2.5);
  for (std::size_t i = 0; i < 8; ++i) CHECK(plus[i] + minus[i] == doctest::Approx(2.0 * u[i]));
  CHECK_THROWS_AS(perturb(u, s, 3, 1.0), DimensionError);
  CHECK_THROWS_AS(perturb(Vector(7, 0.0), s, 0, 1.0), DimensionError);
  const Matrix p = projector(s);
  CHECK((p * p - p).max_abs() < 1e-10);
  CHECK(asymmetry(p) < 1e-10);
}

TEST_CASE("mouth photometry component changes the mouth more than the rest") {
  const SubspaceContext ctx = context();
  const Subspace s = build_subspace(resolve_plan("mouth_photometry"), ctx);
  const Vector u = sample_codes(gen(), LatentSpace::style, 0, "test", 1)[0];
  const Image a = gen().render(u), b = gen().render(perturb(u, s.basis, 0, 10.0));
  const PixelMask mouth = models().parse(a).mask("mouth");
  double in = 0, out = 0;
  for (std::size_t p = 0; p < mouth.bits.size(); ++p)
    for (int c = 0; c < 3; ++c) (mouth.test(p) ? in : out) += std::abs(b.values[3 * p + c] - a.values[3 * p + c]);
  in /= 3.0 * mouth.count();
  out /= 3.0 * (mouth.bits.size() - mouth.count());
  CHECK(in > 5.0 * out);
}

TEST_CASE("method names") {
  for (auto m : {GramMethod::direct, GramMethod::trick, GramMethod::automatic}) CHECK(parse_gram_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_gram_method("exact"), ConfigError);
}
