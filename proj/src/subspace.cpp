#include "latent/subspace.hpp"

#include <cmath>

#include "latent/error.hpp"
#include "latent/parallel.hpp"

namespace latent {

std::string_view to_string(GramMethod method) {
  switch (method) {
    case GramMethod::direct:
      return "direct";
    case GramMethod::trick:
      return "trick";
    case GramMethod::automatic:
      return "auto";
  }
  return "auto";
}

GramMethod parse_gram_method(std::string_view name) {
  if (name == "direct") return GramMethod::direct;
  if (name == "trick") return GramMethod::trick;
  if (name == "auto") return GramMethod::automatic;
  throw ConfigError("unknown Gram method '" + std::string(name) + "' (expected direct, trick or auto)");
}

Gram gram_direct(const DiffMap& h, std::span<const double> u) {
  return {gram(jacobian_direct(h, u)), h.name(), GramMethod::direct, 0.0, 1};
}

Gram gram_trick(const DiffMap& h, std::span<const double> u, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("gram_trick: alpha must be positive");
  const std::size_t n = h.in_dim();
  if (u.size() != n) throw DimensionError("gram_trick: code has wrong length");
  const Vector base = h.evaluate(u);
  Matrix m(n, n);
  parallel_for(n, [&](std::size_t k) {
    Vector shifted(u.begin(), u.end());
    shifted[k] += alpha;
    Linearization lin = h.linearize(shifted);
    const Vector diff = sub(lin.value, base);
    const Vector row = lin.pullback(diff);
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(row[j])) throw NumericError("gram_trick: non-finite gradient for direction " + std::to_string(k));
      m(k, j) = row[j] / alpha;
    }
  });
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = 0.5 * (m(i, j) + m(j, i));
  return {std::move(g), h.name(), GramMethod::trick, alpha, 1};
}

GramMethod resolve_method(GramMethod method, const DiffMap& h) {
  if (method != GramMethod::automatic) return method;
  return h.out_dim() <= h.in_dim() ? GramMethod::direct : GramMethod::trick;
}

Gram compute_gram(const DiffMap& h, std::span<const double> u, GramMethod method, double alpha) {
  return resolve_method(method, h) == GramMethod::direct ? gram_direct(h, u) : gram_trick(h, u, alpha);
}

Gram gram_batch(const CriterionBuilder& builder, const std::vector<Vector>& codes, GramMethod method, double alpha) {
  if (codes.empty()) throw ConfigError("gram_batch: no codes");
  Gram total;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const DiffMap h = builder(codes[i]);
    Gram g = compute_gram(h, codes[i], method, alpha);
    if (i == 0) {
      total = std::move(g);
    } else {
      total.matrix = total.matrix + g.matrix;
    }
  }
  total.code_count = codes.size();
  return total;
}

EigenSplit eigen_split(const Matrix& g, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("eigen_split: epsilon must lie in (0, 1)");
  SymEigen eig = sym_eig(g);
  const std::size_t n = eig.values.size();
  std::size_t active = 0;
  if (n > 0 && eig.values[0] > 0.0) {
    const double threshold = epsilon * eig.values[0];
    while (active < n && eig.values[active] >= threshold) ++active;
  }
  return {eig.vectors.col_range(0, active), eig.vectors.col_range(active, n - active), std::move(eig.values), epsilon};
}

Matrix intersect_suppress(const Matrix& basis, const Matrix& g, double epsilon, const std::string& stage,
                          double activate_epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("intersect_suppress: epsilon must lie in (0, 1)");
  if (basis.rows() != g.rows()) throw DimensionError("intersect_suppress: basis and Gram sizes differ");
  const double lambda0 = sym_eig(g).values.front();
  if (!(lambda0 > 0.0)) return basis;
  const Matrix bt = basis.transpose();
  Matrix reduced = bt * g * basis;
  for (std::size_t i = 0; i < reduced.rows(); ++i)
    for (std::size_t j = i + 1; j < reduced.cols(); ++j) reduced(i, j) = reduced(j, i) = 0.5 * (reduced(i, j) + reduced(j, i));
  const SymEigen eig = sym_eig(reduced);
  const double threshold = epsilon * lambda0;
  std::size_t first = 0;
  while (first < eig.values.size() && eig.values[first] >= threshold) ++first;
  const std::size_t kept = eig.values.size() - first;
  if (kept == 0) throw EmptyIntersectionError(stage, epsilon, activate_epsilon);
  const OrthoBasis ortho = orthonormalize(basis * eig.vectors.col_range(first, kept));
  if (ortho.rank == 0) throw EmptyIntersectionError(stage, epsilon, activate_epsilon);
  return ortho.basis;
}

SortedBasis sort_by_activation(const Matrix& basis, const Matrix& g0, double epsilon, const std::string& stage) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("sort_by_activation: epsilon must lie in (0, 1)");
  if (basis.rows() != g0.rows()) throw DimensionError("sort_by_activation: basis and Gram sizes differ");
  const double lambda0 = sym_eig(g0).values.front();
  if (!(lambda0 > 0.0) || basis.cols() == 0) throw EmptyIntersectionError(stage, epsilon, epsilon);
  Matrix reduced = basis.transpose() * g0 * basis;
  for (std::size_t i = 0; i < reduced.rows(); ++i)
    for (std::size_t j = i + 1; j < reduced.cols(); ++j) reduced(i, j) = reduced(j, i) = 0.5 * (reduced(i, j) + reduced(j, i));
  const SymEigen eig = sym_eig(reduced);
  std::size_t kept = 0;
  while (kept < eig.values.size() && eig.values[kept] >= epsilon * lambda0) ++kept;
  if (kept == 0) throw EmptyIntersectionError(stage, epsilon, epsilon);
  SortedBasis out;
  out.basis = basis * eig.vectors.col_range(0, kept);
  out.activation.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(kept));
  return out;
}

std::vector<Gram> stage_grams(const FormulationPlan& plan, const SubspaceContext& ctx) {
  if (ctx.codes.empty()) throw ConfigError("subspace discovery needs at least one code");
  const std::size_t dim = ctx.criteria.generator->dim(ctx.criteria.space);
  for (const auto& u : ctx.codes)
    if (u.size() != dim) throw DimensionError("code length does not match the latent space");
  std::vector<ReferenceFrame> frames;
  frames.reserve(ctx.codes.size());
  for (const auto& u : ctx.codes) frames.push_back(reference_frame(ctx.criteria, u));

  std::vector<Gram> grams;
  for (const auto& stage : plan.stages) {
    Gram total;
    for (std::size_t i = 0; i < ctx.codes.size(); ++i) {
      const DiffMap h = build_criterion(stage.criterion, ctx.criteria, frames[i]);
      Gram g = compute_gram(h, ctx.codes[i], ctx.method, ctx.alpha);
      if (i == 0) {
        total = std::move(g);
      } else {
        total.matrix = total.matrix + g.matrix;
      }
    }
    total.source = stage.criterion.label();
    total.code_count = ctx.codes.size();
    grams.push_back(std::move(total));
  }
  return grams;
}

Subspace assemble_subspace(const FormulationPlan& plan, const std::vector<Gram>& grams, LatentSpaceSpec space) {
  if (grams.size() != plan.stages.size()) throw DimensionError("assemble_subspace: one Gram per stage expected");
  Subspace s;
  s.formulation = print_plan(plan);
  s.space = space;
  const PlanStage& act = plan.activate();
  Matrix basis = Matrix::identity(space.dim);
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const PlanStage& st = plan.stages[i];
    const double lambda0 = sym_eig(grams[i].matrix).values.front();
    s.provenance.push_back({st.criterion.label(), st.role, st.epsilon, lambda0});
    if (st.role != Role::suppress) continue;
    basis = intersect_suppress(basis, grams[i].matrix, st.epsilon,
                               "suppress " + st.criterion.label() + " (stage " + std::to_string(i) + ")", act.epsilon);
  }
  SortedBasis sorted = sort_by_activation(basis, grams[0].matrix, act.epsilon, "activate " + act.criterion.label());
  s.basis = std::move(sorted.basis);
  s.activation = std::move(sorted.activation);
  return s;
}

Subspace build_subspace(const FormulationPlan& plan, const SubspaceContext& ctx) {
  return assemble_subspace(plan, stage_grams(plan, ctx), ctx.criteria.generator->spec(ctx.criteria.space));
}

Vector perturb(std::span<const double> u, const Matrix& basis, std::size_t k, double magnitude) {
  if (k >= basis.cols()) throw DimensionError("perturb: component " + std::to_string(k) + " out of range");
  if (u.size() != basis.rows()) throw DimensionError("perturb: code length does not match the basis");
  Vector out(u.begin(), u.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += magnitude * basis(i, k);
  return out;
}

Matrix projector(const Matrix& basis) {
  const std::size_t n = basis.rows();
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < basis.cols(); ++k) s += basis(i, k) * basis(j, k);
      p(i, j) = p(j, i) = s;
    }
  return p;
}

}  // namespace latent
