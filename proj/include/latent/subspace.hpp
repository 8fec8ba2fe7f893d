#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "latent/criteria.hpp"
#include "latent/diffmap.hpp"
#include "latent/formulation.hpp"
#include "latent/generator.hpp"
#include "latent/matrix.hpp"

namespace latent {

enum class GramMethod { direct, trick, automatic };
std::string_view to_string(GramMethod method);
GramMethod parse_gram_method(std::string_view name);

/// JᵀJ of a criterion at one or more latent points.
struct Gram {
  Matrix matrix;
  std::string source;
  GramMethod method = GramMethod::direct;
  double alpha = 0.0;
  std::size_t code_count = 1;
};

inline constexpr double kDefaultEpsilon = 3e-3;
inline constexpr double kDefaultAlpha = 1e-3;

/// G = JᵀJ with J from jacobian_direct.
Gram gram_direct(const DiffMap& h, std::span<const double> u);
/// Row k = Jᵀ(u + αe_k)·(h(u + αe_k) − h(u)) / α, then (M + Mᵀ)/2.
Gram gram_trick(const DiffMap& h, std::span<const double> u, double alpha = kDefaultAlpha);
/// Direct when out_dim ≤ in_dim, trick otherwise, unless forced.
GramMethod resolve_method(GramMethod method, const DiffMap& h);
Gram compute_gram(const DiffMap& h, std::span<const double> u, GramMethod method, double alpha = kDefaultAlpha);

using CriterionBuilder = std::function<DiffMap(std::span<const double> code)>;
/// Sum of per-code Grams; the criterion is rebuilt for each code. Throws
/// ConfigError for an empty code list.
Gram gram_batch(const CriterionBuilder& builder, const std::vector<Vector>& codes, GramMethod method,
                double alpha = kDefaultAlpha);

struct EigenSplit {
  Matrix V;
  Matrix W;
  Vector values;
  double epsilon = kDefaultEpsilon;
};

/// Columns of sym_eig(G) with λ ≥ ε·λ₀ go to V, the rest to W. When λ₀ ≤ 0,
/// V is empty and W holds every eigenvector.
EigenSplit eigen_split(const Matrix& g, double epsilon);

/// B·E where E spans the eigenvectors of BᵀGB with λ < ε·λ₀(G). Returns B
/// when λ₀(G) ≤ 0. Throws EmptyIntersectionError naming `stage`.
Matrix intersect_suppress(const Matrix& basis, const Matrix& g, double epsilon, const std::string& stage = "suppress",
                          double activate_epsilon = kDefaultEpsilon);

struct SortedBasis {
  Matrix basis;
  /// Rayleigh quotients of G₀ along each column, descending.
  Vector activation;
};
/// Eigenvectors of BᵀG₀B with λ ≥ ε·λ₀(G₀), sorted descending, mapped back
/// by B. Throws EmptyIntersectionError when none qualify.
SortedBasis sort_by_activation(const Matrix& basis, const Matrix& g0, double epsilon,
                               const std::string& stage = "activate");

struct ProvenanceEntry {
  std::string criterion;
  Role role = Role::activate;
  double epsilon = kDefaultEpsilon;
  double lambda0 = 0.0;
};

struct Subspace {
  Matrix basis;
  Vector activation;
  std::string formulation;
  LatentSpaceSpec space;
  std::vector<ProvenanceEntry> provenance;

  std::size_t dim() const noexcept { return basis.cols(); }
};

/// What a plan needs besides its text: the criterion context and the codes
/// whose Grams are summed.
struct SubspaceContext {
  CriterionContext criteria;
  std::vector<Vector> codes;
  GramMethod method = GramMethod::automatic;
  double alpha = kDefaultAlpha;
};

/// One Gram per plan stage, in plan order; masks are frozen per code.
std::vector<Gram> stage_grams(const FormulationPlan& plan, const SubspaceContext& ctx);
/// Folds suppress stages through intersect_suppress in order starting from
/// the identity, then sorts against the activate Gram.
Subspace assemble_subspace(const FormulationPlan& plan, const std::vector<Gram>& grams, LatentSpaceSpec space);
Subspace build_subspace(const FormulationPlan& plan, const SubspaceContext& ctx);

/// u + magnitude·S[:, k]. Throws DimensionError for a bad k or length.
Vector perturb(std::span<const double> u, const Matrix& basis, std::size_t k, double magnitude);

/// SSᵀ
Matrix projector(const Matrix& basis);

}  // namespace latent
