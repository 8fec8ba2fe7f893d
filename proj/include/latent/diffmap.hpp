#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "latent/matrix.hpp"

namespace latent {

/// Value of a map at a point together with its pullback (cotangent ↦
/// input gradient). The pullback owns whatever forward intermediates it
/// needs and is safe to call concurrently.
struct Linearization {
  Vector value;
  std::function<Vector(std::span<const double>)> pullback;
};

/// A differentiable map ℝⁿ → ℝᵐ with reverse-mode derivatives.
///
/// Implementations provide forward evaluation and a linearization; vjp is
/// derived from the latter. Instances are immutable and cheap to copy.
class DiffMap {
 public:
  using EvaluateFn = std::function<Vector(std::span<const double>)>;
  using LinearizeFn = std::function<Linearization(std::span<const double>)>;

  DiffMap(std::size_t in_dim, std::size_t out_dim, EvaluateFn evaluate, LinearizeFn linearize,
          std::string name = "map");

  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }
  const std::string& name() const noexcept { return *name_; }

  Vector evaluate(std::span<const double> u) const;
  Linearization linearize(std::span<const double> u) const;
  Vector vjp(std::span<const double> u, std::span<const double> cotangent) const;

  /// Same map, different display name.
  DiffMap renamed(std::string name) const;

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::shared_ptr<const EvaluateFn> evaluate_;
  std::shared_ptr<const LinearizeFn> linearize_;
  std::shared_ptr<const std::string> name_;
};

DiffMap identity_map(std::size_t dim);
/// u ↦ A·u
DiffMap linear_map(Matrix a, std::string name = "linear");
/// Elementwise x ↦ xᵖ for integer p ≥ 1.
DiffMap power_map(std::size_t dim, int power);
/// Keeps the listed output coordinates of `inner`, in order.
DiffMap select(const DiffMap& inner, std::vector<std::size_t> indices, std::string name = "select");
/// Concatenates the outputs of maps sharing one input.
DiffMap concat(std::span<const DiffMap> maps, std::string name = "concat");

/// outer ∘ inner. Throws DimensionError when outer.in_dim ≠ inner.out_dim.
DiffMap compose(const DiffMap& outer, const DiffMap& inner);

/// Row k of the result is vjp(u, e_k). Rows are computed in parallel from
/// a single linearization.
Matrix jacobian_direct(const DiffMap& h, std::span<const double> u);

/// Central differences (h(u+δe_k) − h(u−δe_k)) / 2δ, one column per input.
Matrix finite_diff_jacobian(const DiffMap& h, std::span<const double> u, double step = 1e-5);

/// ‖a − b‖ / max(‖b‖, floor)
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-300);

}  // namespace latent
