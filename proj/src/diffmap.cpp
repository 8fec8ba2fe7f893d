#include "latent/diffmap.hpp"

#include <algorithm>
#include <cmath>

#include "latent/error.hpp"
#include "latent/parallel.hpp"

namespace latent {

DiffMap::DiffMap(std::size_t in_dim, std::size_t out_dim, EvaluateFn evaluate, LinearizeFn linearize,
                 std::string name)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      evaluate_(std::make_shared<const EvaluateFn>(std::move(evaluate))),
      linearize_(std::make_shared<const LinearizeFn>(std::move(linearize))),
      name_(std::make_shared<const std::string>(std::move(name))) {}

Vector DiffMap::evaluate(std::span<const double> u) const {
  if (u.size() != in_dim_)
    throw DimensionError(name() + ": expected input of length " + std::to_string(in_dim_) + ", got " +
                         std::to_string(u.size()));
  return (*evaluate_)(u);
}

Linearization DiffMap::linearize(std::span<const double> u) const {
  if (u.size() != in_dim_)
    throw DimensionError(name() + ": expected input of length " + std::to_string(in_dim_) + ", got " +
                         std::to_string(u.size()));
  return (*linearize_)(u);
}

Vector DiffMap::vjp(std::span<const double> u, std::span<const double> cotangent) const {
  if (cotangent.size() != out_dim_) throw DimensionError(name() + ": cotangent length mismatch");
  return linearize(u).pullback(cotangent);
}

DiffMap DiffMap::renamed(std::string name) const {
  DiffMap copy = *this;
  copy.name_ = std::make_shared<const std::string>(std::move(name));
  return copy;
}

DiffMap identity_map(std::size_t dim) {
  return DiffMap(
      dim, dim, [](std::span<const double> u) { return Vector(u.begin(), u.end()); },
      [](std::span<const double> u) {
        return Linearization{Vector(u.begin(), u.end()),
                             [](std::span<const double> c) { return Vector(c.begin(), c.end()); }};
      },
      "identity");
}

DiffMap linear_map(Matrix a, std::string name) {
  auto shared = std::make_shared<const Matrix>(std::move(a));
  const std::size_t in = shared->cols();
  const std::size_t out = shared->rows();
  return DiffMap(
      in, out, [shared](std::span<const double> u) { return (*shared) * u; },
      [shared](std::span<const double> u) {
        return Linearization{(*shared) * u, [shared](std::span<const double> c) { return transpose_times(*shared, c); }};
      },
      std::move(name));
}

DiffMap power_map(std::size_t dim, int power) {
  if (power < 1) throw DimensionError("power_map: power must be >= 1");
  auto eval = [power](std::span<const double> u) {
    Vector y(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) y[i] = std::pow(u[i], power);
    return y;
  };
  return DiffMap(
      dim, dim, eval,
      [power, eval](std::span<const double> u) {
        Vector d(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) d[i] = power * std::pow(u[i], power - 1);
        return Linearization{eval(u), [d](std::span<const double> c) {
                               Vector g(c.size());
                               for (std::size_t i = 0; i < c.size(); ++i) g[i] = d[i] * c[i];
                               return g;
                             }};
      },
      "power" + std::to_string(power));
}

DiffMap select(const DiffMap& inner, std::vector<std::size_t> indices, std::string name) {
  for (std::size_t i : indices)
    if (i >= inner.out_dim()) throw DimensionError("select: index out of range");
  auto idx = std::make_shared<const std::vector<std::size_t>>(std::move(indices));
  const std::size_t full = inner.out_dim();
  return DiffMap(
      inner.in_dim(), idx->size(),
      [inner, idx](std::span<const double> u) {
        const Vector y = inner.evaluate(u);
        Vector out(idx->size());
        for (std::size_t k = 0; k < idx->size(); ++k) out[k] = y[(*idx)[k]];
        return out;
      },
      [inner, idx, full](std::span<const double> u) {
        Linearization lin = inner.linearize(u);
        Vector out(idx->size());
        for (std::size_t k = 0; k < idx->size(); ++k) out[k] = lin.value[(*idx)[k]];
        auto pull = std::move(lin.pullback);
        return Linearization{std::move(out), [idx, full, pull](std::span<const double> c) {
                               Vector expanded(full, 0.0);
                               for (std::size_t k = 0; k < idx->size(); ++k) expanded[(*idx)[k]] += c[k];
                               return pull(expanded);
                             }};
      },
      std::move(name));
}

DiffMap concat(std::span<const DiffMap> maps, std::string name) {
  if (maps.empty()) throw DimensionError("concat: no maps");
  const std::size_t in = maps.front().in_dim();
  std::size_t out = 0;
  for (const auto& m : maps) {
    if (m.in_dim() != in) throw DimensionError("concat: input dimension mismatch");
    out += m.out_dim();
  }
  auto parts = std::make_shared<const std::vector<DiffMap>>(maps.begin(), maps.end());
  return DiffMap(
      in, out,
      [parts, out](std::span<const double> u) {
        Vector y;
        y.reserve(out);
        for (const auto& m : *parts) {
          const Vector part = m.evaluate(u);
          y.insert(y.end(), part.begin(), part.end());
        }
        return y;
      },
      [parts, out, in](std::span<const double> u) {
        Vector y;
        y.reserve(out);
        std::vector<Linearization> lins;
        for (const auto& m : *parts) {
          lins.push_back(m.linearize(u));
          y.insert(y.end(), lins.back().value.begin(), lins.back().value.end());
        }
        auto shared = std::make_shared<const std::vector<Linearization>>(std::move(lins));
        return Linearization{std::move(y), [shared, in](std::span<const double> c) {
                               Vector g(in, 0.0);
                               std::size_t offset = 0;
                               for (const auto& lin : *shared) {
                                 const auto piece = c.subspan(offset, lin.value.size());
                                 offset += lin.value.size();
                                 if (std::all_of(piece.begin(), piece.end(), [](double v) { return v == 0.0; }))
                                   continue;
                                 const Vector part = lin.pullback(piece);
                                 for (std::size_t i = 0; i < in; ++i) g[i] += part[i];
                               }
                               return g;
                             }};
      },
      std::move(name));
}

DiffMap compose(const DiffMap& outer, const DiffMap& inner) {
  if (outer.in_dim() != inner.out_dim())
    throw DimensionError("compose: " + outer.name() + " expects " + std::to_string(outer.in_dim()) +
                         " inputs but " + inner.name() + " produces " + std::to_string(inner.out_dim()));
  return DiffMap(
      inner.in_dim(), outer.out_dim(),
      [outer, inner](std::span<const double> u) { return outer.evaluate(inner.evaluate(u)); },
      [outer, inner](std::span<const double> u) {
        Linearization in_lin = inner.linearize(u);
        Linearization out_lin = outer.linearize(in_lin.value);
        auto in_pull = std::move(in_lin.pullback);
        auto out_pull = std::move(out_lin.pullback);
        return Linearization{std::move(out_lin.value), [in_pull, out_pull](std::span<const double> c) {
                               return in_pull(out_pull(c));
                             }};
      },
      outer.name() + "∘" + inner.name());
}

Matrix jacobian_direct(const DiffMap& h, std::span<const double> u) {
  for (double v : u)
    if (!std::isfinite(v)) throw NumericError("jacobian_direct: non-finite input");
  const Linearization lin = h.linearize(u);
  Matrix j(h.out_dim(), h.in_dim());
  parallel_for(h.out_dim(), [&](std::size_t k) {
    Vector e(h.out_dim(), 0.0);
    e[k] = 1.0;
    const Vector row = lin.pullback(e);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!std::isfinite(row[i]))
        throw NumericError(h.name() + ": non-finite vjp in Jacobian row " + std::to_string(k));
      j(k, i) = row[i];
    }
  });
  return j;
}

Matrix finite_diff_jacobian(const DiffMap& h, std::span<const double> u, double step) {
  if (!(step > 0.0)) throw DimensionError("finite_diff_jacobian: step must be positive");
  Matrix j(h.out_dim(), h.in_dim());
  parallel_for(h.in_dim(), [&](std::size_t k) {
    Vector plus(u.begin(), u.end());
    Vector minus(u.begin(), u.end());
    plus[k] += step;
    minus[k] -= step;
    const Vector hp = h.evaluate(plus);
    const Vector hm = h.evaluate(minus);
    for (std::size_t r = 0; r < hp.size(); ++r) j(r, k) = (hp[r] - hm[r]) / (2.0 * step);
  });
  return j;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  return norm(sub(a, b)) / std::max(norm(b), floor);
}

}  // namespace latent
