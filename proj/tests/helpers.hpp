#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "latent/diffmap.hpp"
#include "latent/matrix.hpp"
#include "latent/rng.hpp"

namespace testing {

using latent::Matrix;
using latent::Vector;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, std::string_view stream = "m") {
  latent::CounterRng rng(seed, stream);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.normal();
  return m;
}

inline Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
  const Matrix a = random_matrix(n, n, seed);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

/// Q·diag(values)·Qᵀ for the leading columns of an orthonormal Q.
inline Matrix gram_from_frame(const Matrix& q, const Vector& values) {
  const std::size_t n = q.rows();
  Matrix g(n, n);
  for (std::size_t k = 0; k < values.size(); ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) += values[k] * q(i, k) * q(j, k);
  return g;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed, double scale = 1.0, std::string_view stream = "v") {
  latent::CounterRng rng(seed, stream);
  return rng.normal_vector(n, scale);
}

/// Relative Frobenius error of the analytic Jacobian against central
/// differences, both out×in.
inline double jacobian_error(const latent::DiffMap& h, const Vector& u, double step = 1e-5) {
  const Matrix a = latent::jacobian_direct(h, u);
  const Matrix f = latent::finite_diff_jacobian(h, u, step);
  return (a - f).frobenius() / std::max(f.frobenius(), 1e-300);
}

/// Relative error of vjp(u, c) against cᵀ·J_fd for one cotangent.
inline double vjp_error(const latent::DiffMap& h, const Vector& u, std::uint64_t seed, double step = 1e-5) {
  const Vector c = random_vector(h.out_dim(), seed, 1.0, "cotangent");
  const Vector g = h.vjp(u, c);
  const Matrix f = latent::finite_diff_jacobian(h, u, step);
  const Vector fd = latent::transpose_times(f, c);
  return latent::relative_error(g, fd);
}

/// |⟨vjp(u, c), d⟩ − ⟨c, (h(u+δd) − h(u−δd))/2δ⟩| relative to the larger
/// magnitude, worst over `count` random (c, d) pairs. Two evaluations per
/// pair, so it suits maps with large inputs.
inline double directional_error(const latent::DiffMap& h, const Vector& u, std::uint64_t seed, int count = 3,
                                double step = 1e-5) {
  double worst = 0.0;
  for (int t = 0; t < count; ++t) {
    const Vector c = random_vector(h.out_dim(), seed + t, 1.0, "cotangent");
    const Vector d = random_vector(h.in_dim(), seed + t, 1.0, "direction");
    const double analytic = latent::dot(h.vjp(u, c), d);
    const Vector fd = latent::sub(h.evaluate(latent::axpy(u, step, d)), h.evaluate(latent::axpy(u, -step, d)));
    const double numeric = latent::dot(c, fd) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-12}));
  }
  return worst;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("latent_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
