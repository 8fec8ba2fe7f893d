#include "latent/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "latent/error.hpp"

namespace latent {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix entry count " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(std::span<const Vector> columns, std::size_t rows) {
  Matrix m(rows, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) m.set_col(c, columns[c]);
  return m;
}

Vector Matrix::col(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void Matrix::set_col(std::size_t c, std::span<const double> v) {
  if (v.size() != rows_) throw DimensionError("column length mismatch");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::col_range(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw DimensionError("column range out of bounds");
  Matrix m(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < count; ++c) m(r, c) = (*this)(r, first + c);
  return m;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::frobenius() const noexcept { return norm(data_); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("matrix sum dimension mismatch");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("matrix difference dimension mismatch");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("matrix-vector dimension mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Matrix gram(const Matrix& a) {
  const std::size_t n = a.cols();
  Matrix g(n, n);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      for (std::size_t j = i; j < n; ++j) g(i, j) += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

Vector transpose_times(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DimensionError("transpose-vector dimension mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += xr * row[c];
  }
  return y;
}

double asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("asymmetry of a non-square matrix");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - a(j, i)));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot product length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

Vector add(std::span<const double> a, std::span<const double> b) { return axpy(a, 1.0, b); }

Vector sub(std::span<const double> a, std::span<const double> b) { return axpy(a, -1.0, b); }

Vector scaled(std::span<const double> a, double s) {
  Vector r(a.begin(), a.end());
  for (double& v : r) v *= s;
  return r;
}

Vector axpy(std::span<const double> a, double s, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("vector length mismatch");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
  return r;
}

namespace {

constexpr int kSweepBudget = 100;
constexpr double kOffDiagonalTol = 1e-12;

double max_abs_entry(const Matrix& m) { return m.max_abs(); }

void normalize_sign(Matrix& vectors, std::size_t c) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t r = 0; r < vectors.rows(); ++r) {
    const double a = std::abs(vectors(r, c));
    if (a > best_abs) {
      best_abs = a;
      best = r;
    }
  }
  if (vectors(best, c) < 0.0)
    for (std::size_t r = 0; r < vectors.rows(); ++r) vectors(r, c) = -vectors(r, c);
}

}  // namespace

SymEigen sym_eig(const Matrix& g) {
  if (g.rows() != g.cols()) throw DimensionError("sym_eig requires a square matrix");
  if (!g.all_finite()) throw NumericError("sym_eig: non-finite entries");
  const std::size_t n = g.rows();
  const double scale = max_abs_entry(g);
  if (asymmetry(g) > 1e-8 * (1.0 + scale)) throw DimensionError("sym_eig: input is not symmetric");

  Matrix a = g;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (g(i, j) + g(j, i));
  Matrix v = Matrix::identity(n);
  const double target = kOffDiagonalTol * a.frobenius();

  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_diagonal() > target) {
    if (sweep++ >= kSweepBudget) throw ConvergenceError("sym_eig: no convergence within 100 Jacobi sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  for (std::size_t c = 0; c < n; ++c) normalize_sign(v, c);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
    for (std::size_t r = 0; r < n; ++r)
      if (v(r, x) != v(r, y)) return v(r, x) < v(r, y);
    return false;
  });

  SymEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

OrthoBasis orthonormalize(const Matrix& cols, double rank_tol) {
  if (cols.empty()) throw DimensionError("orthonormalize: empty input");
  if (!(rank_tol > 0.0)) throw DimensionError("orthonormalize: rank_tol must be positive");
  double largest = 0.0;
  for (std::size_t c = 0; c < cols.cols(); ++c) largest = std::max(largest, norm(cols.col(c)));

  std::vector<Vector> accepted;
  if (largest > 0.0) {
    const double drop = rank_tol * largest;
    for (std::size_t c = 0; c < cols.cols(); ++c) {
      Vector v = cols.col(c);
      for (int pass = 0; pass < 2; ++pass)
        for (const Vector& q : accepted) {
          const double proj = dot(q, v);
          for (std::size_t r = 0; r < v.size(); ++r) v[r] -= proj * q[r];
        }
      const double nv = norm(v);
      if (nv < drop) continue;
      for (double& x : v) x /= nv;
      accepted.push_back(std::move(v));
    }
  }
  return {Matrix::from_columns(accepted, cols.rows()), accepted.size()};
}

double max_principal_angle_sin(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("principal angles need equal ambient dimension");
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  // Singular values of (I − BBᵀ)A are the sines of the principal angles.
  const Matrix residual = a - b * (b.transpose() * a);
  const SymEigen e = sym_eig(gram(residual));
  return std::sqrt(std::max(0.0, e.values.front()));
}

double orthonormality_defect(const Matrix& q) {
  const Matrix g = gram(q);
  double m = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) m = std::max(m, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return m;
}

}  // namespace latent
