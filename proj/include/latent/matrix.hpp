#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace latent {

using Vector = std::vector<double>;

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  /// Stacks vectors of equal length as columns.
  static Matrix from_columns(std::span<const Vector> columns, std::size_t rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  Vector col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> v);

  Matrix transpose() const;
  /// Columns [first, first+count).
  Matrix col_range(std::size_t first, std::size_t count) const;

  double max_abs() const noexcept;
  double frobenius() const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, std::span<const double> x);

/// AᵀA, exactly symmetric.
Matrix gram(const Matrix& a);
/// Aᵀx.
Vector transpose_times(const Matrix& a, std::span<const double> x);
/// Max-norm of A − Aᵀ.
double asymmetry(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double s);
/// a + s·b
Vector axpy(std::span<const double> a, double s, std::span<const double> b);

/// Eigenpairs of a symmetric matrix, values descending, vectors as columns.
struct SymEigen {
  Vector values;
  Matrix vectors;
};

struct OrthoBasis {
  Matrix basis;
  std::size_t rank = 0;
};

/// Cyclic Jacobi eigensolver. Throws DimensionError for non-square or
/// asymmetric input, NumericError for non-finite entries and
/// ConvergenceError when the sweep budget runs out.
SymEigen sym_eig(const Matrix& g);

/// Modified Gram–Schmidt with re-orthogonalization. Columns whose residual
/// falls below rank_tol times the largest input column norm are dropped.
OrthoBasis orthonormalize(const Matrix& cols, double rank_tol = 1e-10);

/// Sine of the largest principal angle between the spans of two
/// orthonormal bases; 1 when the dimensions differ.
double max_principal_angle_sin(const Matrix& a, const Matrix& b);

/// Max-norm of QᵀQ − I.
double orthonormality_defect(const Matrix& q);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);
std::vector<unsigned char> encode_matrix(const Matrix& m);
Matrix decode_matrix(std::span<const unsigned char> bytes);

}  // namespace latent
