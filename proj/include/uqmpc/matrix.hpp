#pragma once

#include <initializer_list>
#include <vector>

namespace uqmpc {

using Vector = std::vector<double>;

/// Dense real matrix, row-major. Problem sizes in this project are tiny
/// (state + lifted inputs stay well under 100), so there is no blocking,
/// no sparsity and no expression templates; every operation materialises
/// its result.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);  // zero-initialised
  Matrix(int rows, int cols, std::initializer_list<double> entries);
  Matrix(int rows, int cols, Vector entries);

  static Matrix identity(int n);
  static Matrix diagonal(const Vector& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  const Vector& data() const { return a_; }

  Matrix transpose() const;
  Vector row(int i) const;
  Vector col(int j) const;
  void set_row(int i, const Vector& r);

  /// Writes `block` with its top-left corner at (i, j).
  void set_block(int i, int j, const Matrix& block);

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Vector operator*(const Matrix& a, const Vector& x);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);

  bool operator==(const Matrix& other) const = default;

 private:
  int rows_ = 0, cols_ = 0;
  Vector a_;
};

/// Solves A x = b by LU with partial pivoting. Throws SingularMatrix when a
/// pivot falls below 1e-12 relative to the scale of its original row.
Vector solve_linear(const Matrix& A, const Vector& b);

/// A^{-1} via one LU factorisation and n back-substitutions.
Matrix inverse(const Matrix& A);

/// A^k by repeated squaring; A^0 = I.
Matrix matrix_power(const Matrix& A, int k);

/// Power-iteration estimate of the spectral radius. Good to a couple of
/// per cent for the stability gates used here; not an eigensolver.
double spectral_radius_estimate(const Matrix& A, int iterations = 200);

// Vector helpers. Vector is a bare std::vector<double>, so these are free
// functions rather than operators.
Vector vadd(const Vector& a, const Vector& b);
Vector vsub(const Vector& a, const Vector& b);
Vector vscale(double s, const Vector& a);
double dot(const Vector& a, const Vector& b);
double inf_norm(const Vector& a);
double two_norm(const Vector& a);
Vector concat(const Vector& a, const Vector& b);
Vector zeros(int n);
Vector ones(int n);

/// Throws DomainError if any entry is NaN or infinite.
void check_finite(const Vector& entries, const char* what);

}  // namespace uqmpc
