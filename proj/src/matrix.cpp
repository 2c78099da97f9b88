#include "uqmpc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "uqmpc/errors.hpp"

namespace uqmpc {

void check_finite(const Vector& entries, const char* what) {
  for (double v : entries) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite entry");
  }
}

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw DomainError("Matrix: dimensions must be positive");
  a_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::initializer_list<double> entries)
    : Matrix(rows, cols, Vector(entries)) {}

Matrix::Matrix(int rows, int cols, Vector entries) : rows_(rows), cols_(cols), a_(std::move(entries)) {
  if (rows <= 0 || cols <= 0) throw DomainError("Matrix: dimensions must be positive");
  if (a_.size() != static_cast<size_t>(rows) * cols)
    throw DimensionMismatch("Matrix: entry count does not match dimensions");
  check_finite(a_, "Matrix");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Vector Matrix::row(int i) const {
  Vector r(cols_);
  for (int j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
  return r;
}

Vector Matrix::col(int j) const {
  Vector c(rows_);
  for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::set_row(int i, const Vector& r) {
  if (static_cast<int>(r.size()) != cols_) throw DimensionMismatch("set_row");
  for (int j = 0; j < cols_; ++j) (*this)(i, j) = r[j];
}

void Matrix::set_block(int i, int j, const Matrix& block) {
  if (i + block.rows() > rows_ || j + block.cols() > cols_) throw DimensionMismatch("set_block");
  for (int r = 0; r < block.rows(); ++r)
    for (int c = 0; c < block.cols(); ++c) (*this)(i + r, j + c) = block(r, c);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw DimensionMismatch("Matrix*Matrix");
  Matrix r(a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

Vector operator*(const Matrix& a, const Vector& x) {
  if (a.cols_ != static_cast<int>(x.size())) throw DimensionMismatch("Matrix*Vector");
  Vector r(a.rows_, 0.0);
  for (int i = 0; i < a.rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionMismatch("Matrix+Matrix");
  Matrix r = a;
  for (size_t i = 0; i < r.a_.size(); ++i) r.a_[i] += b.a_[i];
  return r;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionMismatch("Matrix-Matrix");
  Matrix r = a;
  for (size_t i = 0; i < r.a_.size(); ++i) r.a_[i] -= b.a_[i];
  return r;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix r = a;
  for (double& v : r.a_) v *= s;
  return r;
}

namespace {

struct LuFactors {
  Matrix lu;              // L (unit diagonal, below) and U (on and above)
  std::vector<int> perm;  // row permutation applied to the input
};

LuFactors lu_factor(const Matrix& A) {
  const int n = A.rows();
  if (n != A.cols()) throw DimensionMismatch("lu_factor: matrix not square");

  Vector row_scale(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) row_scale[i] = std::max(row_scale[i], std::abs(A(i, j)));

  LuFactors f{A, std::vector<int>(n)};
  for (int i = 0; i < n; ++i) f.perm[i] = i;

  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(f.lu(i, k)) > std::abs(f.lu(p, k))) p = i;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
      std::swap(f.perm[k], f.perm[p]);
    }
    const double pivot = f.lu(k, k);
    const double scale = row_scale[f.perm[k]];
    if (std::abs(pivot) < 1e-12 * (scale > 0.0 ? scale : 1.0))
      throw SingularMatrix("lu_factor: pivot below 1e-12 of row scale");
    for (int i = k + 1; i < n; ++i) {
      f.lu(i, k) /= pivot;
      const double lik = f.lu(i, k);
      if (lik == 0.0) continue;
      for (int j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
    }
  }
  return f;
}

Vector lu_solve(const LuFactors& f, const Vector& b) {
  const int n = f.lu.rows();
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (int i = 1; i < n; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

}  // namespace

Vector solve_linear(const Matrix& A, const Vector& b) {
  if (A.rows() != static_cast<int>(b.size())) throw DimensionMismatch("solve_linear");
  return lu_solve(lu_factor(A), b);
}

Matrix inverse(const Matrix& A) {
  const int n = A.rows();
  const LuFactors f = lu_factor(A);
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector x = lu_solve(f, e);
    for (int i = 0; i < n; ++i) inv(i, j) = x[i];
    e[j] = 0.0;
  }
  return inv;
}

Matrix matrix_power(const Matrix& A, int k) {
  if (A.rows() != A.cols()) throw DimensionMismatch("matrix_power: matrix not square");
  if (k < 0) throw DomainError("matrix_power: negative exponent");
  Matrix result = Matrix::identity(A.rows());
  Matrix base = A;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

double spectral_radius_estimate(const Matrix& A, int iterations) {
  if (A.rows() != A.cols()) throw DimensionMismatch("spectral_radius_estimate");
  const int n = A.rows();
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * i;  // fixed, generic start
  double norm = two_norm(v);
  for (double& x : v) x /= norm;

  // Per-step growth oscillates for complex eigenvalue pairs; the geometric
  // mean over the second half of the run converges to |lambda|_max.
  double log_sum = 0.0;
  int count = 0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = A * v;
    const double g = two_norm(w);
    if (g == 0.0) return 0.0;  // nilpotent
    for (int i = 0; i < n; ++i) v[i] = w[i] / g;
    if (it >= iterations / 2) {
      log_sum += std::log(g);
      ++count;
    }
  }
  return std::exp(log_sum / count);
}

Vector vadd(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vadd");
  Vector r = a;
  for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Vector vsub(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vsub");
  Vector r = a;
  for (size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Vector vscale(double s, const Vector& a) {
  Vector r = a;
  for (double& v : r) v *= s;
  return r;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double two_norm(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector concat(const Vector& a, const Vector& b) {
  Vector r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

Vector zeros(int n) { return Vector(static_cast<size_t>(n), 0.0); }
Vector ones(int n) { return Vector(static_cast<size_t>(n), 1.0); }

}  // namespace uqmpc
